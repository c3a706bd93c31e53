"""Independent time-dependent Schroedinger integrator.

The split-step scheme keeps the wavefunction in the mixed ``(k_x, y)``
representation, where the kinetic term ``(p_x + m w y)^2 / 2m`` is a
diagonal multiplier.  The electric field is carried as the vector
potential ``A_y = -c E t`` instead of the scalar potential ``-q E y``;
the two gauges differ by the pointwise phase ``exp(i q E t y / hbar)``
which is tracked in :attr:`SampledState.ky_offset`.  In this gauge the
remaining piece ``(p_y + q E t)^2 / 2m`` is diagonal in ``k_y`` and its
time integral over a step is done exactly, so one step is

    exp(-i K_x dt/2) . U_y(t, t+dt) . exp(-i K_x dt/2)

with second-order accuracy in ``dt``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BoundaryError, ParameterError
from .grid import GridSpec, SampledState, atomic_write_text, inner
from .operators import _kinetic_x_symbol, check_resolution
from .params import PhysicalParams

BOUNDARY_BAND = 4.0
BOUNDARY_TOL = 1e-10
MAX_DT_FRACTION = 0.01


class Scheme(str, enum.Enum):
    SPLIT_STEP = "split-step2"
    CRANK_NICOLSON = "crank-nicolson"


@dataclass(frozen=True)
class EvolverConfig:
    dt: float
    n_steps: int
    scheme: Scheme = Scheme.SPLIT_STEP
    sample_every: int = 1
    check_boundary: bool = True
    allow_large_dt: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.dt <= 0 or self.n_steps < 0 or self.sample_every < 1:
            raise ParameterError("need dt > 0, n_steps >= 0 and sample_every >= 1")


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    mean_x: list = field(default_factory=list)
    mean_y: list = field(default_factory=list)
    mean_pix: list = field(default_factory=list)
    mean_piy: list = field(default_factory=list)
    norm: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    COLUMNS = ("t", "mean_x", "mean_y", "pix", "piy", "norm", "energy")

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "t": np.asarray(self.times), "mean_x": np.asarray(self.mean_x),
            "mean_y": np.asarray(self.mean_y), "pix": np.asarray(self.mean_pix),
            "piy": np.asarray(self.mean_piy), "norm": np.asarray(self.norm),
            "energy": np.asarray(self.energy),
        }

    def to_csv(self, path) -> None:
        cols = self.arrays()
        lines = [",".join(self.COLUMNS)]
        for row in zip(*(cols[c] for c in self.COLUMNS)):
            lines.append(",".join(repr(float(v)) for v in row))
        atomic_write_text(path, "\n".join(lines) + "\n")

    @classmethod
    def read_csv(cls, path) -> "Trajectory":
        traj = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                traj.times.append(float(row["t"]))
                traj.mean_x.append(float(row["mean_x"]))
                traj.mean_y.append(float(row["mean_y"]))
                traj.mean_pix.append(float(row["pix"]))
                traj.mean_piy.append(float(row["piy"]))
                traj.norm.append(float(row["norm"]))
                traj.energy.append(float(row["energy"]))
        return traj


def coherent_packet(params: PhysicalParams, grid: GridSpec, x_c: float, y_c: float,
                    kinetic_x: float = 0.0, kinetic_y: float = 0.0, t: float = 0.0) -> SampledState:
    """Lowest-Landau-level Gaussian ``exp(-r^2 / 4 l^2)`` boosted to the given kinetic momentum.

    The factor ``exp(-i m w (x - x_c)(y - y_c) / 2 hbar)`` converts the
    symmetric-gauge ground orbital to the Landau gauge, so the packet is
    a minimum-uncertainty coherent state that circles without breathing.
    """
    s = params.scale
    X, Y = grid.mesh()
    gauss = math.sqrt(s * s / (2.0 * math.pi)) * np.exp(-0.25 * s * s * ((X - x_c) ** 2 + (Y - y_c) ** 2))
    px = kinetic_x - params.mass * params.omega_c * y_c
    lin = px * (X - x_c) + kinetic_y * (Y - y_c) - 0.5 * params.mass * params.omega_c * (X - x_c) * (Y - y_c)
    phase = np.exp(1j * lin / params.hbar)
    return SampledState(grid, t, gauss * phase, params, 0.0, {"family": "coherent"})


def _band_probability(prob: np.ndarray, grid: GridSpec, axis: str, band: float) -> float:
    total = prob.sum()
    if axis == "x":
        coord, lo, hi, marg = grid.x, grid.x_min, grid.x_max, prob.sum(axis=1)
    else:
        coord, lo, hi, marg = grid.y, grid.y_min, grid.y_max, prob.sum(axis=0)
    mask = (coord < lo + band) | (coord > hi - band)
    return float(marg[mask].sum() / total)


def confined_axes(state: SampledState, params: PhysicalParams) -> list[str]:
    band = BOUNDARY_BAND * params.magnetic_length
    prob = state.probability()
    return [ax for ax in ("x", "y") if _band_probability(prob, state.grid, ax, band) < BOUNDARY_TOL]


def observe(chi: np.ndarray, grid: GridSpec, params: PhysicalParams, t: float, ky_offset: float) -> dict:
    """Expectation values of x, y, pi'_x, pi'_y, the norm and H for a state in the stored gauge."""
    return observe_mixed(sfft.fft(chi, axis=0), grid, params, t, ky_offset, chi)


def observe_mixed(work: np.ndarray, grid: GridSpec, params: PhysicalParams, t: float, ky_offset: float,
                  chi: np.ndarray | None = None) -> dict:
    """Same as :func:`observe` from the (k_x, y) representation.

    Momentum moments come from Parseval sums, so a sample costs one
    inverse x transform and one forward y transform.
    """
    if chi is None:
        chi = sfft.ifft(work, axis=0)
    prob = np.abs(chi) ** 2
    nrm2 = float(prob.sum())
    mean_x = float(prob.sum(axis=1) @ grid.x / nrm2)
    mean_y = float(prob.sum(axis=0) @ grid.y / nrm2)
    pk = np.abs(work) ** 2
    pk_total = float(pk.sum())
    kin_x = _kinetic_x_symbol(grid, params)
    shift = params.mass * params.omega_c * grid.y[None, :]
    pix = float(np.sum((kin_x - shift) * pk) / pk_total)
    kin_x_sq = float(np.sum(kin_x**2 * pk) / pk_total)
    full = np.abs(sfft.fft(work, axis=1)) ** 2
    py_sym = params.hbar * (grid.ky() + ky_offset)
    marg = full.sum(axis=0)
    full_total = float(marg.sum())
    py = float(marg @ py_sym / full_total)
    py_sq = float(marg @ py_sym**2 / full_total)
    qE = params.charge * params.field_E
    piy = py + params.mass * params.omega_c * mean_x - qE * t
    energy = (kin_x_sq + py_sq) / (2.0 * params.mass) - qE * mean_y
    return {"t": t, "mean_x": mean_x, "mean_y": mean_y, "pix": pix, "piy": piy,
            "norm": math.sqrt(nrm2 * grid.cell_area), "energy": energy}


def _record(traj: Trajectory, obs: dict) -> None:
    traj.times.append(obs["t"])
    traj.mean_x.append(obs["mean_x"])
    traj.mean_y.append(obs["mean_y"])
    traj.mean_pix.append(obs["pix"])
    traj.mean_piy.append(obs["piy"])
    traj.norm.append(obs["norm"])
    traj.energy.append(obs["energy"])


def _check_preconditions(initial: SampledState, config: EvolverConfig, params: PhysicalParams) -> list[str]:
    if not config.allow_large_dt and config.dt > MAX_DT_FRACTION * params.period * (1 + 1e-12):
        raise ParameterError(f"dt = {config.dt} exceeds {MAX_DT_FRACTION} of the cyclotron period")
    check_resolution(initial.amplitudes, initial.grid, params)
    axes = confined_axes(initial, params) if config.check_boundary else []
    return axes


def _guard(chi: np.ndarray, grid: GridSpec, params: PhysicalParams, axes: list[str], t: float) -> None:
    band = BOUNDARY_BAND * params.magnetic_length
    prob = np.abs(chi) ** 2
    for ax in axes:
        frac = _band_probability(prob, grid, ax, band)
        if frac > BOUNDARY_TOL:
            raise BoundaryError(f"packet reached the {ax} boundary at t = {t:.6g} (band probability {frac:.2e})")


def evolve(initial: SampledState, config: EvolverConfig, params: PhysicalParams | None = None):
    """Propagate ``initial`` for ``config.n_steps`` steps; returns (final state, trajectory)."""
    params = params or initial.params
    if params is None:
        raise ParameterError("physical parameters required")
    if config.scheme is Scheme.CRANK_NICOLSON:
        return _evolve_cn(initial, config, params)
    grid = initial.grid
    if not (grid.periodic_x and grid.periodic_y):
        raise ParameterError("the split-step scheme needs a doubly periodic grid")
    axes = _check_preconditions(initial, config, params)

    hbar, m = params.hbar, params.mass
    qE = params.charge * params.field_E
    dt = config.dt
    half_kx = np.exp(-1j * _kinetic_x_symbol(grid, params) ** 2 * dt / (4.0 * m * hbar))
    hky = hbar * grid.ky()[None, :]

    t = initial.t
    g = initial.ky_offset
    traj = Trajectory()
    chi = initial.amplitudes.copy()
    work = sfft.fft(chi, axis=0)
    _record(traj, observe_mixed(work, grid, params, t, g, chi))
    for step in range(1, config.n_steps + 1):
        work *= half_kx
        pa = hky + hbar * g
        g_next = g + qE * dt / hbar
        pb = hky + hbar * g_next
        # exact time integral of (p_y + hbar g(t))^2 / 2m over the step (g is linear in t)
        work = sfft.fft(work, axis=1)
        work *= np.exp(-1j * dt * (pa * pa + pa * pb + pb * pb) / (6.0 * m * hbar))
        work = sfft.ifft(work, axis=1)
        work *= half_kx
        t = initial.t + step * dt
        g = g_next
        if step % config.sample_every == 0 or step == config.n_steps:
            chi = sfft.ifft(work, axis=0)
            if axes:
                _guard(chi, grid, params, axes, t)
            _record(traj, observe_mixed(work, grid, params, t, g, chi))
    chi = sfft.ifft(work, axis=0)
    final = SampledState(grid, t, chi, params, g, dict(initial.meta))
    return final, traj


# -- Crank-Nicolson ---------------------------------------------------------------------


def _fd_matrix(n: int, h: float, periodic: bool) -> sp.csr_matrix:
    """Antisymmetric 4th-order first-derivative matrix (zero Dirichlet padding if not periodic)."""
    coeffs = {-2: 1.0 / 12, -1: -8.0 / 12, 1: 8.0 / 12, 2: -1.0 / 12}
    rows, cols, vals = [], [], []
    for i in range(n):
        for off, c in coeffs.items():
            j = i + off
            if periodic:
                j %= n
            elif not 0 <= j < n:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(c / h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def hamiltonian_matrix(grid: GridSpec, params: PhysicalParams) -> sp.csr_matrix:
    """Sparse Hermitian FD4 Hamiltonian (scalar-potential gauge), ordering row-major (x slowest)."""
    hbar, m = params.hbar, params.mass
    ix, iy = sp.identity(grid.n_x), sp.identity(grid.n_y)
    px = -1j * hbar * sp.kron(_fd_matrix(grid.n_x, grid.h_x, grid.periodic_x), iy)
    py = -1j * hbar * sp.kron(ix, _fd_matrix(grid.n_y, grid.h_y, grid.periodic_y))
    ydiag = sp.kron(ix, sp.diags(grid.y))
    kin_x = px + params.mass * params.omega_c * ydiag
    h = (kin_x @ kin_x + py @ py) / (2.0 * m) - params.charge * params.field_E * ydiag
    return h.tocsc()


def _evolve_cn(initial: SampledState, config: EvolverConfig, params: PhysicalParams):
    grid = initial.grid
    axes = _check_preconditions(initial, config, params)
    hmat = hamiltonian_matrix(grid, params)
    eye = sp.identity(hmat.shape[0], format="csc")
    a = 1j * config.dt / (2.0 * params.hbar)
    lu = spla.splu((eye + a * hmat).tocsc())
    rhs_op = (eye - a * hmat).tocsr()
    psi = initial.physical_amplitudes().ravel().copy()
    t = initial.t
    traj = Trajectory()
    _record(traj, observe(psi.reshape(grid.shape), grid, params, t, 0.0))
    for step in range(1, config.n_steps + 1):
        psi = lu.solve(rhs_op @ psi)
        t = initial.t + step * config.dt
        if step % config.sample_every == 0 or step == config.n_steps:
            field2d = psi.reshape(grid.shape)
            if axes:
                _guard(field2d, grid, params, axes, t)
            _record(traj, observe(field2d, grid, params, t, 0.0))
    final = SampledState(grid, t, psi.reshape(grid.shape), params, 0.0, dict(initial.meta))
    return final, traj


# -- Ehrenfest / Lorentz ----------------------------------------------------------------


@dataclass
class EhrenfestReport:
    defect_x: float
    defect_y: float
    pix_drift: float
    piy_drift: float
    mean_velocity_x: float
    drift_velocity: float
    norm_drift: float

    @property
    def max_defect(self) -> float:
        return max(self.defect_x, self.defect_y)

    def to_dict(self) -> dict:
        return {**self.__dict__, "max_defect": self.max_defect}


def lorentz_defects(traj: Trajectory, params: PhysicalParams) -> tuple[float, float]:
    """Second-difference test of m x'' = m w y' and m y'' = -m w x' + q E.

    Each defect is ``max |lhs - rhs| / max(|lhs|, |rhs|)`` over the
    interior samples; sampling must be uniform.
    """
    t = np.asarray(traj.times)
    x = np.asarray(traj.mean_x)
    y = np.asarray(traj.mean_y)
    if len(t) < 3:
        raise ParameterError("need at least three samples")
    step = np.diff(t)
    if not np.allclose(step, step[0], rtol=1e-9, atol=0):
        raise ParameterError("trajectory sampling must be uniform")
    d = step[0]
    ax = (x[2:] - 2 * x[1:-1] + x[:-2]) / d**2
    ay = (y[2:] - 2 * y[1:-1] + y[:-2]) / d**2
    vx = (x[2:] - x[:-2]) / (2 * d)
    vy = (y[2:] - y[:-2]) / (2 * d)
    w = params.omega_c
    rhs_x = w * vy
    rhs_y = -w * vx + params.charge * params.field_E / params.mass

    def rel(lhs, rhs):
        scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs)) / scale) if scale > 0 else 0.0

    return rel(ax, rhs_x), rel(ay, rhs_y)


def ehrenfest_lorentz_check(initial: SampledState, config: EvolverConfig,
                            params: PhysicalParams | None = None) -> tuple[EhrenfestReport, Trajectory]:
    params = params or initial.params
    _, traj = evolve(initial, config, params)
    dx, dy = lorentz_defects(traj, params)
    arr = traj.arrays()
    momentum_scale = params.mass * abs(params.omega_c) * params.magnetic_length
    span = arr["t"][-1] - arr["t"][0]
    report = EhrenfestReport(
        defect_x=dx,
        defect_y=dy,
        pix_drift=float(np.max(np.abs(arr["pix"] - arr["pix"][0])) / momentum_scale),
        piy_drift=float(np.max(np.abs(arr["piy"] - arr["piy"][0])) / momentum_scale),
        mean_velocity_x=float((arr["mean_x"][-1] - arr["mean_x"][0]) / span) if span > 0 else 0.0,
        drift_velocity=params.light_speed * params.field_E / params.field_B,
        norm_drift=float(np.max(np.abs(arr["norm"] - arr["norm"][0]))),
    )
    return report, traj


def overlap(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> float:
    """|<a|b>| / (||a|| ||b||)."""
    return float(abs(inner(a, b, grid)) / math.sqrt(np.real(inner(a, a, grid)) * np.real(inner(b, b, grid))))
