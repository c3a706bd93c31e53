"""Electric current, Hall and longitudinal resistivity, and the
quantization conditions tied to invariance under the y magnetic translation."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import ParameterError, SingularityError
from .grid import GridSpec, SampledState, atomic_write_text, window_norm
from .operators import (
    _kinetic_x_symbol,
    extract_global_phase,
    momentum_x,
    momentum_y,
    sample,
    shift_y_array,
)
from .params import PhysicalParams, derive
from .states import AnalyticState, Family, eval_ground

INTEGER_TOL = 1e-9


@dataclass
class CurrentField:
    grid: GridSpec
    j_x: np.ndarray
    j_y: np.ndarray
    t: float

    def to_csv(self, path, stride: int = 1) -> None:
        X, Y = self.grid.mesh()
        X = np.broadcast_to(X, self.grid.shape)[::stride, ::stride].ravel()
        Y = np.broadcast_to(Y, self.grid.shape)[::stride, ::stride].ravel()
        jx = self.j_x[::stride, ::stride].ravel()
        jy = self.j_y[::stride, ::stride].ravel()
        rows = ["x,y,jx,jy"] + [f"{a!r},{b!r},{c!r},{d!r}" for a, b, c, d in zip(X, Y, jx, jy)]
        atomic_write_text(path, "\n".join(rows) + "\n")


def current_density(source, params: PhysicalParams, grid: GridSpec | None = None, t: float | None = None,
                    include_vector_potential: bool = True) -> CurrentField:
    """J = (i q hbar / 2m)(psi grad psi* - psi* grad psi) - (q^2/mc) A |psi|^2 with A = B(-y, 0).

    Written as ``J = (q/m) Re(psi* (p - qA/c) psi)``.  ``source`` is a
    SampledState or an AnalyticState (then ``grid`` and ``t`` are needed).
    With ``include_vector_potential=False`` the field term is dropped and
    plain canonical momenta are used.
    """
    if isinstance(source, AnalyticState):
        if grid is None or t is None:
            raise ParameterError("an analytic source needs a grid and a time")
        source = sample(source, params, grid, t, ensure=False)
    state: SampledState = source
    grid = state.grid
    psi = state.amplitudes
    q, m, hbar = params.charge, params.mass, params.hbar
    if include_vector_potential:
        if grid.periodic_x:
            kin = sfft.ifft(_kinetic_x_symbol(grid, params) * sfft.fft(psi, axis=0), axis=0)
        else:
            kin = momentum_x(psi, grid, params) + m * params.omega_c * grid.y[None, :] * psi
        ky_offset = state.ky_offset
    else:
        kin = momentum_x(psi, grid, None) * hbar
        ky_offset = 0.0
    py = momentum_y(psi, grid, hbar, ky_offset)
    j_x = q / m * np.real(np.conj(psi) * kin)
    j_y = q / m * np.real(np.conj(psi) * py)
    return CurrentField(grid, j_x, j_y, state.t)


def ground_current_closed_form(params: PhysicalParams, delta_x: float, delta_t: float, x, y, t):
    """The printed ground-state current: j_x = (q^2 E/(m w))|psi|^2, j_y = -q w (Dx - v_d Dt)|psi|^2."""
    w = params.omega_c
    q = params.charge
    v_d = derive(params).drift_velocity
    dens = np.abs(eval_ground(params, delta_x, delta_t, x, y, t)) ** 2
    j_x = q * q * params.field_E / (params.mass * w) * dens
    j_y = -q * w * ((np.asarray(x) - delta_x) - v_d * (np.asarray(t) - delta_t)) * dens
    return np.broadcast_to(j_x, np.broadcast(x, y).shape), j_y * np.ones_like(np.asarray(y), dtype=float)


def continuity_defect(before: SampledState, now: SampledState, after: SampledState,
                      params: PhysicalParams) -> float:
    """max |d rho/dt + div(J/q)| / max |d rho/dt| with the time derivative from centred differences."""
    dt = 0.5 * (after.t - before.t)
    drho = (np.abs(after.amplitudes) ** 2 - np.abs(before.amplitudes) ** 2) / (2 * dt)
    cur = current_density(now, params)
    grid = now.grid
    q = params.charge
    div = (np.real(1j * momentum_x(cur.j_x / q, grid, None)) + np.real(1j * momentum_y(cur.j_y / q, grid)))
    scale = float(np.max(np.abs(drho)))
    if scale == 0.0:
        scale = float(np.max(np.abs(div))) or 1.0
    return float(np.max(np.abs(drho + div)) / scale)


# -- resistivity ---------------------------------------------------------------------------


def hall_resistivity(params: PhysicalParams, psi_sq):
    """Local rho_H = (hbar/q^2)(m w/hbar) / |psi|^2."""
    return params.mass * params.omega_c / params.charge**2 / np.asarray(psi_sq)


def hall_resistivity_expectation(params: PhysicalParams, delta_x: float, delta_y: float) -> float:
    """<rho_H> = (hbar/q^2)(m w/hbar) dx dy over the cell of area dx dy."""
    if delta_x < 0 or delta_y < 0:
        raise ParameterError("cell sides must be non-negative")
    return params.hbar / params.charge**2 * (params.mass * params.omega_c / params.hbar) * delta_x * delta_y


def hall_resistivity_quadrature(params: PhysicalParams, delta_x: float, delta_y: float,
                                density: Callable, origin: tuple[float, float], nodes: int = 64) -> float:
    """Integral of rho_H |psi|^2 over [x0, x0+dx] x [y0, y0+dy] by the tensor midpoint rule.

    ``density(x, y)`` returns |psi|^2; it must be positive on the cell.
    """
    hx, hy = delta_x / nodes, delta_y / nodes
    xs = origin[0] + hx * (np.arange(nodes) + 0.5)
    ys = origin[1] + hy * (np.arange(nodes) + 0.5)
    dens = np.asarray(density(xs[:, None], ys[None, :]), dtype=float)
    if np.any(dens <= 0):
        raise SingularityError("|psi|^2 vanishes inside the cell; rho_H is unbounded there")
    return float(np.sum(hall_resistivity(params, dens) * dens) * hx * hy)


def invariance_conditions(params: PhysicalParams, delta_x: float, delta_y: float, delta_t: float,
                          tol: float = INTEGER_TOL) -> tuple[float, float, bool]:
    """l = m w dx dy / (2 pi hbar), k = q E dt dy / (2 pi hbar); invariant iff both are integers."""
    two_pi_hbar = 2.0 * math.pi * params.hbar
    l_real = params.mass * params.omega_c * delta_x * delta_y / two_pi_hbar
    k_real = params.charge * params.field_E * delta_t * delta_y / two_pi_hbar
    ok = abs(l_real - round(l_real)) <= tol and abs(k_real - round(k_real)) <= tol
    return l_real, k_real, ok


def uy_phase_closed_form(params: PhysicalParams, delta_x: float, delta_y: float, delta_t: float) -> complex:
    """exp(-i m w dx dy / hbar) exp(i q E dt dy / hbar)."""
    hbar = params.hbar
    return complex(np.exp(-1j * params.mass * params.omega_c * delta_x * delta_y / hbar)
                   * np.exp(1j * params.charge * params.field_E * delta_t * delta_y / hbar))


def vanishing_time_bound(params: PhysicalParams, delta_x_rel: float) -> float:
    """(m w/(q E)) Dx: the time scale Dt must stay well below for rho_L to vanish."""
    qE = params.charge * params.field_E
    if qE == 0:
        return math.inf
    return params.mass * params.omega_c / qE * delta_x_rel


def longitudinal_resistivity(params: PhysicalParams, delta_x_rel, delta_t_rel, psi_sq):
    """rho_L = (E/(q w)) (Dx - v_d Dt)^(-1) / |psi|^2; the pole at Dx = v_d Dt is reported, never clamped."""
    v_d = derive(params).drift_velocity
    gap = np.asarray(delta_x_rel, dtype=float) - v_d * np.asarray(delta_t_rel, dtype=float)
    if np.any(gap == 0):
        raise SingularityError("Dx = v_d Dt is a pole of the longitudinal resistivity")
    psi_sq = np.asarray(psi_sq, dtype=float)
    if np.any(psi_sq <= 0):
        raise SingularityError("|psi|^2 must be positive")
    out = params.field_E / (params.charge * params.omega_c) / gap / psi_sq
    return out if np.ndim(out) else float(out)


@dataclass
class ResistivityReport:
    l_target: float
    delta_x: float
    delta_y: float
    delta_t: float
    rho_hall_expect: float
    rho_hall_quadrature: float
    quantum_ratio: float
    quadrature_ratio: float
    l_real: float
    k_real: float
    l: int | None
    k: int | None
    is_invariant: bool
    phase: complex
    phase_defect: float
    invariance_defect: float
    rho_long: list = field(default_factory=list)
    vanishing_flag: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["phase"] = [self.phase.real, self.phase.imag]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def commensurate_cell(params: PhysicalParams, grid: GridSpec, l: float) -> tuple[float, float]:
    """A near-square cell with dx dy = 2 pi hbar l / (m w) and dy a whole number of y steps.

    On the flux torus, dy a multiple of h_y makes the phase factor of U_y
    a grid Fourier mode, so the translation is exact.
    """
    side = math.sqrt(2.0 * math.pi * abs(l) / params.inv_length_sq)
    steps = max(1, round(side / grid.h_y))
    delta_y = steps * grid.h_y
    delta_x = 2.0 * math.pi * params.hbar * l / (params.mass * params.omega_c * delta_y)
    return delta_x, delta_y


def ground_invariance(params: PhysicalParams, delta_x: float, delta_y: float, delta_t: float,
                      n: int = 256, t: float = 0.0) -> tuple[complex, float, float]:
    """Apply U_y to the sampled ground state; returns (phase, phase defect, ||U_y psi - psi|| / ||psi||)."""
    state = AnalyticState(Family.GROUND, 0, offset_x=delta_x, offset_t=delta_t)
    grid = GridSpec.torus(params, n, center=(state.center(params, t), 0.0))
    psi = sample(state, params, grid, t)
    moved = shift_y_array(psi.amplitudes, grid, params, delta_y, t)
    phase, defect = extract_global_phase(psi.amplitudes, moved, grid)
    inv = window_norm(moved - psi.amplitudes, grid) / window_norm(psi.amplitudes, grid)
    return phase, defect, inv


def quantization_report(params: PhysicalParams, l: float, k: float = 1, n: int = 256,
                        delta_y: float | None = None, rho_long_samples: int = 16,
                        quad_nodes: int = 64) -> ResistivityReport:
    """Build dx, dy (and dt) meeting the invariance conditions for ``l`` and ``k`` and measure everything."""
    probe = GridSpec.torus(params, n)
    if delta_y is None:
        delta_x, delta_y = commensurate_cell(params, probe, l)
    else:
        delta_x = 2.0 * math.pi * params.hbar * l / (params.mass * params.omega_c * delta_y)
    qE = params.charge * params.field_E
    delta_t = 2.0 * math.pi * params.hbar * k / (qE * delta_y) if qE != 0 else 0.0
    l_real, k_real, ok = invariance_conditions(params, delta_x, delta_y, delta_t)
    phase, defect, inv = ground_invariance(params, delta_x, delta_y, delta_t, n)
    rho = hall_resistivity_expectation(params, delta_x, delta_y)
    center = AnalyticState(Family.GROUND, 0, offset_x=delta_x, offset_t=delta_t).center(params, 0.0)

    def density(x, y):
        return np.abs(eval_ground(params, delta_x, delta_t, x, y, 0.0)) ** 2

    rho_q = hall_resistivity_quadrature(params, delta_x, delta_y, density,
                                        (center - delta_x / 2, 0.0), quad_nodes)
    klitzing = params.klitzing
    # rho_L along the envelope, Dx = one magnetic length, Dt up to 0.9 of the bound
    rho_long = []
    flag = False
    if qE != 0:
        dx_rel = params.magnetic_length
        bound = vanishing_time_bound(params, dx_rel)
        dts = np.linspace(0.0, 0.9 * bound, rho_long_samples)
        dens0 = float(np.abs(eval_ground(params, 0.0, 0.0, dx_rel, 0.0, 0.0)) ** 2)
        rho_long = [float(v) for v in longitudinal_resistivity(params, dx_rel, dts, dens0)]
        flag = bool(np.all(np.isfinite(rho_long)) and np.all(np.diff(np.abs(rho_long)) > 0))
    ratio = rho / klitzing
    return ResistivityReport(
        l_target=float(l), delta_x=delta_x, delta_y=delta_y, delta_t=delta_t,
        rho_hall_expect=rho, rho_hall_quadrature=rho_q,
        quantum_ratio=ratio, quadrature_ratio=rho_q / klitzing,
        l_real=l_real, k_real=k_real,
        l=int(round(l_real)) if ok else None, k=int(round(k_real)) if ok else None,
        is_invariant=ok, phase=phase, phase_defect=defect, invariance_defect=inv,
        rho_long=rho_long, vanishing_flag=flag,
    )


def quantization_scan(params: PhysicalParams, l_range, k: float = 1, sink: Callable | None = None,
                      n: int = 256, workers: int = 1) -> list[ResistivityReport]:
    """One ResistivityReport per ``l``, in input order; each is also handed to ``sink`` if given.

    The values of ``l`` are independent, so ``workers > 1`` evaluates them on a thread pool.
    """
    l_values = list(l_range)
    if not l_values:
        raise ParameterError("l_range must be nonempty")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda l: quantization_report(params, l, k, n), l_values))
    else:
        reports = [quantization_report(params, l, k, n) for l in l_values]
    if sink is not None:
        for rep in reports:
            sink(rep)
    return reports
