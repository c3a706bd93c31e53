"""Grid realizations of the Hamiltonian, the conserved momenta, the energy
operator, the three symmetry unitaries and the generator-of-solutions
machinery.

Derivatives are spectral on periodic axes and 4th-order finite
differences (one-sided 5-point stencils at the edges) on non-periodic
axes.  On a periodic x axis the wavenumber alias of every Fourier mode
is picked row by row so that the kinetic momentum ``p_x + m w y`` lies in
the first zone ``[-pi hbar/h_x, pi hbar/h_x)``.  For states with bounded
kinetic momentum this makes ``p_x`` exact even on rows where the
canonical momentum itself lies beyond the Nyquist limit, which is the
situation for every y-delocalized Landau-gauge state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

from .errors import IllConditionedError, NoPhaseError, ParameterError, ResolutionError, ShiftError
from .grid import GridSpec, SampledState, inner, window_norm
from .params import PhysicalParams
from .states import AnalyticState, Family

TimeField = Callable[[complex], np.ndarray]
Source = Union[AnalyticState, TimeField]

RESOLUTION_BAND = 0.8
RESOLUTION_TOL = 1e-10
MAX_GENERATOR_ORDER = 6
CONDITION_LIMIT = 1e12


# -- derivatives ----------------------------------------------------------------

_C = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_E0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_E1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def fd_derivative(a: np.ndarray, h: float, axis: int) -> np.ndarray:
    """d/ds along ``axis`` with 4th-order stencils; exact for quartics everywhere."""
    a = np.moveaxis(np.asarray(a), axis, 0)
    n = a.shape[0]
    out = np.empty_like(a, dtype=np.result_type(a, float))
    out[2:n - 2] = (_C[0] * a[0:n - 4] + _C[1] * a[1:n - 3] + _C[3] * a[3:n - 1] + _C[4] * a[4:n])
    out[0] = np.tensordot(_E0, a[0:5], axes=1)
    out[1] = np.tensordot(_E1, a[0:5], axes=1)
    out[n - 1] = -np.tensordot(_E0, a[n - 1:n - 6:-1], axes=1)
    out[n - 2] = -np.tensordot(_E1, a[n - 1:n - 6:-1], axes=1)
    return np.moveaxis(out / h, 0, axis)


def _kinetic_x_symbol(grid: GridSpec, params: PhysicalParams | None) -> np.ndarray:
    """hbar k + m w y on the (k_x, y) mesh, folded into the first zone."""
    hbar = params.hbar if params is not None else 1.0
    pk = hbar * grid.kx()[:, None]
    if params is None:
        return np.broadcast_to(pk, grid.shape)
    shift = params.mass * params.omega_c * grid.y[None, :]
    period = 2.0 * math.pi * hbar / grid.h_x
    return np.mod(pk + shift + period / 2, period) - period / 2


def _px_symbol(grid: GridSpec, params: PhysicalParams | None) -> np.ndarray:
    if params is None:
        return _kinetic_x_symbol(grid, None)
    return _kinetic_x_symbol(grid, params) - params.mass * params.omega_c * grid.y[None, :]


def _spectral_x(a: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return sfft.ifft(symbol * sfft.fft(a, axis=0), axis=0)


def _spectral_y(a: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return sfft.ifft(symbol * sfft.fft(a, axis=1), axis=1)


def momentum_x(a: np.ndarray, grid: GridSpec, params: PhysicalParams | None) -> np.ndarray:
    """Canonical p_x = -i hbar d/dx. ``params=None`` uses the plain FFT alias (no field)."""
    hbar = params.hbar if params is not None else 1.0
    if grid.periodic_x:
        return _spectral_x(a, _px_symbol(grid, params))
    return -1j * hbar * fd_derivative(a, grid.h_x, 0)


def momentum_y(a: np.ndarray, grid: GridSpec, hbar: float = 1.0, ky_offset: float = 0.0) -> np.ndarray:
    """Physical p_y of the wavefunction ``a * exp(i ky_offset y)``, expressed in the stored gauge."""
    if grid.periodic_y:
        out = _spectral_y(a, hbar * grid.ky()[None, :])
    else:
        out = -1j * hbar * fd_derivative(a, grid.h_y, 1)
    if ky_offset:
        out = out + hbar * ky_offset * a
    return out


def kinetic_x(a: np.ndarray, grid: GridSpec, params: PhysicalParams) -> np.ndarray:
    """(p_x + m w y) a."""
    if grid.periodic_x:
        return _spectral_x(a, _kinetic_x_symbol(grid, params))
    return momentum_x(a, grid, params) + params.mass * params.omega_c * grid.y[None, :] * a


def check_resolution(a: np.ndarray, grid: GridSpec, params: PhysicalParams | None = None) -> None:
    """Raise ResolutionError if a periodic axis holds spectral power near its Nyquist limit."""
    total = float(np.sum(np.abs(a) ** 2))
    if total == 0.0:
        return
    if grid.periodic_x:
        sym = _kinetic_x_symbol(grid, params)
        limit = RESOLUTION_BAND * math.pi * (params.hbar if params else 1.0) / grid.h_x
        power = np.abs(sfft.fft(a, axis=0)) ** 2
        frac = float(np.sum(power[np.abs(sym) > limit])) / (total * grid.n_x)
        if frac > RESOLUTION_TOL:
            raise ResolutionError(f"x axis under-resolved: {frac:.2e} of the power near Nyquist")
    if grid.periodic_y:
        ky = np.abs(grid.ky())
        power = np.abs(sfft.fft(a, axis=1)) ** 2
        frac = float(np.sum(power[:, ky > RESOLUTION_BAND * math.pi / grid.h_y])) / (total * grid.n_y)
        if frac > RESOLUTION_TOL:
            raise ResolutionError(f"y axis under-resolved: {frac:.2e} of the power near Nyquist")


# -- sampling -----------------------------------------------------------------------


def sample(state: AnalyticState, params: PhysicalParams, grid: GridSpec, t: float,
           ky_offset: float = 0.0, ensure: bool = True) -> SampledState:
    """Evaluate an analytic family on ``grid`` at time ``t``.

    With ``ensure`` the grid is checked to hold the envelope center +- 8
    magnetic lengths and expanded (with a ContainmentWarning) if not.
    """
    if ensure:
        grid = grid.ensure_containment(state.envelope_axis, state.center(params, t), params.magnetic_length)
    X, Y = grid.mesh()
    values = state(params, X, Y, t)
    if ky_offset:
        values = values * np.exp(-1j * ky_offset * grid.y)[None, :]
    return SampledState(grid, float(np.real(t)), values, params, ky_offset,
                        {"family": state.family.value, "n": state.n})


def as_time_field(source: Source, params: PhysicalParams, grid: GridSpec) -> TimeField:
    if isinstance(source, AnalyticState):
        X, Y = grid.mesh()
        return lambda t: source(params, X, Y, t) * np.ones(grid.shape)
    return source


# -- the Schroedinger-side operators ------------------------------------------------


def apply_hamiltonian(state: SampledState, params: PhysicalParams, check: bool = True) -> SampledState:
    """(1/2m)((p_x + m w y)^2 + p_y^2) psi - q E y psi."""
    return state.with_amplitudes(hamiltonian_array(state.amplitudes, state.grid, params,
                                                   state.ky_offset, check))


def hamiltonian_array(a: np.ndarray, grid: GridSpec, params: PhysicalParams,
                      ky_offset: float = 0.0, check: bool = True) -> np.ndarray:
    if check:
        check_resolution(a, grid, params)
    m = params.mass
    if grid.periodic_x:
        kx_part = _spectral_x(a, _kinetic_x_symbol(grid, params) ** 2)
    else:
        kx_part = kinetic_x(kinetic_x(a, grid, params), grid, params)
    py = momentum_y(momentum_y(a, grid, params.hbar, ky_offset), grid, params.hbar, ky_offset)
    potential = -params.charge * params.field_E * grid.y[None, :] * a
    return (kx_part + py) / (2.0 * m) + potential


def apply_pi_x(state: SampledState, params: PhysicalParams) -> SampledState:
    """pi'_x = p_x."""
    return state.with_amplitudes(momentum_x(state.amplitudes, state.grid, params))


def pi_y_array(a: np.ndarray, grid: GridSpec, params: PhysicalParams, t, ky_offset: float = 0.0) -> np.ndarray:
    """pi'_y = p_y + m w x - q E t at time ``t`` (``t`` may be complex)."""
    shift = params.mass * params.omega_c * grid.x[:, None] - params.charge * params.field_E * t
    return momentum_y(a, grid, params.hbar, ky_offset) + shift * a


def apply_pi_y(state: SampledState, params: PhysicalParams) -> SampledState:
    return state.with_amplitudes(pi_y_array(state.amplitudes, state.grid, params, state.t, state.ky_offset))


def apply_energy_op(field: TimeField, t: float, params: PhysicalParams,
                    dt_fd: float | None = None, stencil: int = 2) -> np.ndarray:
    """i hbar d/dt of a time-parametrized field by central differences.

    ``stencil=2`` is ``(f(t+dt) - f(t-dt)) / (2 dt)``; ``stencil=4`` adds
    the +-2 dt points for 4th-order accuracy. Default ``dt_fd`` is 1e-4 of
    the cyclotron period.
    """
    dt = 1e-4 * params.period if dt_fd is None else dt_fd
    if dt <= 0:
        raise ParameterError("dt_fd must be positive")
    if stencil == 2:
        deriv = (field(t + dt) - field(t - dt)) / (2.0 * dt)
    elif stencil == 4:
        deriv = (8.0 * (field(t + dt) - field(t - dt)) - (field(t + 2 * dt) - field(t - 2 * dt))) / (12.0 * dt)
    else:
        raise ParameterError("stencil must be 2 or 4")
    return 1j * params.hbar * deriv


def schrodinger_residual(source: Source, grid: GridSpec, params: PhysicalParams, t: float,
                         dt_fd: float | None = None, stencil: int = 4) -> float:
    """||H psi - E psi|| / ||psi|| with H on the grid and E from the time trajectory."""
    field = as_time_field(source, params, grid)
    psi = field(t)
    h_psi = hamiltonian_array(psi, grid, params)
    e_psi = apply_energy_op(field, t, params, dt_fd, stencil)
    norm = window_norm(psi, grid)
    if norm == 0.0:
        raise ParameterError("residual of a zero state is undefined")
    return window_norm(h_psi - e_psi, grid) / norm


def expectation(a: np.ndarray, op_a: np.ndarray, grid: GridSpec) -> float:
    """Re <a|op a> / <a|a>."""
    return float(np.real(inner(a, op_a, grid)) / np.real(inner(a, a, grid)))


# -- symmetry unitaries ---------------------------------------------------------------


def _integer_steps(amount: float, h: float) -> int:
    steps = amount / h
    m = round(steps)
    if abs(steps - m) > 1e-9 * max(1.0, abs(steps)):
        raise ShiftError(f"shift {amount} is not a multiple of the grid step {h} on a non-periodic axis")
    return int(m)


def _roll_zero(a: np.ndarray, m: int, axis: int) -> np.ndarray:
    out = np.roll(a, m, axis=axis)
    idx = [slice(None)] * a.ndim
    if m > 0:
        idx[axis] = slice(0, m)
    elif m < 0:
        idx[axis] = slice(m, None)
    else:
        return out
    out[tuple(idx)] = 0.0
    return out


def shift_x_array(a: np.ndarray, grid: GridSpec, params: PhysicalParams | None, amount: float) -> np.ndarray:
    """exp(-i amount p_x / hbar) a, i.e. a(x - amount)."""
    if amount == 0.0:
        return a.copy()
    if grid.periodic_x:
        hbar = params.hbar if params is not None else 1.0
        return _spectral_x(a, np.exp(-1j * amount * _px_symbol(grid, params) / hbar))
    return _roll_zero(a, _integer_steps(amount, grid.h_x), 0)


def translate_y_array(a: np.ndarray, grid: GridSpec, amount: float) -> np.ndarray:
    """a(y - amount) in the stored gauge."""
    if amount == 0.0:
        return a.copy()
    if grid.periodic_y:
        return _spectral_y(a, np.exp(-1j * amount * grid.ky())[None, :])
    return _roll_zero(a, _integer_steps(amount, grid.h_y), 1)


def shift_y_array(a: np.ndarray, grid: GridSpec, params: PhysicalParams, amount: float, t,
                  ky_offset: float = 0.0) -> np.ndarray:
    """exp(-i amount pi'_y / hbar) a.

    The summands ``p_y`` and ``m w x - q E t`` commute, so the exponential
    factorizes exactly into a translation and a multiplicative phase.
    """
    if amount == 0.0:
        return a.copy()
    moved = translate_y_array(a, grid, amount)
    lin = params.mass * params.omega_c * grid.x[:, None] - params.charge * params.field_E * t
    phase = np.exp(-1j * amount * (lin / params.hbar + ky_offset))
    return phase * moved


def unitary_shift(state: SampledState, axis: str, amount: float, params: PhysicalParams) -> SampledState:
    """Apply U_x = exp(-i dx pi'_x/hbar) or U_y = exp(-i dy pi'_y/hbar) to a sampled state."""
    if axis == "x":
        return state.with_amplitudes(shift_x_array(state.amplitudes, state.grid, params, amount))
    if axis == "y":
        return state.with_amplitudes(
            shift_y_array(state.amplitudes, state.grid, params, amount, state.t, state.ky_offset))
    raise ParameterError(f"axis must be 'x' or 'y', got {axis!r}")


def time_shift(source: Source, delta_t: float):
    """U_t = exp(i dt E / hbar): the trajectory re-evaluated at ``t - delta_t``."""
    if isinstance(source, AnalyticState) and source.family in (Family.ZETABAR_Y, Family.GROUND) \
            and source.n == 0:
        return source.time_shift(delta_t)
    if isinstance(source, AnalyticState):
        return lambda params, x, y, t: source(params, x, y, t - delta_t)
    return lambda t: source(t - delta_t)


def extract_global_phase(a: SampledState | np.ndarray, b: SampledState | np.ndarray,
                         grid: GridSpec | None = None) -> tuple[complex, float]:
    """Best unimodular c with b ~ c a, and the defect ||b - c a|| / ||a||."""
    if isinstance(a, SampledState):
        grid = a.grid
        a = a.amplitudes
    if isinstance(b, SampledState):
        b = b.amplitudes
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise NoPhaseError("phase of a zero state is undefined")
    overlap = np.vdot(a, b)
    if abs(overlap) < 1e-12 * na * nb:
        raise NoPhaseError("states are orthogonal; no global phase relates them")
    phase = overlap / abs(overlap)
    defect = float(np.linalg.norm(b - phase * a) / na)
    return complex(phase), defect


# -- operator descriptors -----------------------------------------------------------


class OperatorKind(str, enum.Enum):
    HAMILTONIAN = "hamiltonian"
    PI_X = "pi_x"
    PI_Y = "pi_y"
    ENERGY = "energy"
    SHIFT_X = "shift_x"
    SHIFT_Y = "shift_y"
    TIME_SHIFT = "time_shift"
    MULTIPLY = "multiply"
    DERIVATIVE = "derivative"


@dataclass(frozen=True)
class GridOperator:
    """Immutable description of a linear map on sampled states.

    ``amount`` is the shift for SHIFT_X/SHIFT_Y/TIME_SHIFT, ``axis`` picks
    the DERIVATIVE direction and ``factor`` is the MULTIPLY array.  The
    energy operator and the time shift act on trajectories rather than on
    a snapshot; for them :meth:`apply` takes a source (analytic state or
    callable of t) and a grid.
    """

    kind: OperatorKind
    params: PhysicalParams
    amount: float = 0.0
    axis: str = "x"
    factor: np.ndarray | None = None

    @property
    def time_dependent(self) -> bool:
        return self.kind in (OperatorKind.HAMILTONIAN, OperatorKind.PI_Y, OperatorKind.SHIFT_Y)

    def apply(self, target, grid: GridSpec | None = None, t: float | None = None):
        k = self.kind
        p = self.params
        if k is OperatorKind.ENERGY:
            return apply_energy_op(as_time_field(target, p, grid), t, p)
        if k is OperatorKind.TIME_SHIFT:
            return time_shift(target, self.amount)
        state: SampledState = target
        if k is OperatorKind.HAMILTONIAN:
            return apply_hamiltonian(state, p)
        if k is OperatorKind.PI_X:
            return apply_pi_x(state, p)
        if k is OperatorKind.PI_Y:
            return apply_pi_y(state, p)
        if k is OperatorKind.SHIFT_X:
            return unitary_shift(state, "x", self.amount, p)
        if k is OperatorKind.SHIFT_Y:
            return unitary_shift(state, "y", self.amount, p)
        if k is OperatorKind.MULTIPLY:
            return state.with_amplitudes(self.factor * state.amplitudes)
        if self.axis == "x":
            return state.with_amplitudes(1j / p.hbar * momentum_x(state.amplitudes, state.grid, p))
        return state.with_amplitudes(1j / p.hbar * momentum_y(state.amplitudes, state.grid, p.hbar))


# -- generators of solutions ----------------------------------------------------------


def contour_nodes(t: float, radius: float, points: int) -> np.ndarray:
    return t + radius * np.exp(2j * math.pi * np.arange(points) / points)


def contour_weights(order: int, radius: float, points: int) -> np.ndarray:
    """Weights w_k with f^(order)(t) ~ sum_k w_k f(t + r e^{2 pi i k/M}) (trapezoid Cauchy formula)."""
    k = np.arange(points)
    return math.factorial(order) / (points * radius**order) * np.exp(-2j * math.pi * order * k / points)


def time_derivative(field: TimeField, t: float, order: int, radius: float, points: int = 48) -> np.ndarray:
    """order-th time derivative of an analytic trajectory, sampled on a circle in complex time."""
    if order == 0:
        return field(t)
    w = contour_weights(order, radius, points)
    total = None
    for wk, tk in zip(w, contour_nodes(t, radius, points)):
        term = wk * field(tk)
        total = term if total is None else total + term
    return total


def _generator_operator(family: Family):
    return "pi_y" if family in (Family.PSI_X, Family.ZETA_X) else "pi_x"


def _default_radius(params: PhysicalParams) -> float:
    return 0.25 / abs(params.omega_c)


def _generator_powers(state: AnalyticState, j_max: int, grid: GridSpec, params: PhysicalParams, tau):
    X, Y = grid.mesh()
    a = state(params, X, Y, tau) * np.ones(grid.shape)
    out = [a]
    which = _generator_operator(state.family)
    for _ in range(j_max):
        if which == "pi_y":
            a = pi_y_array(a, grid, params, tau)
        else:
            a = momentum_x(a, grid, params)
        out.append(a)
    return out


def generator_table(state: AnalyticState, orders, grid: GridSpec, params: PhysicalParams, t: float,
                    radius: float | None = None, points: int = 48) -> dict[tuple[int, int], np.ndarray]:
    """E^{j'} pi^j applied to ``state`` for every ``(j, j')`` in ``orders``, sharing the time samples.

    pi is pi'_y for the y-confined families and pi'_x for the x-confined
    ones; E^{j'} is evaluated as (i hbar)^{j'} d^{j'}/dt^{j'} from samples
    on a small circle around ``t`` in the complex time plane.
    """
    orders = [tuple(o) for o in orders]
    for j, jp in orders:
        if j < 0 or jp < 0 or j + jp > MAX_GENERATOR_ORDER:
            raise ParameterError(f"generator orders need j, j' >= 0 and j + j' <= {MAX_GENERATOR_ORDER}")
    j_max = max(j for j, _ in orders)
    r = _default_radius(params) if radius is None else radius
    hbar = params.hbar
    out: dict[tuple[int, int], np.ndarray] = {}
    static = [o for o in orders if o[1] == 0]
    if static:
        powers = _generator_powers(state, j_max, grid, params, t)
        for j, jp in static:
            out[(j, jp)] = powers[j]
    dynamic = [o for o in orders if o[1] > 0]
    if dynamic:
        weights = {jp: contour_weights(jp, r, points) * (1j * hbar) ** jp for _, jp in dynamic}
        for o in dynamic:
            out[o] = np.zeros(grid.shape, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            for k, tau in enumerate(contour_nodes(t, r, points)):
                powers = _generator_powers(state, j_max, grid, params, tau)
                for j, jp in dynamic:
                    out[(j, jp)] += weights[jp][k] * powers[j]
    base = window_norm(out.get((0, 0), state(params, *grid.mesh(), t) * np.ones(grid.shape)), grid)
    for o, a in out.items():
        if not np.all(np.isfinite(a)):
            raise IllConditionedError(f"generator order {o} overflows on the complex-time contour")
        if base > 0 and window_norm(a, grid) > CONDITION_LIMIT * base:
            raise IllConditionedError(f"generator order {o} amplifies the norm beyond {CONDITION_LIMIT:g}")
    return out


def generator_apply(state: AnalyticState, j: int, j_prime: int, grid: GridSpec, params: PhysicalParams,
                    t: float, radius: float | None = None, points: int = 48) -> SampledState:
    """E^{j'} pi^j state on the grid at time ``t``."""
    table = generator_table(state, [(j, j_prime)], grid, params, t, radius, points)
    return SampledState(grid, t, table[(j, j_prime)], params, 0.0,
                        {"family": state.family.value, "n": state.n, "j": j, "j_prime": j_prime})


def general_solution(coeffs: dict, cbar: dict, grid: GridSpec, params: PhysicalParams, t: float,
                     radius: float | None = None, points: int = 48) -> SampledState:
    """sum c_{n,j,j'} E^{j'} pi_y^j zeta_n + sum cbar_{n,j,j'} E^{j'} pi_x^j zetabar_n on the grid.

    Coefficient dicts map ``(n, j, j')`` to complex numbers; zero entries are skipped.
    """
    total = np.zeros(grid.shape, dtype=complex)
    for family, table in ((Family.ZETA_X, coeffs), (Family.ZETABAR_Y, cbar)):
        by_level: dict[int, list] = {}
        for (n, j, jp), c in (table or {}).items():
            if c != 0:
                by_level.setdefault(int(n), []).append(((int(j), int(jp)), c))
        for n, items in by_level.items():
            values = generator_table(AnalyticState(family, n), [o for o, _ in items], grid, params, t,
                                     radius, points)
            for o, c in items:
                total += c * values[o]
    return SampledState(grid, t, total, params)


def exponential_series_coeffs(delta_x: float, delta_t: float, hbar: float, order: int = 6) -> dict:
    """cbar_{0,j,j'} = (1/j!)(dx/(i hbar))^j (1/j'!)(dt/(-i hbar))^{j'} for j + j' <= order."""
    out = {}
    for j in range(order + 1):
        for jp in range(order + 1 - j):
            out[(0, j, jp)] = ((delta_x / (1j * hbar)) ** j / math.factorial(j)
                               * (delta_t / (-1j * hbar)) ** jp / math.factorial(jp))
    return out
