"""Closed-form wavefunction families in crossed E and B fields (Landau gauge).

Five families are available:

``PSI_X``
    plane wave along x, oscillator envelope along y (Landau's solution),
    labelled by the x-momentum eigenvalue ``-m w dy``.
``PSIBAR_Y``
    plane wave along y, oscillator envelope along x drifting at ``v_d``,
    labelled by the eigenvalue ``m w dx`` of the time-dependent momentum
    ``p_y + m w x - q E t``.
``ZETA_X`` / ``ZETABAR_Y``
    the offset-free members of the two families.
``GROUND``
    ``zetabar_0`` translated by ``dx`` in space and ``dt`` in time.

All evaluators broadcast over ``x``, ``y`` and ``t``; ``t`` may be complex.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .params import PhysicalParams, derive
from .special import N_MAX, hermite_function

_PHASE_REDUCE = 1.0e6


class Family(str, enum.Enum):
    PSI_X = "psi"
    PSIBAR_Y = "psibar"
    ZETA_X = "zeta"
    ZETABAR_Y = "zetabar"
    GROUND = "ground"


def _cis(phase):
    """exp(i*phase) with the real part of large arguments reduced mod 2 pi first."""
    phase = np.asarray(phase)
    if np.iscomplexobj(phase):
        re = phase.real
        if np.any(np.abs(re) > _PHASE_REDUCE):
            re = np.mod(re, 2.0 * math.pi)
        return np.exp(1j * re - phase.imag)
    if np.any(np.abs(phase) > _PHASE_REDUCE):
        phase = np.mod(phase, 2.0 * math.pi)
    return np.exp(1j * phase)


def energy_psi(params: PhysicalParams, n: int, delta_y: float = 0.0) -> float:
    """hbar w (n + 1/2) - q^2 E^2 / (2 m w^2) - q E dy."""
    return energy_psibar(params, n) - params.charge * params.field_E * delta_y


def energy_psibar(params: PhysicalParams, n: int) -> float:
    """hbar w (n + 1/2) - q^2 E^2 / (2 m w^2); shared by zeta, zetabar and the ground state."""
    if n < 0:
        raise ParameterError("level n must be non-negative")
    w = params.omega_c
    qE = params.charge * params.field_E
    return params.hbar * w * (n + 0.5) - qE * qE / (2.0 * params.mass * w * w)


def eval_psi(params: PhysicalParams, n: int, delta_y: float, x, y, t):
    params.require_positive_omega()
    s2 = params.inv_length_sq
    y0 = derive(params).displacement_y
    energy = energy_psi(params, n, delta_y)
    phase = -energy * np.asarray(t) / params.hbar - s2 * np.asarray(x) * delta_y
    envelope = hermite_function(n, params.scale * (np.asarray(y) - delta_y - y0), s2, N_MAX)
    return _cis(phase) * envelope


def eval_psibar(params: PhysicalParams, n: int, delta_x: float, x, y, t):
    params.require_positive_omega()
    s2 = params.inv_length_sq
    hbar = params.hbar
    qE = params.charge * params.field_E
    v_d = derive(params).drift_velocity
    x = np.asarray(x)
    y = np.asarray(y)
    t = np.asarray(t)
    u = x - delta_x - v_d * t
    phase = (
        -energy_psibar(params, n) * t / hbar
        - s2 * (x - delta_x) * y
        + qE / hbar * t * y
        + qE / (hbar * params.omega_c) * u
    )
    return _cis(phase) * hermite_function(n, params.scale * u, s2, N_MAX)


def eval_zeta(params: PhysicalParams, n: int, x, y, t):
    params.require_positive_omega()
    y0 = derive(params).displacement_y
    phase = -energy_psibar(params, n) * np.asarray(t) / params.hbar
    envelope = hermite_function(n, params.scale * (np.asarray(y) - y0), params.inv_length_sq, N_MAX)
    # x enters nowhere; broadcast so the result has the full grid shape
    return _cis(phase) * envelope * np.ones_like(np.asarray(x), dtype=float)


def eval_zetabar(params: PhysicalParams, n: int, x, y, t):
    return eval_psibar(params, n, 0.0, x, y, t)


def eval_ground(params: PhysicalParams, delta_x: float, delta_t: float, x, y, t):
    return eval_zetabar(params, 0, np.asarray(x) - delta_x, y, np.asarray(t) - delta_t)


@dataclass(frozen=True)
class AnalyticState:
    """One closed-form family together with the offsets it uses."""

    family: Family
    n: int = 0
    offset_x: float = 0.0
    offset_y: float = 0.0
    offset_t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 0 or int(self.n) != self.n:
            raise ParameterError("level n must be a non-negative integer")
        fam = self.family
        if fam is Family.GROUND and self.n != 0:
            raise ParameterError("the ground-state family has n = 0")
        used = {
            Family.PSI_X: {"offset_y"},
            Family.PSIBAR_Y: {"offset_x"},
            Family.ZETA_X: set(),
            Family.ZETABAR_Y: set(),
            Family.GROUND: {"offset_x", "offset_t"},
        }[fam]
        for name in ("offset_x", "offset_y", "offset_t"):
            if name not in used and getattr(self, name) != 0.0:
                raise ParameterError(f"family {fam.value!r} does not use {name}")

    def __call__(self, params: PhysicalParams, x, y, t):
        fam = self.family
        if fam is Family.PSI_X:
            return eval_psi(params, self.n, self.offset_y, x, y, t)
        if fam is Family.PSIBAR_Y:
            return eval_psibar(params, self.n, self.offset_x, x, y, t)
        if fam is Family.ZETA_X:
            return eval_zeta(params, self.n, x, y, t)
        if fam is Family.ZETABAR_Y:
            return eval_zetabar(params, self.n, x, y, t)
        return eval_ground(params, self.offset_x, self.offset_t, x, y, t)

    evaluate = __call__

    def energy(self, params: PhysicalParams) -> float:
        if self.family is Family.PSI_X:
            return energy_psi(params, self.n, self.offset_y)
        return energy_psibar(params, self.n)

    @property
    def envelope_axis(self) -> str:
        """Axis along which the state is Gaussian-confined."""
        return "y" if self.family in (Family.PSI_X, Family.ZETA_X) else "x"

    def center(self, params: PhysicalParams, t: float = 0.0) -> float:
        """Envelope center along :attr:`envelope_axis` at time ``t``."""
        d = derive(params)
        fam = self.family
        if fam is Family.PSI_X:
            return self.offset_y + d.displacement_y
        if fam is Family.ZETA_X:
            return d.displacement_y
        if fam is Family.PSIBAR_Y:
            return self.offset_x + d.drift_velocity * t
        if fam is Family.ZETABAR_Y:
            return d.drift_velocity * t
        return self.offset_x + d.drift_velocity * (t - self.offset_t)

    def time_shift(self, delta_t: float) -> "AnalyticState":
        """Family evaluated at ``t - delta_t``; only the ground state carries a time offset."""
        if self.family in (Family.ZETABAR_Y, Family.GROUND):
            fam = Family.GROUND
            return replace(self, family=fam, offset_t=self.offset_t + delta_t)
        raise ParameterError(
            f"family {self.family.value!r} has no time-offset slot; use operators.time_shift"
        )


def fourier_pair_check(params: PhysicalParams, n: int, half_width: float = 14.0, points: int = 4096) -> float:
    """Relative L2 residual of the displaced-oscillator Fourier pair.

    Transforms ``D(xi) = exp(i a xi) phi_n(xi)`` with the kernel
    ``exp(+i k xi) / sqrt(2 pi)`` and compares with ``i^n phi_n(k + a)``.
    The factor ``i^n`` is the Hermite-function eigenvalue of this kernel;
    it is a constant and drops out of the eigenvalue problem.
    """
    if n > 12:
        raise ParameterError("Fourier pair check is limited to n <= 12")
    a = derive(params).ft_shift
    h = 2.0 * half_width / points
    xi = -half_width + h * np.arange(points)
    d = np.exp(1j * a * xi) * hermite_function(n, xi)
    k = 2.0 * math.pi * np.fft.fftfreq(points, d=h)
    # sum_j exp(+i k_m xi_j) d_j = exp(i k_m xi_0) * N * ifft(d)[m]
    transform = h / math.sqrt(2.0 * math.pi) * np.exp(1j * k * xi[0]) * points * np.fft.ifft(d)
    target = (1j) ** n * hermite_function(n, k + a)
    return float(np.linalg.norm(transform - target) / np.linalg.norm(target))
