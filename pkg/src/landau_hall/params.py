"""Physical parameters and derived constants.

Everything is kept in CGS-style symbolic form so that natural units
(``m = q = c = hbar = 1``) and real units go through the same formulas.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DegenerateFieldError, ParameterError


@dataclass(frozen=True)
class PhysicalParams:
    """Charged particle in a uniform magnetic field B along z and electric field E along y.

    The vector potential is the Landau gauge ``A = B(-y, 0, 0)`` and the
    scalar potential energy is ``V = -q E y``.
    """

    mass: float = 1.0
    charge: float = 1.0
    light_speed: float = 1.0
    hbar: float = 1.0
    field_B: float = 1.0
    field_E: float = 0.0

    def __post_init__(self):
        for name in ("mass", "charge", "light_speed", "hbar", "field_B", "field_E"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.mass <= 0:
            raise ParameterError("mass must be positive")
        if self.hbar <= 0:
            raise ParameterError("hbar must be positive")
        if self.light_speed <= 0:
            raise ParameterError("light_speed must be positive")
        if self.charge == 0:
            raise ParameterError("charge must be nonzero")
        if self.field_B == 0:
            raise DegenerateFieldError("B = 0: cyclotron frequency undefined")

    @property
    def omega_c(self) -> float:
        """Signed cyclotron frequency q B / (m c)."""
        return self.charge * self.field_B / (self.mass * self.light_speed)

    @property
    def inv_length_sq(self) -> float:
        """m |omega_c| / hbar, the squared oscillator scale."""
        return self.mass * abs(self.omega_c) / self.hbar

    @property
    def scale(self) -> float:
        """Oscillator scale sqrt(m |omega_c| / hbar) (inverse length)."""
        return math.sqrt(self.inv_length_sq)

    @property
    def magnetic_length(self) -> float:
        return 1.0 / self.scale

    @property
    def period(self) -> float:
        """Cyclotron period 2 pi / |omega_c|."""
        return 2.0 * math.pi / abs(self.omega_c)

    @property
    def klitzing(self) -> float:
        """Resistance quantum h / q^2 with h = 2 pi hbar."""
        return 2.0 * math.pi * self.hbar / self.charge**2

    def replace(self, **changes) -> "PhysicalParams":
        data = asdict(self)
        data.update(changes)
        return PhysicalParams(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def require_positive_omega(self) -> None:
        """Closed-form states need m omega_c / hbar > 0 for a normalizable envelope."""
        if self.omega_c <= 0:
            raise ParameterError(
                "analytic Landau states need q*B > 0 (omega_c > 0); "
                f"got omega_c = {self.omega_c}"
            )


@dataclass(frozen=True)
class DriftConstants:
    drift_velocity: float
    displacement_y: float
    ft_shift: float


def derive(params: PhysicalParams) -> DriftConstants:
    """E x B drift velocity, static envelope offset and the Fourier shift constant.

    ``v_d = qE/(m w)``, ``y_0 = qE/(m w^2)`` and ``a = y_0 sqrt(m|w|/hbar)``.
    """
    w = params.omega_c
    if w == 0:
        raise DegenerateFieldError("B = 0: cyclotron frequency undefined")
    qE = params.charge * params.field_E
    v_d = qE / (params.mass * w)
    y_0 = qE / (params.mass * w * w)
    return DriftConstants(drift_velocity=v_d, displacement_y=y_0, ft_shift=y_0 * params.scale)
