"""Charged particle in crossed uniform electric and magnetic fields (Landau gauge).

Analytic Landau-gauge solutions, their grid checks against a
time-dependent Schroedinger solver, and the Hall resistivity
quantization that follows from magnetic-translation invariance.
"""

from .errors import (
    BoundaryError,
    DegenerateFieldError,
    HermiteRangeError,
    IllConditionedError,
    LandauError,
    NoPhaseError,
    ParameterError,
    ResolutionError,
    ShiftError,
    SingularityError,
)
from .params import DriftConstants, PhysicalParams, derive
from .special import hermite_function, hermite_functions, hermite_poly
from .states import AnalyticState, Family, energy_psi, energy_psibar, fourier_pair_check
from .grid import GridSpec, SampledState, read_state, write_state

__version__ = "0.1.0"

__all__ = [
    "AnalyticState", "BoundaryError", "DegenerateFieldError", "DriftConstants", "Family", "GridSpec",
    "HermiteRangeError", "IllConditionedError", "LandauError", "NoPhaseError", "ParameterError",
    "PhysicalParams", "ResolutionError", "SampledState", "ShiftError", "SingularityError", "derive",
    "energy_psi", "energy_psibar", "fourier_pair_check", "hermite_function", "hermite_functions",
    "hermite_poly", "read_state", "write_state",
]
