"""Multifractal analysis of the doubling map with potential log|cos pi(x + c)|."""

from .dyadic import (
    LOG2,
    NEG_INFINITY,
    BinaryFixed,
    Potential,
    as_point,
    birkhoff_sum,
    doubling_iterate,
    potential_eval,
    sigma_direct,
    sigma_modulus,
    torus_distance,
)
from .errors import DomainError, ParseError
from .orbits import (
    PeriodicOrbit,
    enumerate_orbits,
    extremes_scan,
    gelfond_exponent,
    max_defect_bound,
    orbit_average,
    sturmian_arc_check,
)

__all__ = [
    "LOG2", "NEG_INFINITY", "BinaryFixed", "Potential", "as_point", "birkhoff_sum",
    "doubling_iterate", "potential_eval", "sigma_direct", "sigma_modulus", "torus_distance",
    "DomainError", "ParseError", "PeriodicOrbit", "enumerate_orbits", "extremes_scan",
    "gelfond_exponent", "max_defect_bound", "orbit_average", "sturmian_arc_check",
]
