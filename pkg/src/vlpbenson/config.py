"""Numerical tolerances shared by all modules."""
from dataclasses import dataclass

GEOM_TOL = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle.

    ``geom`` is the geometric tolerance used for rank tests, facet incidence
    and zero tests.  ``lp_feas``/``lp_opt``/``lp_pivot`` are handed to the
    simplex engine.  ``accept`` is the slack added to the ``z > eps`` style
    tests of the outer approximation loops; floating point LP values are never
    exactly zero.
    """

    geom: float = GEOM_TOL
    lp_feas: float = 1e-9
    lp_opt: float = 1e-9
    lp_pivot: float = 1e-10
    accept: float = 1e-8
    eta_zero: float = 1e-7


DEFAULT_TOLERANCES = Tolerances()
