"""Benson-type outer approximation for vector linear programs."""
from .errors import (
    ContainsLine, DualInfeasible, EmptySet, NumericalFailure, PrimalInfeasible,
    UpperImageContainsLines, VlpError,
)
from .lp import LpResult, LpSolver, LpStatus, StandardLp, solve_lp
from .polyhedral import GeneratorRep, HalfspaceRep, h_to_v, v_to_h
from .scalarizations import MolpProblem, make_problem
from .twophase import SolveOptions, SolveStatus, solve

__all__ = [
    "ContainsLine", "DualInfeasible", "EmptySet", "NumericalFailure", "PrimalInfeasible",
    "UpperImageContainsLines", "VlpError",
    "LpResult", "LpSolver", "LpStatus", "StandardLp", "solve_lp",
    "GeneratorRep", "HalfspaceRep", "h_to_v", "v_to_h",
    "MolpProblem", "make_problem",
    "SolveOptions", "SolveStatus", "solve",
]
