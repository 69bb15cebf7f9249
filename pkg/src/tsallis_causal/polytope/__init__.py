"""Exact rational polyhedral tools: LP, implication, redundancy removal, Fourier-Motzkin."""
from .fm import ProjectionReport, StepReport, fm_eliminate, project, remove_redundant
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LpResult, is_implied, lp_maximize, lp_minimize
from .system import EQ, GE, RationalSystem, Row

__all__ = [
    "EQ", "GE", "RationalSystem", "Row",
    "LpResult", "OPTIMAL", "UNBOUNDED", "INFEASIBLE",
    "lp_minimize", "lp_maximize", "is_implied",
    "remove_redundant", "fm_eliminate", "project", "ProjectionReport", "StepReport",
]
