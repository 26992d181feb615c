"""Built-in LP/MILP engine: model container, simplex, branch & bound."""

from .branch_bound import solve_lp, solve_milp, solve_with_ball_cuts
from .model import (
    EQUAL,
    GREATER,
    INFEASIBLE,
    LESS,
    LIMIT,
    MAXIMIZE,
    MINIMIZE,
    OPTIMAL,
    UNBOUNDED,
    MilpModel,
    PointReport,
    Solution,
    SolverConfig,
    check_point,
)

__all__ = [
    "EQUAL",
    "GREATER",
    "INFEASIBLE",
    "LESS",
    "LIMIT",
    "MAXIMIZE",
    "MINIMIZE",
    "OPTIMAL",
    "UNBOUNDED",
    "MilpModel",
    "PointReport",
    "Solution",
    "SolverConfig",
    "check_point",
    "solve_lp",
    "solve_milp",
    "solve_with_ball_cuts",
]
