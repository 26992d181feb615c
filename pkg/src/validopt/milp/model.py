"""Mixed-integer linear model container and feasibility checking.

Variables are addressed by the integer index returned from add_var.
Constraints store sparse coefficient maps.  Norm-2 ball restrictions
(used by ball-enlarged hull domains) cannot be written as finitely many
linear rows, so they are registered as cut groups and enforced by
solve_with_ball_cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, DimensionError

LESS = "<="
GREATER = ">="
EQUAL = "="
SENSES = (LESS, GREATER, EQUAL)

MINIMIZE = "min"
MAXIMIZE = "max"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"


@dataclass
class Variable:
    name: str
    lb: float
    ub: float
    binary: bool


@dataclass
class Constraint:
    name: str
    coeffs: dict[int, float]
    sense: str
    rhs: float


@dataclass
class BallCutGroup:
    """Indices whose value vector must satisfy ||v||_2 <= radius."""

    indices: tuple[int, ...]
    radius: float


@dataclass
class Solution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    bound: float | None = None
    n_pivots: int = 0
    n_nodes: int = 0
    n_cuts: int = 0

    @property
    def gap(self) -> float | None:
        if self.objective is None or self.bound is None:
            return None
        return abs(self.objective - self.bound) / max(1.0, abs(self.objective))


@dataclass
class SolverConfig:
    """Engine tolerances and limits.

    feas_tol: constraint/bound feasibility tolerance.
    int_tol: distance from an integer at which a binary counts as integral.
    rel_gap: relative optimality gap at which branch & bound stops.
    dj_tol: reduced-cost tolerance for simplex pricing.
    pivot_tol: smallest pivot element magnitude accepted.
    bland_threshold: pivots per simplex phase before Bland's rule engages.
    max_pivots: hard pivot cap per simplex call (exceeding raises).
    max_nodes: branch & bound node cap (exceeding returns status 'limit').
    ball_tol / ball_max_rounds: norm-2 cut loop termination controls.
    """

    feas_tol: float = 1e-7
    int_tol: float = 1e-6
    rel_gap: float = 1e-6
    dj_tol: float = 1e-9
    pivot_tol: float = 1e-9
    bland_threshold: int = 2000
    max_pivots: int = 200_000
    max_nodes: int = 200_000
    ball_tol: float = 1e-7
    ball_max_rounds: int = 100


class MilpModel:
    """A linear objective, linear rows, bounded (possibly binary) variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.objective_sense = MINIMIZE
        self.objective_constant = 0.0
        self.ball_groups: list[BallCutGroup] = []

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constrs(self) -> int:
        return len(self.constraints)

    @property
    def binary_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.binary]

    def add_var(
        self,
        lb: float = -math.inf,
        ub: float = math.inf,
        binary: bool = False,
        name: str = "",
    ) -> int:
        if math.isnan(lb) or math.isnan(ub):
            raise ArgumentError("variable bounds must not be NaN")
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ArgumentError(f"variable lower bound {lb} exceeds upper bound {ub}")
        idx = len(self.variables)
        self.variables.append(Variable(name or f"x{idx}", float(lb), float(ub), binary))
        return idx

    def add_vars(self, count: int, lb=-math.inf, ub=math.inf, binary=False, name="") -> list[int]:
        base = name or "x"
        return [
            self.add_var(lb, ub, binary, f"{base}{k}" if count > 1 or not name else name)
            for k in range(count)
        ]

    def _clean_coeffs(self, coeffs) -> dict[int, float]:
        if not isinstance(coeffs, dict):
            coeffs = dict(coeffs)
        out: dict[int, float] = {}
        for idx, val in coeffs.items():
            idx = int(idx)
            if not 0 <= idx < self.n_vars:
                raise DimensionError(f"coefficient references unknown variable {idx}")
            val = float(val)
            if not math.isfinite(val):
                raise ArgumentError(f"non-finite coefficient on variable {idx}")
            if val != 0.0:
                out[idx] = out.get(idx, 0.0) + val
        return out

    def add_constr(self, coeffs, sense: str, rhs: float, name: str = "") -> int:
        if sense not in SENSES:
            raise ArgumentError(f"unknown sense {sense!r}; use one of {SENSES}")
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise ArgumentError("constraint right-hand side must be finite")
        row = Constraint(name or f"c{len(self.constraints)}", self._clean_coeffs(coeffs), sense, rhs)
        self.constraints.append(row)
        return len(self.constraints) - 1

    def set_objective(self, coeffs, sense: str = MINIMIZE, constant: float = 0.0) -> None:
        if sense not in (MINIMIZE, MAXIMIZE):
            raise ArgumentError(f"objective sense must be '{MINIMIZE}' or '{MAXIMIZE}'")
        self.objective = self._clean_coeffs(coeffs)
        self.objective_sense = sense
        self.objective_constant = float(constant)

    def add_ball_cut_group(self, indices, radius: float) -> None:
        indices = tuple(int(i) for i in indices)
        for i in indices:
            if not 0 <= i < self.n_vars:
                raise DimensionError(f"ball group references unknown variable {i}")
        if radius < 0 or not math.isfinite(radius):
            raise ArgumentError(f"ball radius must be finite and >= 0, got {radius}")
        self.ball_groups.append(BallCutGroup(indices, float(radius)))

    def clone(self) -> "MilpModel":
        other = MilpModel(self.name)
        other.variables = [Variable(v.name, v.lb, v.ub, v.binary) for v in self.variables]
        other.constraints = [
            Constraint(r.name, dict(r.coeffs), r.sense, r.rhs) for r in self.constraints
        ]
        other.objective = dict(self.objective)
        other.objective_sense = self.objective_sense
        other.objective_constant = self.objective_constant
        other.ball_groups = [BallCutGroup(g.indices, g.radius) for g in self.ball_groups]
        return other

    def objective_value(self, x: np.ndarray) -> float:
        return self.objective_constant + sum(
            coef * x[idx] for idx, coef in self.objective.items()
        )

    def to_lp_string(self) -> str:
        """Dump in a CPLEX-LP-like plain-text form for inspection."""

        def term(coef, name, first):
            sign = "-" if coef < 0 else ("" if first else "+")
            return f"{sign} {abs(coef):.12g} {name}".strip()

        def expr(coeffs):
            if not coeffs:
                return "0"
            parts = []
            for idx in sorted(coeffs):
                parts.append(term(coeffs[idx], self.variables[idx].name, not parts))
            return " ".join(parts)

        lines = [f"\\ {self.name}"]
        lines.append("Minimize" if self.objective_sense == MINIMIZE else "Maximize")
        lines.append(f" obj: {expr(self.objective)}")
        lines.append("Subject To")
        for row in self.constraints:
            lines.append(f" {row.name}: {expr(row.coeffs)} {row.sense} {row.rhs:.12g}")
        lines.append("Bounds")
        for v in self.variables:
            lo = "-inf" if v.lb == -math.inf else f"{v.lb:.12g}"
            hi = "+inf" if v.ub == math.inf else f"{v.ub:.12g}"
            lines.append(f" {lo} <= {v.name} <= {hi}")
        binaries = [v.name for v in self.variables if v.binary]
        if binaries:
            lines.append("Binaries")
            lines.append(" " + " ".join(binaries))
        for g in self.ball_groups:
            names = " ".join(self.variables[i].name for i in g.indices)
            lines.append(f"\\ ball: ||({names})||_2 <= {g.radius:.12g}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class PointReport:
    """Feasibility audit of a concrete point against a model."""

    bound_violation: float
    constraint_violation: float
    integrality_violation: float
    feasible: bool

    @property
    def max_violation(self) -> float:
        return max(self.bound_violation, self.constraint_violation, self.integrality_violation)


def check_point(model: MilpModel, x: np.ndarray, tol: float = 1e-7) -> PointReport:
    """Measure how far a point is from satisfying the model (0 = feasible)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_vars,):
        raise DimensionError(f"expected {model.n_vars} values, got shape {x.shape}")
    bviol = 0.0
    iviol = 0.0
    for i, v in enumerate(model.variables):
        bviol = max(bviol, v.lb - x[i], x[i] - v.ub)
        if v.binary:
            iviol = max(iviol, abs(x[i] - round(x[i])))
    cviol = 0.0
    for row in model.constraints:
        act = sum(coef * x[idx] for idx, coef in row.coeffs.items())
        if row.sense == LESS:
            cviol = max(cviol, act - row.rhs)
        elif row.sense == GREATER:
            cviol = max(cviol, row.rhs - act)
        else:
            cviol = max(cviol, abs(act - row.rhs))
    bviol = max(bviol, 0.0)
    feasible = bviol <= tol and cviol <= tol and iviol <= tol
    return PointReport(bviol, cviol, iviol, feasible)
