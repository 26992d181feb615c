"""LP solve, best-bound branch & bound, and norm-2 ball cut loops.

solve_lp relaxes binaries to their bound interval.  solve_milp runs a
best-first branch & bound that branches on the most fractional binary
(ties broken by lowest variable index) and prunes against the incumbent
at the configured relative gap.  solve_with_ball_cuts enforces the
model's registered ||v||_2 <= r groups by repeatedly resolving with
supporting-hyperplane rows added at violating points.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..errors import ArgumentError, SolverError
from .model import (
    EQUAL,
    GREATER,
    INFEASIBLE,
    LESS,
    LIMIT,
    MAXIMIZE,
    OPTIMAL,
    UNBOUNDED,
    MilpModel,
    Solution,
    SolverConfig,
)
from .simplex import SimplexResult, solve_bounded_lp


class _StandardForm:
    """Equality standard form of a model: structural columns then slacks."""

    def __init__(self, model: MilpModel):
        if model.n_vars == 0:
            raise ArgumentError("model has no variables")
        n0 = model.n_vars
        ineq = [i for i, r in enumerate(model.constraints) if r.sense != EQUAL]
        n = n0 + len(ineq)
        m = model.n_constrs
        A = np.zeros((m, n))
        b = np.empty(m)
        lb = np.full(n, -np.inf)
        ub = np.full(n, np.inf)
        slack_of_row = np.full(m, -1, dtype=int)
        for j, v in enumerate(model.variables):
            lb[j], ub[j] = v.lb, v.ub
        s = n0
        for i, row in enumerate(model.constraints):
            for idx, coef in row.coeffs.items():
                A[i, idx] = coef
            b[i] = row.rhs
            if row.sense == LESS:
                A[i, s], lb[s], ub[s] = 1.0, 0.0, np.inf
                slack_of_row[i] = s
                s += 1
            elif row.sense == GREATER:
                A[i, s], lb[s], ub[s] = 1.0, -np.inf, 0.0
                slack_of_row[i] = s
                s += 1
        sign = -1.0 if model.objective_sense == MAXIMIZE else 1.0
        c = np.zeros(n)
        for idx, coef in model.objective.items():
            c[idx] = sign * coef
        self.n_structural = n0
        self.A, self.b, self.c = A, b, c
        self.lb, self.ub = lb, ub
        self.slack_of_row = slack_of_row
        self.obj_sign = sign
        self.obj_const = model.objective_constant

    def solve(self, cfg: SolverConfig, lb=None, ub=None) -> SimplexResult:
        return solve_bounded_lp(
            self.A,
            self.b,
            self.c,
            self.lb if lb is None else lb,
            self.ub if ub is None else ub,
            cfg,
            self.slack_of_row,
        )

    def to_solution(self, res: SimplexResult, **extra) -> Solution:
        if res.status != OPTIMAL:
            return Solution(res.status, n_pivots=res.n_pivots, **extra)
        obj = self.obj_sign * res.objective + self.obj_const
        return Solution(
            OPTIMAL,
            x=res.x[: self.n_structural].copy(),
            objective=obj,
            bound=obj,
            n_pivots=res.n_pivots,
            **extra,
        )


def solve_lp(model: MilpModel, cfg: SolverConfig | None = None) -> Solution:
    """Solve the model with binaries relaxed to their bound interval."""
    cfg = cfg or SolverConfig()
    sf = _StandardForm(model)
    return sf.to_solution(sf.solve(cfg))


def _branch_var(x: np.ndarray, bin_idx: np.ndarray, int_tol: float) -> int:
    """Most fractional binary, ties broken by lowest index; -1 if integral."""
    if bin_idx.size == 0:
        return -1
    frac = np.abs(x[bin_idx] - np.round(x[bin_idx]))
    k = int(np.argmax(frac))  # argmax returns the first (lowest-index) maximum
    if frac[k] <= int_tol:
        return -1
    return int(bin_idx[k])


def solve_milp(model: MilpModel, cfg: SolverConfig | None = None) -> Solution:
    """Best-bound branch & bound over the model's binary variables."""
    if model.ball_groups:
        raise ArgumentError(
            "model registers norm-2 ball groups; use solve_with_ball_cuts"
        )
    return _solve_milp_rows(model, cfg or SolverConfig())


def _solve_milp_rows(model: MilpModel, cfg: SolverConfig) -> Solution:
    sf = _StandardForm(model)
    bin_idx = np.array(model.binary_indices, dtype=int)
    total_pivots = 0

    root = sf.solve(cfg)
    total_pivots += root.n_pivots
    if root.status != OPTIMAL:
        return Solution(root.status, n_pivots=total_pivots)
    if _branch_var(root.x, bin_idx, cfg.int_tol) < 0:
        return sf.to_solution(root)

    # heap entries: (relaxation bound in minimize-space, seq, fixings tuple)
    seq = 0
    heap = [(root.objective, seq, ())]
    inc_x = None
    inc_obj = math.inf  # minimize-space incumbent
    best_bound = root.objective
    nodes = 0
    status = OPTIMAL

    def gap_ok(bound):
        return inc_obj - bound <= cfg.rel_gap * max(1.0, abs(inc_obj))

    while heap:
        bound, _, fixings = heapq.heappop(heap)
        best_bound = bound
        if inc_x is not None and gap_ok(bound):
            break
        if nodes >= cfg.max_nodes:
            status = LIMIT
            break
        nodes += 1
        lb = sf.lb.copy()
        ub = sf.ub.copy()
        for var, val in fixings:
            lb[var] = ub[var] = val
        res = sf.solve(cfg, lb, ub)
        total_pivots += res.n_pivots
        if res.status == INFEASIBLE:
            continue
        if res.status == UNBOUNDED:
            return Solution(UNBOUNDED, n_pivots=total_pivots, n_nodes=nodes)
        if inc_x is not None and gap_ok(res.objective):
            continue
        var = _branch_var(res.x, bin_idx, cfg.int_tol)
        if var < 0:
            if res.objective < inc_obj:
                inc_obj = res.objective
                inc_x = res.x[: sf.n_structural].copy()
            continue
        for val in (0.0, 1.0):
            seq += 1
            heapq.heappush(heap, (res.objective, seq, fixings + ((var, val),)))

    if not heap:
        best_bound = inc_obj
    if inc_x is None:
        return Solution(
            INFEASIBLE if status == OPTIMAL else status,
            n_pivots=total_pivots,
            n_nodes=nodes,
        )
    return Solution(
        status,
        x=inc_x,
        objective=sf.obj_sign * inc_obj + sf.obj_const,
        bound=sf.obj_sign * best_bound + sf.obj_const,
        n_pivots=total_pivots,
        n_nodes=nodes,
    )


def solve_with_ball_cuts(model: MilpModel, cfg: SolverConfig | None = None) -> Solution:
    """Solve honoring registered ||v||_2 <= r groups via supporting cuts.

    Each round solves the current relaxation; every group whose value
    vector leaves its ball contributes the tangent row (v/||v||) . x <= r
    at the violating point v, and the model is resolved from scratch.
    """
    cfg = cfg or SolverConfig()
    work = model.clone()
    groups = list(work.ball_groups)
    work.ball_groups = []
    has_binaries = bool(work.binary_indices)
    n_cuts = 0
    for _ in range(max(1, cfg.ball_max_rounds)):
        sol = _solve_milp_rows(work, cfg) if has_binaries else solve_lp(work, cfg)
        sol.n_cuts = n_cuts
        if sol.status != OPTIMAL:
            return sol
        new_cuts = 0
        for g in groups:
            v = sol.x[list(g.indices)]
            nrm = float(np.linalg.norm(v))
            if nrm > g.radius * (1.0 + cfg.ball_tol) + cfg.ball_tol:
                unit = v / nrm
                work.add_constr(
                    dict(zip(g.indices, unit)), LESS, g.radius, name=f"ball{n_cuts}"
                )
                new_cuts += 1
        if new_cuts == 0:
            return sol
        n_cuts += new_cuts
    raise SolverError(
        f"ball cut loop did not converge within {cfg.ball_max_rounds} rounds"
    )
