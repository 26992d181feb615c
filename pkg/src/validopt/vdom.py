"""Validity domains: keep the optimizer near the sampled data.

Six kinds are supported.  box clips each coordinate to the data range; ch
constrains x to the convex hull of the inputs; ch_plus constrains the
extended tuple (x, selected model outputs, objective expression) to the
hull of the corresponding data tuples; ch_eps and ch_plus_eps enlarge the
respective hull by a p-norm ball; isofor requires a minimum isolation-tree
path depth in every tree of a forest fitted to the inputs.

Hulls are V-represented throughout: convex multipliers over data rows,
never facet enumeration, so dimension and degeneracy need no special
cases.  Ball enlargements act in scaled coordinates (inputs by the data's
min-max ranges, appended outputs and objective by their own ranges) with
radius epsilon * sqrt(n1), the epsilon-fraction of the scaled input-box
diameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .bench import Dataset
from .embed import IsoforBlock, embed_isofor_depth
from .errors import ArgumentError, ConfigError, DataError, DimensionError
from .learn import fit_isolation_forest, path_lengths
from .milp import (EQUAL, GREATER, LESS, MINIMIZE, OPTIMAL, MilpModel,
                   SolverConfig, solve_lp)

KINDS = ("box", "ch", "ch_eps", "isofor", "ch_plus", "ch_plus_eps")
_HULL_KINDS = ("ch", "ch_eps", "ch_plus", "ch_plus_eps")
_PLUS_KINDS = ("ch_plus", "ch_plus_eps")
_EPS_KINDS = ("ch_eps", "ch_plus_eps")


@dataclass(frozen=True)
class ExtendedDataset:
    """Sampled inputs extended with output tuples, objective values and
    feasibility flags; rows align with base.inputs."""

    base: Dataset
    outputs: np.ndarray
    objective: np.ndarray
    feasible: np.ndarray

    @property
    def n_outputs(self) -> int:
        return self.outputs.shape[1]

    @property
    def n_feasible(self) -> int:
        return int(np.sum(self.feasible))

    def rows(self, data_subset: str) -> np.ndarray:
        if data_subset == "all":
            return np.arange(self.base.n_samples)
        if data_subset == "feasible":
            return np.flatnonzero(self.feasible)
        raise ArgumentError(f"unknown data subset '{data_subset}'")


def build_extended_dataset(dataset: Dataset, true_outputs=None,
                           objective_values=None, feasibility_rule=None,
                           filter_on_clean: bool = False) -> ExtendedDataset:
    """Extend a dataset with output tuples, objective values and flags.

    Defaults cover the simplified single-output case: outputs are the
    (noisy) sampled values, the objective coincides with them, and without
    a feasibility rule every point is flagged feasible.  The rule receives
    (inputs, outputs) and normally sees the noisy outputs, matching how a
    practitioner would have to filter; filter_on_clean switches it to the
    noiseless values for oracle checks.
    """
    n = dataset.n_samples
    if true_outputs is None:
        outputs = np.asarray(dataset.values, dtype=float)[:, None]
    else:
        outputs = np.atleast_2d(np.asarray(true_outputs, dtype=float))
        if outputs.shape[0] == 1 and n != 1:
            outputs = outputs.T
    if objective_values is None:
        objective = np.asarray(dataset.values, dtype=float).copy()
    else:
        objective = np.asarray(objective_values, dtype=float).ravel()
    if outputs.shape[0] != n or objective.size != n:
        raise DimensionError(
            f"extension arrays must align with the {n} sampled points")
    if feasibility_rule is None:
        feasible = np.ones(n, dtype=bool)
    else:
        seen = outputs
        if filter_on_clean and true_outputs is None:
            seen = np.asarray(dataset.clean_values, dtype=float)[:, None]
        feasible = np.asarray(feasibility_rule(dataset.inputs, seen),
                              dtype=bool).ravel()
        if feasible.size != n:
            raise DimensionError("feasibility rule returned wrong length")
    return ExtendedDataset(dataset, outputs, objective, feasible)


@dataclass(frozen=True)
class ValidityDomainSpec:
    """What to attach; fields irrelevant to the kind are ignored.

    data_subset None resolves to the kind's natural rows: plain input
    domains use every sample, extended hulls use the feasible ones.
    epsilon is a fraction of the scaled input-box diameter; norm selects
    the enlargement ball (1, 2 or inf).  output_subset None appends every
    output coordinate, an explicit tuple selects some (possibly none).
    """

    kind: str
    epsilon: float = 0.0
    norm: float = 2
    output_subset: tuple | None = None
    data_subset: str | None = None
    append_objective: bool = False
    isofor_depth: int | None = None
    isofor_max_depth: int = 5
    isofor_trees: int = 100
    isofor_subsample: int = 256

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown domain kind '{self.kind}'")
        if self.epsilon < 0:
            raise ArgumentError("epsilon must be >= 0")
        if self.norm not in (1, 2, math.inf):
            raise ArgumentError("norm must be 1, 2 or inf")

    @property
    def effective_subset(self) -> str:
        if self.data_subset is not None:
            return self.data_subset
        return "feasible" if self.kind in _PLUS_KINDS else "all"

    def output_indices(self, n_outputs: int) -> tuple:
        if self.output_subset is None:
            return tuple(range(n_outputs))
        bad = [j for j in self.output_subset if not 0 <= j < n_outputs]
        if bad:
            raise ArgumentError(f"output subset indices {bad} out of range")
        return tuple(self.output_subset)


@dataclass
class DomainBlock:
    """Handles into the rows and variables a domain added."""

    kind: str
    rows: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    hull_point_vars: list = field(default_factory=list)
    slack_vars: list = field(default_factory=list)
    ball_radius: float | None = None
    isofor_block: IsoforBlock | None = None
    isofor_forest: object | None = None
    isofor_threshold: int | None = None
    data_rows: np.ndarray | None = None


def _coordinate_blocks(spec, ext, x_vars, y_vars, objective_expr):
    """Per-coordinate (data column, tie expression) of the hull space.

    A tie expression is a {var: coef} map whose value the hull coordinate
    must equal: single x/y variables, or the caller's objective expression.
    """
    J = spec.output_indices(ext.n_outputs) if spec.kind in _PLUS_KINDS else ()
    coords = [(ext.base.inputs[:, j], {int(x_vars[j]): 1.0}, f"x{j}")
              for j in range(ext.base.dim)]
    if spec.kind in _PLUS_KINDS:
        if J and (y_vars is None or max(J) >= len(y_vars)):
            raise ConfigError(
                "extended hull with output coordinates needs y variables")
        for j in J:
            coords.append((ext.outputs[:, j], {int(y_vars[j]): 1.0},
                           f"y{j}"))
        if spec.append_objective:
            if not objective_expr:
                raise ConfigError(
                    "append_objective needs a linear objective expression")
            expr = {int(v): float(c) for v, c in dict(objective_expr).items()}
            coords.append((ext.objective, expr, "obj"))
    return coords


def attach_domain(spec: ValidityDomainSpec, ext: ExtendedDataset,
                  milp: MilpModel, x_vars, y_vars=None, objective_expr=None,
                  prefix: str = "d") -> DomainBlock:
    """Append the domain's rows to milp and return the handles.

    x_vars (and, for extended hulls, y_vars / objective_expr) are existing
    model variables; hull multipliers, hull points and ball slacks are
    created here.
    """
    if len(x_vars) != ext.base.dim:
        raise DimensionError(
            f"domain expects {ext.base.dim} x variables, got {len(x_vars)}")
    block = DomainBlock(kind=spec.kind)
    rows_idx = ext.rows(spec.effective_subset)
    if rows_idx.size == 0:
        raise DataError(f"domain '{spec.kind}' has no data rows to build on")
    block.data_rows = rows_idx

    if spec.kind == "box":
        X = ext.base.inputs[rows_idx]
        lo, hi = X.min(axis=0), X.max(axis=0)
        for j, xv in enumerate(int(v) for v in x_vars):
            block.rows.append(milp.add_constr({xv: 1.0}, GREATER, lo[j],
                                              name=f"{prefix}lo{j}"))
            block.rows.append(milp.add_constr({xv: 1.0}, LESS, hi[j],
                                              name=f"{prefix}hi{j}"))
        return block

    if spec.kind == "isofor":
        forest = fit_isolation_forest(
            ext.base.inputs[rows_idx], n_trees=spec.isofor_trees,
            max_depth=spec.isofor_max_depth,
            subsample=min(spec.isofor_subsample, rows_idx.size),
            seed=ext.base.seed)
        depth = spec.isofor_depth
        depth = forest.max_depth if depth is None else depth
        block.isofor_block = embed_isofor_depth(forest, x_vars, depth, milp,
                                                prefix=prefix + "iso")
        block.isofor_forest = forest
        block.isofor_threshold = depth
        block.rows = block.isofor_block.rows
        return block

    coords = _coordinate_blocks(spec, ext, x_vars, y_vars, objective_expr)
    lam = milp.add_vars(rows_idx.size, lb=0.0, ub=1.0, name=f"{prefix}lam")
    block.lambdas = lam
    block.rows.append(milp.add_constr({v: 1.0 for v in lam}, EQUAL, 1.0,
                                      name=f"{prefix}simplex"))

    if spec.kind in ("ch", "ch_plus"):
        for col, expr, tag in coords:
            row = {lam[i]: -float(col[r]) for i, r in enumerate(rows_idx)}
            for v, c in expr.items():
                row[v] = row.get(v, 0.0) + c
            block.rows.append(milp.add_constr(row, EQUAL, 0.0,
                                              name=f"{prefix}{tag}"))
        return block

    # enlarged hulls: coordinate = hull point + scale * slack
    radius = spec.epsilon * math.sqrt(ext.base.dim)
    block.ball_radius = radius
    ball_vars = []
    for col, expr, tag in coords:
        sub = col[rows_idx]
        lo, hi = float(sub.min()), float(sub.max())
        width = hi - lo if hi > lo else 1.0
        u = milp.add_var(lo, hi, name=f"{prefix}u_{tag}")
        block.hull_point_vars.append(u)
        row = {lam[i]: -float(sub[i]) for i in range(rows_idx.size)}
        row[u] = row.get(u, 0.0) + 1.0
        block.rows.append(milp.add_constr(row, EQUAL, 0.0,
                                          name=f"{prefix}hull_{tag}"))
        v = milp.add_var(-radius, radius, name=f"{prefix}v_{tag}")
        block.slack_vars.append(v)
        ball_vars.append(v)
        row = dict(expr)
        row[u] = row.get(u, 0.0) - 1.0
        row[v] = row.get(v, 0.0) - width
        block.rows.append(milp.add_constr(row, EQUAL, 0.0,
                                          name=f"{prefix}tie_{tag}"))
    if spec.norm == 1:
        budget = {}
        for v in ball_vars:
            p = milp.add_var(0.0, radius, name=f"{milp.variables[v].name}p")
            q = milp.add_var(0.0, radius, name=f"{milp.variables[v].name}q")
            block.rows.append(milp.add_constr({v: 1.0, p: -1.0, q: 1.0},
                                              EQUAL, 0.0))
            budget[p] = 1.0
            budget[q] = 1.0
        block.rows.append(milp.add_constr(budget, LESS, radius,
                                          name=f"{prefix}l1ball"))
    elif spec.norm == 2 and radius > 0:
        milp.add_ball_cut_group(ball_vars, radius)
    # norm inf needs the slack bounds only
    return block


@dataclass(frozen=True)
class MembershipReport:
    inside: bool
    residual: float


def _hull_linf_residual(data: np.ndarray, point: np.ndarray) -> float:
    """Min over convex multipliers of the L-inf mismatch to point."""
    m = MilpModel("member")
    lam = m.add_vars(data.shape[0], lb=0.0, ub=1.0, name="lam")
    t = m.add_var(0.0, name="t")
    m.add_constr({v: 1.0 for v in lam}, EQUAL, 1.0)
    for c in range(data.shape[1]):
        row = {lam[i]: float(data[i, c]) for i in range(data.shape[0])}
        row[t] = -1.0
        m.add_constr(row, LESS, float(point[c]))
        row = {lam[i]: float(data[i, c]) for i in range(data.shape[0])}
        row[t] = 1.0
        m.add_constr(row, GREATER, float(point[c]))
    m.set_objective({t: 1.0}, MINIMIZE)
    sol = solve_lp(m, SolverConfig())
    if sol.status != OPTIMAL:
        raise DataError("hull membership LP did not solve")
    return max(sol.objective, 0.0)


def _hull_l1_residual(data: np.ndarray, point: np.ndarray) -> float:
    """Min over convex multipliers of the L1 mismatch to point."""
    m = MilpModel("member1")
    n, d = data.shape
    lam = m.add_vars(n, lb=0.0, ub=1.0, name="lam")
    m.add_constr({v: 1.0 for v in lam}, EQUAL, 1.0)
    obj = {}
    for c in range(d):
        p = m.add_var(0.0, name=f"p{c}")
        q = m.add_var(0.0, name=f"q{c}")
        row = {lam[i]: float(data[i, c]) for i in range(n)}
        row[p] = 1.0
        row[q] = -1.0
        m.add_constr(row, EQUAL, float(point[c]))
        obj[p] = 1.0
        obj[q] = 1.0
    m.set_objective(obj, MINIMIZE)
    sol = solve_lp(m, SolverConfig())
    if sol.status != OPTIMAL:
        raise DataError("hull membership LP did not solve")
    return max(sol.objective, 0.0)


def _hull_l2_residual(data: np.ndarray, point: np.ndarray):
    """Euclidean distance to the hull via a weighted nonnegative fit.

    The convexity row is enforced softly; the weight must stay well below
    1/sqrt(eps) or its square swamps the geometric rows and boundary
    points come back with garbage distances.  The multipliers are
    renormalized to sum exactly to one, so the result is an upper bound on
    the true distance, accurate to ~1e-8 on unit-scaled data.  Returns the
    distance and the gap vector pointing from the projection to the point.
    """
    weight = 1e4
    A = np.vstack([data.T, weight * np.ones(data.shape[0])])
    b = np.concatenate([point, [weight]])
    lam, _ = nnls(A, b)
    total = lam.sum()
    if total > 0:
        lam = lam / total
    gap = point - data.T @ lam
    return float(np.linalg.norm(gap)), gap


def _scaled_hull_coords(spec, ext, rows_idx):
    """Data matrix and scaling of the coordinates a hull spans."""
    cols, widths, los = [], [], []
    blocks = [ext.base.inputs[:, j] for j in range(ext.base.dim)]
    if spec.kind in _PLUS_KINDS:
        for j in spec.output_indices(ext.n_outputs):
            blocks.append(ext.outputs[:, j])
        if spec.append_objective:
            blocks.append(ext.objective)
    for col in blocks:
        sub = col[rows_idx]
        lo, hi = float(sub.min()), float(sub.max())
        width = hi - lo if hi > lo else 1.0
        cols.append((sub - lo) / width)
        widths.append(width)
        los.append(lo)
    return np.column_stack(cols), np.array(los), np.array(widths)


def membership_oracle(spec: ValidityDomainSpec, ext: ExtendedDataset):
    """Build a reusable membership tester for one domain.

    Returns test(point, predicted_tuple=None, tol=1e-6) -> MembershipReport.
    Everything expensive (the isolation forest, the scaled hull matrix) is
    prepared once, so the tester is cheap enough for grid sweeps.  For
    Euclidean hull distances the tester also caches one separating plane
    per rejection; points ruled out by a cached plane report a certified
    lower bound on their residual instead of the exact distance.
    """
    rows_idx = ext.rows(spec.effective_subset)
    if rows_idx.size == 0:
        raise DataError(f"domain '{spec.kind}' has no data rows to test against")

    def check_point(point):
        point = np.asarray(point, dtype=float).ravel()
        if point.size != ext.base.dim:
            raise DimensionError(
                f"point has dimension {point.size}, data has {ext.base.dim}")
        return point

    if spec.kind == "box":
        X = ext.base.inputs[rows_idx]
        lo, hi = X.min(axis=0), X.max(axis=0)

        def test(point, predicted_tuple=None, tol=1e-6):
            point = check_point(point)
            residual = max(float(np.max(np.maximum(lo - point, point - hi))), 0.0)
            return MembershipReport(residual <= tol, residual)

        return test

    if spec.kind == "isofor":
        forest = fit_isolation_forest(
            ext.base.inputs[rows_idx], n_trees=spec.isofor_trees,
            max_depth=spec.isofor_max_depth,
            subsample=min(spec.isofor_subsample, rows_idx.size),
            seed=ext.base.seed)
        depth = spec.isofor_depth
        depth = forest.max_depth if depth is None else depth

        def test(point, predicted_tuple=None, tol=1e-6):
            point = check_point(point)
            shallow = float(np.min(path_lengths(forest, point)))
            residual = max(depth - shallow, 0.0)
            return MembershipReport(residual <= tol, residual)

        return test

    # hull kinds: distances are measured in the scaled coordinates of
    # construction, so plain hulls behave like zero-radius enlargements
    data, los, widths = _scaled_hull_coords(spec, ext, rows_idx)
    radius = 0.0
    if spec.kind in ("ch_eps", "ch_plus_eps"):
        radius = spec.epsilon * math.sqrt(ext.base.dim)
    n_appended = 0
    if spec.kind in _PLUS_KINDS:
        n_appended = len(spec.output_indices(ext.n_outputs))
        n_appended += 1 if spec.append_objective else 0

    # separating planes harvested from rejections: any unit direction u
    # gives the exact support bound max_i u.data_i, so u.x beyond it
    # certifies x outside without another distance solve; grid sweeps then
    # pay for nnls only when the cache cannot rule a candidate out
    plane_dirs: list[np.ndarray] = []
    plane_sups: list[float] = []

    def test(point, predicted_tuple=None, tol=1e-6):
        point = check_point(point)
        extra = 0 if predicted_tuple is None else np.size(predicted_tuple)
        if extra != n_appended:
            raise DimensionError(
                f"membership of '{spec.kind}' needs {n_appended} appended "
                f"values, got {extra}")
        full_point = point
        if n_appended:
            full_point = np.concatenate([point, np.ravel(predicted_tuple)])
        scaled_point = (full_point - los) / widths
        if radius > 0 and spec.norm == math.inf:
            dist = _hull_linf_residual(data, scaled_point)
        elif radius > 0 and spec.norm == 1:
            dist = _hull_l1_residual(data, scaled_point)
        else:
            if plane_dirs:
                margins = np.array(plane_dirs) @ scaled_point \
                    - np.array(plane_sups)
                certified = float(margins.max()) - radius
                if certified > tol:
                    # a distance lower bound, enough to reject
                    return MembershipReport(False, certified)
            dist, gap = _hull_l2_residual(data, scaled_point)
            if dist - radius > tol and dist > 0:
                u = gap / dist
                plane_dirs.append(u)
                plane_sups.append(float((data @ u).max()))
        residual = max(dist - radius, 0.0)
        return MembershipReport(residual <= tol, residual)

    return test


def membership_test(spec: ValidityDomainSpec, ext: ExtendedDataset, point,
                    predicted_tuple=None, tol: float = 1e-6) -> MembershipReport:
    """Does the point belong to the attached domain's feasible set.

    point carries the x coordinates; for extended hulls predicted_tuple
    appends the model outputs for the selected subset followed by the
    objective value, in attachment order.  The residual is the minimal
    infeasibility: 0 inside, positive outside; for hull kinds it is a
    distance in the scaled coordinates of construction.
    """
    return membership_oracle(spec, ext)(point, predicted_tuple, tol)
