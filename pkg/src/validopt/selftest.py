"""Fast invariant suite behind `validopt selftest`.

Each check is a trimmed version of a guarantee the test suite verifies at
full scale: the worked 1-D example, the extended-hull vertex and ordering
properties, embedding faithfulness under fixed inputs, isolation-forest
depth soundness, solver agreement with an independent LP solver, and the
Box-normalization of tables.  The suite prints one PASS/FAIL line per
check and is meant to finish in well under a minute.
"""

from __future__ import annotations

import time

import numpy as np
from scipy.optimize import linprog

from .bench import Dataset, sample_dataset
from .embed import embed_regressor
from .learn import predict, train_regressor
from .metrics import aggregate
from .milp import (LESS, MINIMIZE, OPTIMAL, MilpModel, SolverConfig,
                   solve_lp, solve_milp)
from .runner import ExperimentSpec, run_experiment
from .vdom import (ValidityDomainSpec, attach_domain, build_extended_dataset,
                   membership_test)


def _manual_dataset(inputs, values, seed=0):
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    values = np.asarray(values, dtype=float).ravel()
    return Dataset(truth_name="manual", rule="manual",
                   n_samples=inputs.shape[0], sigma=0.0, seed=seed,
                   inputs=inputs, clean_values=values, values=values)


def _check_worked_example():
    X = np.array([[1.00], [1.75], [2.25], [3.00]])
    y = (X.ravel() - 1.75) ** 2
    model = train_regressor("linear", (X, y))
    intercept = predict(model, [0.0])
    slope = (predict(model, [4.0]) - intercept) / 4.0
    assert abs(slope - 0.5) < 1e-9, f"line slope {slope}"
    assert abs(intercept + 0.40625) < 1e-9, f"line intercept {intercept}"

    ext = build_extended_dataset(_manual_dataset(X, y))
    want = {
        ValidityDomainSpec(kind="ch"): 1.0,
        ValidityDomainSpec(kind="ch_plus", output_subset=(),
                           append_objective=True): 1.375,
    }
    for spec, target in want.items():
        milp = MilpModel("worked")
        x = milp.add_var(0.0, 4.0, name="x")
        emb = embed_regressor(model, [x], milp)
        attach_domain(spec, ext, milp, [x],
                      objective_expr={emb.output_var: 1.0})
        milp.set_objective({emb.output_var: 1.0}, MINIMIZE)
        sol = solve_milp(milp, SolverConfig())
        assert sol.status == OPTIMAL, f"{spec.kind} status {sol.status}"
        assert abs(sol.x[x] - target) <= 1e-6, \
            f"{spec.kind} optimum {sol.x[x]} wants {target}"


def _check_extended_hull_vertex():
    spec = ValidityDomainSpec(kind="ch_plus", output_subset=(),
                              append_objective=True)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1.0, 1.0, size=(12, 2))
        phi = rng.normal(size=12)
        ext = build_extended_dataset(
            _manual_dataset(X, rng.normal(size=12), seed),
            objective_values=phi)
        milp = MilpModel("vertex")
        xv = [milp.add_var(-1.0, 1.0, name=f"x{j}") for j in range(2)]
        t = milp.add_var(name="phi")
        attach_domain(spec, ext, milp, xv, objective_expr={t: 1.0})
        milp.set_objective({t: 1.0}, MINIMIZE)
        sol = solve_milp(milp, SolverConfig())
        assert sol.status == OPTIMAL
        gap = abs(sol.objective - phi.min())
        assert gap <= 1e-6, f"seed {seed}: vertex gap {gap}"


def _check_hull_ordering():
    spec = ExperimentSpec("beale", "uniform", 60, 0.1, 0, "tree",
                          domains=({"kind": "ch"}, {"kind": "ch_plus"}))
    # run_experiment itself raises if the extended optimum leaves the
    # plain hull or undercuts its value
    by = {o.label: o for o in run_experiment(spec)}
    assert by["ch"].record.solved and by["ch_plus"].record.solved
    assert by["ch_plus"].v_hat >= by["ch"].v_hat - 1e-6


def _check_embedding_faithfulness():
    ds = sample_dataset("beale", "uniform", 80, 0.1, 1)
    rng = np.random.default_rng(2)
    points = rng.uniform(-4.5, 4.5, size=(10, 2))
    for kind, params in (("tree", {}), ("mlp", {"hidden": (6, 6)})):
        model = train_regressor(kind, ds, seed=1, **params)
        for p in points:
            milp = MilpModel("fix")
            xv = [milp.add_var(float(p[j]), float(p[j]), name=f"x{j}")
                  for j in range(2)]
            emb = embed_regressor(model, xv, milp)
            milp.set_objective({emb.output_var: 1.0}, MINIMIZE)
            sol = solve_milp(milp, SolverConfig())
            assert sol.status == OPTIMAL
            gap = abs(sol.x[emb.output_var] - predict(model, p))
            assert gap <= 1e-6, f"{kind} embed gap {gap} at {p}"


def _check_isofor_depth():
    spec = ExperimentSpec("beale", "uniform", 100, 0.1, 3, "tree",
                          domains=({"kind": "isofor", "isofor_trees": 5,
                                    "isofor_subsample": 64},))
    # the runner re-traverses every tree at the optimum and raises on a
    # shallow leaf
    outcome = run_experiment(spec)[0]
    assert outcome.record.solved, outcome.record.status


def _check_solver_against_linprog():
    rng = np.random.default_rng(9)
    for trial in range(10):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        c = rng.normal(size=n)
        A = rng.normal(size=(m, n))
        b = A @ rng.uniform(0.2, 0.8, size=n) + rng.uniform(0.1, 1.0, size=m)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=[(0.0, 1.0)] * n,
                      method="highs")
        milp = MilpModel("lp")
        xv = [milp.add_var(0.0, 1.0, name=f"x{j}") for j in range(n)]
        for i in range(m):
            milp.add_constr({xv[j]: float(A[i, j]) for j in range(n)},
                            LESS, float(b[i]))
        milp.set_objective({xv[j]: float(c[j]) for j in range(n)}, MINIMIZE)
        sol = solve_lp(milp, SolverConfig())
        assert sol.status == OPTIMAL and ref.status == 0
        gap = abs(sol.objective - ref.fun)
        assert gap <= 1e-7, f"trial {trial}: lp gap {gap}"

    for trial in range(10):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        c = rng.normal(size=n + k)
        A = rng.normal(size=(2, n + k))
        b = A @ rng.uniform(0.2, 0.8, size=n + k) + rng.uniform(0.1, 1.0, 2)
        best = np.inf
        for pattern in range(2 ** k):
            fixed = [(pattern >> i) & 1 for i in range(k)]
            bounds = [(0.0, 1.0)] * n + [(v, v) for v in fixed]
            ref = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            if ref.status == 0:
                best = min(best, ref.fun)
        milp = MilpModel("milp")
        xv = [milp.add_var(0.0, 1.0, name=f"x{j}") for j in range(n)]
        zv = [milp.add_var(binary=True, name=f"z{i}") for i in range(k)]
        allv = xv + zv
        for i in range(2):
            milp.add_constr({allv[j]: float(A[i, j])
                             for j in range(n + k)}, LESS, float(b[i]))
        milp.set_objective({allv[j]: float(c[j]) for j in range(n + k)},
                           MINIMIZE)
        sol = solve_milp(milp, SolverConfig())
        assert sol.status == OPTIMAL and np.isfinite(best)
        gap = abs(sol.objective - best)
        assert gap <= 1e-6, f"trial {trial}: milp gap {gap}"


def _check_table_normalization():
    rows = []
    for seed in range(4):
        for domain, value in (("box", 2.0), ("ch", 1.0)):
            rows.append({"function": "f", "rule": "r", "n_samples": 10,
                         "sigma": 0.0, "ml": "m", "seed": seed,
                         "domain": domain, "function_value_error": value})
    cells = {c.domain: c for c in aggregate(rows)}
    assert cells["box"].relative == 1.0
    assert cells["ch"].relative == 0.5
    assert cells["ch"].is_minimum and not cells["box"].is_minimum


def _check_hull_membership():
    ds = sample_dataset("beale", "uniform", 50, 0.1, 7)
    ext = build_extended_dataset(ds)
    spec = ValidityDomainSpec(kind="ch")
    for i in (0, 13, 37):
        report = membership_test(spec, ext, ds.inputs[i])
        assert report.inside, f"data point {i} residual {report.residual}"
    outside = ds.inputs.max(axis=0) + 0.5
    report = membership_test(spec, ext, outside)
    assert not report.inside and report.residual > 0.01


CHECKS = (
    ("worked-example", _check_worked_example),
    ("extended-hull-vertex", _check_extended_hull_vertex),
    ("hull-ordering", _check_hull_ordering),
    ("embedding-faithfulness", _check_embedding_faithfulness),
    ("isofor-depth", _check_isofor_depth),
    ("solver-vs-linprog", _check_solver_against_linprog),
    ("table-normalization", _check_table_normalization),
    ("hull-membership", _check_hull_membership),
)


def run_selftest(echo=print) -> bool:
    """Run every check, print one line each, return overall success."""
    all_ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            all_ok = False
            echo(f"FAIL {name}: {exc}")
        else:
            echo(f"PASS {name} ({time.perf_counter() - t0:.1f}s)")
    return all_ok


__all__ = ["CHECKS", "run_selftest"]
