"""Experiment orchestration: benchmark grids, stylized models, CSV output.

An experiment fixes six design options (ground truth, sampling rule, sample
size, noise level, seed, learning technique), trains one surrogate, then
solves the surrogate optimization once per validity domain.  Suites loop a
Cartesian grid of experiments, in parallel when asked, and write one CSV
row per (experiment, domain) plus Box-normalized markdown tables.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field
from functools import lru_cache
from multiprocessing import Pool
from typing import Mapping, Optional, Sequence

import numpy as np

from .bench import Dataset, GroundTruth, get_ground_truth, sample_dataset
from .embed import embed_regressor
from .errors import ConfigError, SolverError
from .learn import path_lengths, train_regressor
from .metrics import (CSV_COLUMNS, ErrorRecord, METRIC_FIELDS, aggregate,
                      compute_errors, markdown_table, record_to_csv_row)
from .milp import (LESS, MINIMIZE, OPTIMAL, MilpModel, SolverConfig,
                   solve_milp, solve_with_ball_cuts)
from .vdom import (ValidityDomainSpec, attach_domain, build_extended_dataset,
                   membership_oracle, membership_test)

DEFAULT_SEEDS = tuple(range(2023, 2043))

# paper-scale grids use 100-member ensembles and 2x30 networks; the desk
# defaults shrink them so the bundled simplex engine stays in budget
DESK_ML = ({"kind": "mlp", "hidden": (10, 10)},)
# isofor leaf indicators multiply against the surrogate's binaries, so the
# default menu keeps the hull family; pair ISOFOR_DOMAIN with tree-based
# surrogates (see configs/desk_isofor.json)
ISOFOR_DOMAIN = {"kind": "isofor", "isofor_trees": 10, "isofor_subsample": 256}
DESK_DOMAINS = (
    {"kind": "box"},
    {"kind": "ch"},
    {"kind": "ch_plus"},
    {"kind": "ch_plus_eps", "epsilon": 0.05},
    {"kind": "ch_plus_eps", "epsilon": 0.10},
)

GROUP_KEYS = ("function", "rule", "n_samples", "sigma", "ml")


def domain_label(cfg: Mapping[str, object]) -> str:
    if "label" in cfg:
        return str(cfg["label"])
    kind = str(cfg["kind"])
    if kind.endswith("_eps"):
        return f"{kind[:-4]}_{float(cfg.get('epsilon', 0.0)):g}"
    return kind


def domain_spec(cfg: Mapping[str, object], dim: int) -> ValidityDomainSpec:
    """Build one validity-domain spec from a config mapping.

    The isolation-forest tree height defaults to 5 for 2-dimensional
    inputs and 6 above that, unless the config pins it.
    """
    cfg = dict(cfg)
    cfg.pop("label", None)
    kind = cfg.pop("kind")
    if kind == "isofor" and "isofor_max_depth" not in cfg:
        cfg["isofor_max_depth"] = 5 if dim <= 2 else 6
    if "output_subset" in cfg and cfg["output_subset"] is not None:
        cfg["output_subset"] = tuple(int(j) for j in cfg["output_subset"])
    if "norm" in cfg:
        cfg["norm"] = math.inf if cfg["norm"] in ("inf", math.inf) else int(cfg["norm"])
    return ValidityDomainSpec(kind=kind, **cfg)


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark experiment: the six design options plus the domains."""

    function: str
    rule: str
    n_samples: int
    sigma: float
    seed: int
    ml: str
    ml_params: tuple = ()
    domains: tuple = DESK_DOMAINS

    def ml_config(self) -> dict:
        cfg = dict(self.ml_params)
        if "hidden" in cfg:
            cfg["hidden"] = tuple(cfg["hidden"])
        return cfg


@dataclass
class DomainOutcome:
    """What one validity domain produced for one experiment."""

    label: str
    record: ErrorRecord
    x_hat: Optional[np.ndarray] = None
    y_hat: Optional[np.ndarray] = None
    v_hat: Optional[float] = None


def _solve(milp: MilpModel, solver: SolverConfig):
    if milp.ball_groups:
        return solve_with_ball_cuts(milp, solver)
    return solve_milp(milp, solver)


def _depth_reachable(tree, x, threshold: int, tol: float) -> bool:
    """Can a traversal consistent with the solver tolerance reach depth d."""
    stack = [0]
    while stack:
        node = stack.pop()
        f = tree.feature[node]
        if f < 0:
            if tree.value[node] >= threshold:
                return True
            continue
        t = tree.threshold[node]
        if x[f] <= t + tol:
            stack.append(tree.left[node])
        if x[f] > t - tol:
            stack.append(tree.right[node])
    return False


def _assert_isofor_depth(block, x_hat, tol: float = 1e-6) -> None:
    forest = block.isofor_forest
    depths = path_lengths(forest, x_hat)
    if np.all(depths >= block.isofor_threshold):
        return
    for tree in forest.trees:
        if not _depth_reachable(tree, x_hat, block.isofor_threshold, tol):
            raise SolverError(
                "isolation-forest optimum reaches a shallow leaf: depth "
                f"{depths.min()} < {block.isofor_threshold}")


def run_experiment(spec: ExperimentSpec,
                   solver: SolverConfig | None = None,
                   record_timings: bool = False) -> list[DomainOutcome]:
    """Train one surrogate and solve it under every requested domain.

    Failures (training, solving) become records with a failure status; the
    remaining domains still run.  Afterward three run-level guarantees are
    asserted: the extended-hull optimum projects into the plain hull, its
    value is no better than the plain hull's, and isolation-forest optima
    sit in deep cells of every tree.
    """
    solver = solver or SolverConfig()
    truth = get_ground_truth(spec.function)
    dataset = sample_dataset(truth, spec.rule, spec.n_samples, spec.sigma,
                             spec.seed)
    ext = build_extended_dataset(dataset)

    t0 = time.perf_counter()
    try:
        model = train_regressor(spec.ml, dataset, seed=spec.seed,
                                **spec.ml_config())
    except Exception:
        record = ErrorRecord(status="error")
        return [DomainOutcome(domain_label(cfg), record)
                for cfg in spec.domains]
    train_seconds = time.perf_counter() - t0

    outcomes = []
    for cfg in spec.domains:
        label = domain_label(cfg)
        dspec = domain_spec(cfg, truth.dim)
        t0 = time.perf_counter()
        milp = MilpModel(label)
        xv = [milp.add_var(float(truth.lower[j]), float(truth.upper[j]),
                           name=f"x{j}") for j in range(truth.dim)]
        emb = embed_regressor(model, xv, milp)
        block = attach_domain(dspec, ext, milp, xv,
                              y_vars=[emb.output_var],
                              objective_expr={emb.output_var: 1.0})
        milp.set_objective({emb.output_var: 1.0}, MINIMIZE)
        setup = time.perf_counter() - t0 + train_seconds

        t0 = time.perf_counter()
        try:
            sol = _solve(milp, solver)
        except SolverError:
            sol = None
        solve = time.perf_counter() - t0

        if sol is None or sol.status != OPTIMAL:
            status = "error" if sol is None else sol.status
            record = ErrorRecord(
                status=status,
                setup_seconds=setup if record_timings else 0.0,
                solve_seconds=solve if record_timings else 0.0)
            outcomes.append(DomainOutcome(label, record))
            continue

        x_hat = np.array([sol.x[v] for v in xv])
        y_hat = float(sol.x[emb.output_var])
        record = compute_errors(
            x_hat, y_hat, sol.objective, truth,
            setup_seconds=setup if record_timings else 0.0,
            solve_seconds=solve if record_timings else 0.0)
        outcomes.append(DomainOutcome(label, record, x_hat,
                                      np.atleast_1d(y_hat), sol.objective))
        if dspec.kind == "isofor":
            _assert_isofor_depth(block, x_hat)

    _assert_hull_relations(spec, ext, outcomes)
    return outcomes


def _assert_hull_relations(spec, ext, outcomes) -> None:
    by_label = {o.label: o for o in outcomes}
    plain = by_label.get("ch")
    plus = by_label.get("ch_plus")
    if plus is not None and plus.record.solved:
        report = membership_test(ValidityDomainSpec(kind="ch"), ext,
                                 plus.x_hat)
        if report.residual > 1e-6:
            raise SolverError(
                f"extended-hull optimum leaves the plain hull by "
                f"{report.residual:.2e} on {spec}")
        if plain is not None and plain.record.solved \
                and plus.v_hat < plain.v_hat - 1e-6:
            raise SolverError(
                f"extended-hull value {plus.v_hat} undercuts the plain "
                f"hull value {plain.v_hat} on {spec}")


def experiment_rows(spec: ExperimentSpec,
                    outcomes: Sequence[DomainOutcome]) -> list[dict]:
    rows = []
    for outcome in outcomes:
        meta = {"function": spec.function, "rule": spec.rule,
                "n_samples": spec.n_samples, "sigma": spec.sigma,
                "seed": spec.seed, "ml": spec.ml, "domain": outcome.label}
        rows.append(record_to_csv_row(meta, outcome.record))
    return rows


# ------------------------------------------------------------- grid suite

@dataclass
class RunConfig:
    """A grid of experiments plus execution and output settings."""

    functions: tuple = ("beale", "qing")
    rules: tuple = ("normal",)
    n_samples: tuple = (500,)
    sigmas: tuple = (0.1,)
    seeds: tuple = DEFAULT_SEEDS
    ml: tuple = DESK_ML
    domains: tuple = DESK_DOMAINS
    parallelism: int = 1
    solver: dict = field(default_factory=dict)
    record_timings: bool = False
    out_dir: str = "results"

    def __post_init__(self):
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, object]) -> "RunConfig":
        data = dict(raw)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        seeds = data.get("seeds")
        if isinstance(seeds, Mapping):
            start = int(seeds.get("start", 2023))
            count = int(seeds.get("count", 20))
            data["seeds"] = tuple(range(start, start + count))
        elif seeds is not None:
            data["seeds"] = tuple(int(s) for s in seeds)
        for key in ("functions", "rules", "n_samples", "sigmas"):
            if key in data:
                data[key] = tuple(data[key])
        for key in ("ml", "domains"):
            if key in data:
                data[key] = tuple(dict(d) for d in data[key])
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}")
        return cls.from_mapping(raw)

    def grid(self) -> list[ExperimentSpec]:
        specs = []
        domains = tuple(dict(d) for d in self.domains)
        for function, rule, n, sigma, ml, seed in itertools.product(
                self.functions, self.rules, self.n_samples, self.sigmas,
                self.ml, self.seeds):
            params = {k: v for k, v in ml.items() if k != "kind"}
            params = tuple(sorted(
                (k, tuple(v) if isinstance(v, list) else v)
                for k, v in params.items()))
            specs.append(ExperimentSpec(
                function=function, rule=rule, n_samples=int(n),
                sigma=float(sigma), seed=int(seed), ml=str(ml["kind"]),
                ml_params=params, domains=domains))
        return specs


def _suite_worker(args):
    spec, solver_kwargs, record_timings = args
    outcomes = run_experiment(spec, SolverConfig(**solver_kwargs),
                              record_timings)
    return experiment_rows(spec, outcomes)


def write_rows_csv(rows: Sequence[Mapping[str, object]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS,
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_tables(rows: Sequence[Mapping[str, object]], out_dir: str,
                 statistic: str = "median") -> list[str]:
    paths = []
    for metric in METRIC_FIELDS:
        present = [r for r in rows if r.get(metric) not in (None, "")]
        if not present:
            continue
        cells = aggregate(rows, metric=metric, statistic=statistic,
                          group_keys=GROUP_KEYS)
        path = os.path.join(out_dir, f"table_{metric}.md")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {statistic} {metric.replace('_', ' ')}, "
                     "relative to the box domain\n\n")
            fh.write(markdown_table(cells, GROUP_KEYS))
        paths.append(path)
    return paths


def run_suite(config: RunConfig) -> dict:
    """Execute the whole grid and write results.csv, tables, manifest."""
    os.makedirs(config.out_dir, exist_ok=True)
    specs = config.grid()
    work = [(spec, dict(config.solver), config.record_timings)
            for spec in specs]
    started = time.time()
    if config.parallelism > 1 and len(work) > 1:
        with Pool(processes=config.parallelism) as pool:
            row_blocks = pool.map(_suite_worker, work, chunksize=1)
    else:
        row_blocks = [_suite_worker(item) for item in work]
    rows = [row for block in row_blocks for row in block]

    csv_path = os.path.join(config.out_dir, "results.csv")
    write_rows_csv(rows, csv_path)
    table_paths = write_tables(rows, config.out_dir)

    import scipy

    from . import __version__

    manifest = {
        "experiments": len(specs),
        "rows": len(rows),
        "seeds": list(config.seeds),
        "functions": list(config.functions),
        "rules": list(config.rules),
        "n_samples": list(config.n_samples),
        "sigmas": list(config.sigmas),
        "ml": [dict(m) for m in config.ml],
        "domains": [dict(d) for d in config.domains],
        "parallelism": config.parallelism,
        "record_timings": config.record_timings,
        "wall_seconds": round(time.time() - started, 3),
        "versions": {
            "validopt": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    manifest_path = os.path.join(config.out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": csv_path, "tables": table_paths,
            "manifest": manifest_path, "rows": rows}


# ------------------------------------------------ stylized norm-ball model

NORM_DOMAINS = (
    {"kind": "box"},
    {"kind": "ch"},
    {"kind": "ch_plus", "append_objective": True},
    {"kind": "ch_plus_eps", "append_objective": True, "epsilon": 0.05},
    {"kind": "ch_plus_eps", "append_objective": True, "epsilon": 0.10},
)


def sample_norm_shell(n1: int, n_samples: int, seed: int):
    """Directions uniform on the sphere, radii uniform in [0.5, 1.5]."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n1)
    c = c / np.linalg.norm(c)
    radii = rng.uniform(0.5, 1.5, size=n_samples)
    directions = rng.normal(size=(n_samples, n1))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    inputs = radii[:, None] * directions
    noisy = radii + 0.05 * rng.normal(size=n_samples)
    return c, inputs, radii, noisy


def run_stylized_norm(n1: int = 5, seeds: Sequence[int] = DEFAULT_SEEDS,
                      n_samples: int = 1000,
                      domains: Sequence[Mapping] = NORM_DOMAINS,
                      ml_params: Mapping[str, object] | None = None,
                      solver: SolverConfig | None = None,
                      record_timings: bool = False):
    """Minimize c'x over the unit ball, the ball known only through data.

    The radius constraint is carried by a learned norm estimate: the
    surrogate problem minimizes c'x subject to the network's value staying
    at most 1, the [-1, 1] box, and one validity domain.  The extended
    hull keeps the samples whose noisy norm is at most 1.
    """
    solver = solver or SolverConfig()
    params = {"hidden": (10, 10)}
    params.update(ml_params or {})
    params["hidden"] = tuple(params["hidden"])
    function = f"norm_ball_{n1}d"
    rows, details = [], []

    for seed in seeds:
        c, inputs, radii, noisy = sample_norm_shell(n1, n_samples, seed)
        dataset = Dataset(truth_name=function, rule="shell",
                          n_samples=n_samples, sigma=0.05, seed=seed,
                          inputs=inputs, clean_values=radii, values=noisy)
        ext = build_extended_dataset(
            dataset, objective_values=inputs @ c,
            feasibility_rule=lambda X, Y: Y[:, 0] <= 1.0)
        truth = GroundTruth(name=function, lower=-np.ones(n1),
                            upper=np.ones(n1),
                            evaluate=np.linalg.norm,
                            x_star=-c, v_star=-1.0)
        t0 = time.perf_counter()
        model = train_regressor("mlp", dataset, seed=seed, **params)
        train_seconds = time.perf_counter() - t0

        outcomes = []
        for cfg in domains:
            label = domain_label(cfg)
            dspec = domain_spec(cfg, n1)
            t0 = time.perf_counter()
            milp = MilpModel(label)
            xv = [milp.add_var(-1.0, 1.0, name=f"x{j}") for j in range(n1)]
            emb = embed_regressor(model, xv, milp)
            milp.add_constr({emb.output_var: 1.0}, LESS, 1.0, name="cap")
            objective = {xv[j]: float(c[j]) for j in range(n1)}
            attach_domain(dspec, ext, milp, xv, y_vars=[emb.output_var],
                          objective_expr=dict(objective))
            milp.set_objective(objective, MINIMIZE)
            setup = time.perf_counter() - t0 + train_seconds

            t0 = time.perf_counter()
            try:
                sol = _solve(milp, solver)
            except SolverError:
                sol = None
            solve = time.perf_counter() - t0

            if sol is None or sol.status != OPTIMAL:
                record = ErrorRecord(
                    status="error" if sol is None else sol.status,
                    setup_seconds=setup if record_timings else 0.0,
                    solve_seconds=solve if record_timings else 0.0)
                outcomes.append(DomainOutcome(label, record))
            else:
                x_hat = np.array([sol.x[v] for v in xv])
                y_hat = float(sol.x[emb.output_var])
                record = compute_errors(
                    x_hat, y_hat, sol.objective, truth,
                    theta=lambda y: y - 1.0,
                    setup_seconds=setup if record_timings else 0.0,
                    solve_seconds=solve if record_timings else 0.0)
                outcomes.append(DomainOutcome(label, record, x_hat,
                                              np.atleast_1d(y_hat),
                                              sol.objective))
        for outcome in outcomes:
            meta = {"function": function, "rule": "shell",
                    "n_samples": n_samples, "sigma": 0.05, "seed": seed,
                    "ml": "mlp", "domain": outcome.label}
            rows.append(record_to_csv_row(meta, outcome.record))
        details.append((seed, outcomes))
    return rows, details


# ------------------------------------------------- stylized price model

PRICE_LOWER = np.array([6.5, 7.5])
PRICE_UPPER = np.array([9.5, 10.5])
PRICE_GAP = (0.5, 1.5)  # p1 + 0.5 <= p2 <= p1 + 1.5
# cap on total demand; binding at the reported optimal prices
DEMAND_CAP = 1.75e6
PRICE_GRID_STEP = 0.005

PRICE_DOMAINS = (
    {"kind": "box"},
    {"kind": "ch"},
    {"kind": "isofor", "isofor_trees": 100, "isofor_max_depth": 5,
     "isofor_subsample": 256},
    {"kind": "ch_plus", "output_subset": (0, 1), "data_subset": "all"},
    {"kind": "ch_plus_eps", "output_subset": (0, 1), "data_subset": "all",
     "epsilon": 0.05},
    {"kind": "ch_plus_eps", "output_subset": (0, 1), "data_subset": "all",
     "epsilon": 0.10},
)


def true_demands(p1, p2):
    d1 = 1e7 * np.asarray(p1, dtype=float) ** -3.2 * np.asarray(p2, dtype=float) ** 0.5
    d2 = 1e7 * np.asarray(p1, dtype=float) ** 1.5 * np.asarray(p2, dtype=float) ** -2.2
    return d1, d2


def _quadratic_basis(p1, p2):
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    return np.column_stack([np.ones_like(p1), p1, p2, p1 * p1, p1 * p2,
                            p2 * p2])


@lru_cache(maxsize=4)
def _price_grid(step: float):
    g1 = np.round(np.arange(PRICE_LOWER[0], PRICE_UPPER[0] + step / 2, step),
                  6)
    g2 = np.round(np.arange(PRICE_LOWER[1], PRICE_UPPER[1] + step / 2, step),
                  6)
    p1, p2 = (g.ravel() for g in np.meshgrid(g1, g2, indexing="ij"))
    band = (p1 + PRICE_GAP[0] <= p2 + 1e-12) & (p2 <= p1 + PRICE_GAP[1] + 1e-12)
    return p1[band], p2[band]


class PriceTruth:
    """Grid-certified optimum of the two-product pricing model."""

    def __init__(self, step: float = PRICE_GRID_STEP):
        p1, p2 = _price_grid(step)
        d1, d2 = true_demands(p1, p2)
        feasible = d1 + d2 <= DEMAND_CAP
        revenue = np.where(feasible, p1 * d1 + p2 * d2, -np.inf)
        k = int(np.argmax(revenue))
        self.name = "price_two_products"
        self.lower, self.upper = PRICE_LOWER, PRICE_UPPER
        self.dim = 2
        self.x_star = np.array([p1[k], p2[k]])
        self.v_star = float(revenue[k])

    def value(self, x):
        d1, d2 = true_demands(x[0], x[1])
        return np.array([float(d1), float(d2)])


@lru_cache(maxsize=2)
def price_truth(step: float = PRICE_GRID_STEP) -> PriceTruth:
    return PriceTruth(step)


def _price_feasibility(inputs, outputs):
    band = (inputs[:, 0] + PRICE_GAP[0] <= inputs[:, 1]) \
        & (inputs[:, 1] <= inputs[:, 0] + PRICE_GAP[1])
    return band & (outputs.sum(axis=1) <= DEMAND_CAP)


def run_stylized_price(seeds: Sequence[int] = tuple(range(2023, 2123)),
                       n_samples: int = 1000,
                       domains: Sequence[Mapping] = PRICE_DOMAINS,
                       grid_step: float = PRICE_GRID_STEP,
                       record_timings: bool = False):
    """Revenue maximization with learned demand curves, solved on a grid.

    The revenue objective is cubic in prices, so instead of a MILP the
    solver enumerates a dense price grid: candidates satisfying the price
    gap and the predicted demand cap are walked in decreasing predicted
    revenue, and the first one inside the validity domain wins.  The
    extended hull here spans the 4-dimensional (prices, demands) tuples of
    all samples with no objective coordinate.
    """
    truth = price_truth(grid_step)
    g1, g2 = _price_grid(grid_step)
    grid_basis = _quadratic_basis(g1, g2)
    rows, details = [], []

    for seed in seeds:
        t0 = time.perf_counter()
        rng = np.random.default_rng(seed)
        prices = np.column_stack([
            rng.uniform(PRICE_LOWER[0], PRICE_UPPER[0], n_samples),
            rng.uniform(PRICE_LOWER[1], PRICE_UPPER[1], n_samples)])
        d1, d2 = true_demands(prices[:, 0], prices[:, 1])
        demand = np.column_stack([d1, d2])
        coef, *_ = np.linalg.lstsq(
            _quadratic_basis(prices[:, 0], prices[:, 1]), demand, rcond=None)

        dataset = Dataset(truth_name=truth.name, rule="uniform",
                          n_samples=n_samples, sigma=0.0, seed=seed,
                          inputs=prices, clean_values=demand[:, 0],
                          values=demand[:, 0])
        ext = build_extended_dataset(dataset, true_outputs=demand,
                                     objective_values=(
                                         prices * demand).sum(axis=1),
                                     feasibility_rule=_price_feasibility)

        predicted = grid_basis @ coef
        capped = predicted.sum(axis=1) <= DEMAND_CAP
        revenue = g1 * predicted[:, 0] + g2 * predicted[:, 1]
        order = np.argsort(-revenue, kind="stable")
        order = order[capped[order]]
        setup_base = time.perf_counter() - t0

        outcomes = []
        for cfg in domains:
            label = domain_label(cfg)
            dspec = domain_spec(cfg, 2)
            t0 = time.perf_counter()
            oracle = membership_oracle(dspec, ext)
            needs_tuple = dspec.kind in ("ch_plus", "ch_plus_eps")
            setup = setup_base + (time.perf_counter() - t0)

            t0 = time.perf_counter()
            winner = None
            for idx in order:
                point = (g1[idx], g2[idx])
                tup = predicted[idx] if needs_tuple else None
                if oracle(point, tup).inside:
                    winner = idx
                    break
            solve = time.perf_counter() - t0

            if winner is None:
                record = ErrorRecord(
                    status="infeasible",
                    setup_seconds=setup if record_timings else 0.0,
                    solve_seconds=solve if record_timings else 0.0)
                outcomes.append(DomainOutcome(label, record))
                continue
            x_hat = np.array([g1[winner], g2[winner]])
            y_hat = predicted[winner]
            record = compute_errors(
                x_hat, y_hat, revenue[winner], truth,
                theta=lambda d: np.array([d[0] + d[1] - DEMAND_CAP]),
                setup_seconds=setup if record_timings else 0.0,
                solve_seconds=solve if record_timings else 0.0)
            outcomes.append(DomainOutcome(label, record, x_hat, y_hat,
                                          float(revenue[winner])))
        for outcome in outcomes:
            meta = {"function": truth.name, "rule": "uniform",
                    "n_samples": n_samples, "sigma": 0.0, "seed": seed,
                    "ml": "quadratic", "domain": outcome.label}
            rows.append(record_to_csv_row(meta, outcome.record))
        details.append((seed, outcomes))
    return rows, details


__all__ = [
    "DEFAULT_SEEDS", "DESK_DOMAINS", "DESK_ML", "ISOFOR_DOMAIN", "NORM_DOMAINS",
    "PRICE_DOMAINS", "DEMAND_CAP", "DomainOutcome", "ExperimentSpec",
    "PriceTruth", "RunConfig", "domain_label", "domain_spec",
    "experiment_rows", "price_truth", "run_experiment", "run_stylized_norm",
    "run_stylized_price", "run_suite", "sample_norm_shell", "true_demands",
    "write_rows_csv", "write_tables",
]
