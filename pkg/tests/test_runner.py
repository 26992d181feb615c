"""Orchestration tests: grids, experiments, suites, stylized models."""

import json
import math

import numpy as np
import pytest

from validopt.errors import ConfigError
from validopt.metrics import CSV_COLUMNS, aggregate
from validopt.milp import SolverConfig
from validopt.runner import (DEFAULT_SEEDS, DEMAND_CAP, DESK_DOMAINS,
                             ExperimentSpec, ISOFOR_DOMAIN, RunConfig,
                             domain_label, domain_spec, experiment_rows,
                             price_truth, run_experiment, run_stylized_norm,
                             run_stylized_price, run_suite, sample_norm_shell,
                             true_demands, write_rows_csv)
from validopt.vdom import build_extended_dataset, membership_oracle

CHEAP_DOMAINS = ({"kind": "box"}, {"kind": "ch"}, {"kind": "ch_plus"})


def cheap_spec(seed=2023, domains=CHEAP_DOMAINS, ml="tree", n=40):
    return ExperimentSpec("beale", "uniform", n, 0.0, seed, ml,
                          domains=domains)


# ------------------------------------------------------------- labels, specs

def test_domain_labels():
    assert domain_label({"kind": "box"}) == "box"
    assert domain_label({"kind": "ch_plus"}) == "ch_plus"
    assert domain_label({"kind": "ch_plus_eps", "epsilon": 0.05}) == "ch_plus_0.05"
    assert domain_label({"kind": "ch_plus_eps", "epsilon": 0.10}) == "ch_plus_0.1"
    assert domain_label({"kind": "ch", "label": "hull"}) == "hull"


def test_domain_spec_isofor_depth_follows_dimension():
    assert domain_spec(dict(ISOFOR_DOMAIN), 2).isofor_max_depth == 5
    assert domain_spec(dict(ISOFOR_DOMAIN), 4).isofor_max_depth == 6
    pinned = dict(ISOFOR_DOMAIN, isofor_max_depth=3)
    assert domain_spec(pinned, 4).isofor_max_depth == 3


def test_domain_spec_norm_parsing():
    assert domain_spec({"kind": "ch_plus_eps", "epsilon": 0.05,
                        "norm": "inf"}, 2).norm == math.inf
    assert domain_spec({"kind": "ch_plus_eps", "epsilon": 0.05,
                        "norm": 1}, 2).norm == 1


def test_ml_config_normalizes_hidden():
    spec = ExperimentSpec("beale", "uniform", 40, 0.0, 1, "mlp",
                          ml_params=(("hidden", [4, 4]),))
    assert spec.ml_config() == {"hidden": (4, 4)}


# ------------------------------------------------------------------- config

def test_grid_order_and_determinism():
    cfg = RunConfig(functions=("beale", "qing"), rules=("uniform",),
                    n_samples=(40,), sigmas=(0.0,), seeds=(1, 2),
                    ml=({"kind": "tree"},), domains=CHEAP_DOMAINS)
    specs = cfg.grid()
    assert [(s.function, s.seed) for s in specs] == [
        ("beale", 1), ("beale", 2), ("qing", 1), ("qing", 2)]
    assert specs == cfg.grid()
    assert all(s.domains == CHEAP_DOMAINS for s in specs)


def test_grid_sorts_ml_params():
    cfg = RunConfig(seeds=(1,), functions=("beale",),
                    ml=({"kind": "forest", "n_trees": 5, "max_depth": 3},))
    spec = cfg.grid()[0]
    assert spec.ml == "forest"
    assert spec.ml_params == (("max_depth", 3), ("n_trees", 5))


def test_from_mapping_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="n_sample"):
        RunConfig.from_mapping({"n_sample": [40]})


def test_from_mapping_seed_range():
    cfg = RunConfig.from_mapping({"seeds": {"start": 5, "count": 3}})
    assert cfg.seeds == (5, 6, 7)
    cfg = RunConfig.from_mapping({"seeds": [9, 4]})
    assert cfg.seeds == (9, 4)


def test_from_file_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        RunConfig.from_file(str(path))


def test_from_file_roundtrip(tmp_path):
    raw = {"functions": ["beale"], "seeds": [1], "ml": [{"kind": "tree"}],
           "domains": [{"kind": "box"}], "parallelism": 2,
           "solver": {"ball_tol": 1e-5}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    cfg = RunConfig.from_file(str(path))
    assert cfg.functions == ("beale",)
    assert cfg.parallelism == 2
    assert cfg.solver == {"ball_tol": 1e-5}


def test_parallelism_must_be_positive():
    with pytest.raises(ConfigError):
        RunConfig(parallelism=0)


def test_default_seed_grid():
    assert DEFAULT_SEEDS == tuple(range(2023, 2043))
    assert len(DEFAULT_SEEDS) == 20


# -------------------------------------------------------------- experiments

def test_run_experiment_records_every_domain():
    outcomes = run_experiment(cheap_spec())
    assert [o.label for o in outcomes] == ["box", "ch", "ch_plus"]
    for o in outcomes:
        assert o.record.status == "optimal"
        assert o.record.function_value_error is not None
        # no theta in the benchmark problems, so no feasibility metric
        assert o.record.feasibility_error is None
        assert np.all(o.x_hat >= -4.5 - 1e-9)
        assert np.all(o.x_hat <= 4.5 + 1e-9)


def test_run_experiment_hull_value_ordering():
    outcomes = {o.label: o for o in run_experiment(cheap_spec(seed=2027))}
    assert outcomes["ch_plus"].v_hat >= outcomes["ch"].v_hat - 1e-6
    assert outcomes["ch"].v_hat >= outcomes["box"].v_hat - 1e-6


def test_run_experiment_training_failure_marks_all_domains():
    spec = ExperimentSpec("beale", "uniform", 40, 0.0, 1, "forest",
                          ml_params=(("n_trees", 0),), domains=CHEAP_DOMAINS)
    outcomes = run_experiment(spec)
    assert len(outcomes) == 3
    assert all(o.record.status == "error" for o in outcomes)
    assert all(o.record.function_value_error is None for o in outcomes)


def test_run_experiment_solver_failure_continues():
    outcomes = run_experiment(cheap_spec(),
                              solver=SolverConfig(max_pivots=3))
    assert len(outcomes) == 3
    assert all(not o.record.solved for o in outcomes)


def test_run_experiment_isofor_with_tree_model():
    outcomes = run_experiment(cheap_spec(
        domains=({"kind": "isofor", "isofor_trees": 5,
                  "isofor_subsample": 32},)))
    record = outcomes[0].record
    assert record.status == "optimal"
    assert record.optimal_value_error is not None


def test_experiment_rows_shape():
    spec = cheap_spec(domains=({"kind": "box"}, {"kind": "ch"}))
    rows = experiment_rows(spec, run_experiment(spec))
    assert len(rows) == 2
    for row in rows:
        assert tuple(row) == CSV_COLUMNS
        assert row["function"] == "beale"
        assert row["seed"] == 2023
    assert [r["domain"] for r in rows] == ["box", "ch"]


# -------------------------------------------------------------------- suite

def tiny_config(out_dir, **kw):
    base = dict(functions=("beale",), rules=("uniform",), n_samples=(40,),
                sigmas=(0.0,), seeds=(2023, 2024), ml=({"kind": "tree"},),
                domains=({"kind": "box"}, {"kind": "ch"}),
                out_dir=str(out_dir))
    base.update(kw)
    return RunConfig(**base)


def test_run_suite_writes_rows_tables_manifest(tmp_path):
    result = run_suite(tiny_config(tmp_path / "a"))
    assert len(result["rows"]) == 4
    body = open(result["csv"], encoding="utf-8").read()
    assert body.count("\n") == 5
    assert body.splitlines()[0] == ",".join(CSV_COLUMNS)
    manifest = json.load(open(result["manifest"], encoding="utf-8"))
    assert manifest["experiments"] == 2
    assert manifest["rows"] == 4
    assert "numpy" in manifest["versions"]
    # benchmark rows carry no feasibility metric, so three tables appear
    assert [p.rsplit("table_", 1)[1] for p in result["tables"]] == [
        "function_value_error.md", "optimal_value_error.md",
        "optimal_solution_error.md"]
    table = open(result["tables"][0], encoding="utf-8").read()
    assert "box" in table and "ch" in table


def test_run_suite_rerun_byte_identical(tmp_path):
    first = run_suite(tiny_config(tmp_path / "a"))
    second = run_suite(tiny_config(tmp_path / "b"))
    a = open(first["csv"], "rb").read()
    b = open(second["csv"], "rb").read()
    assert a == b


def test_run_suite_parallel_matches_serial(tmp_path):
    serial = run_suite(tiny_config(tmp_path / "s", parallelism=1))
    parallel = run_suite(tiny_config(tmp_path / "p", parallelism=2))
    assert open(serial["csv"], "rb").read() == open(parallel["csv"], "rb").read()


def test_run_suite_box_column_normalizes_to_one(tmp_path):
    cfg = tiny_config(tmp_path / "n", functions=("beale", "qing"),
                      domains=({"kind": "box"}, {"kind": "ch"},
                               {"kind": "ch_plus"}))
    rows = run_suite(cfg)["rows"]
    cells = aggregate(rows, metric="function_value_error",
                      group_keys=("function", "rule", "n_samples",
                                  "sigma", "ml"))
    box_cells = [c for c in cells if c.domain == "box"]
    assert len(box_cells) == 2
    assert all(c.relative == 1.0 for c in box_cells)


def test_run_suite_all_failures_still_writes_csv(tmp_path):
    cfg = tiny_config(tmp_path / "f", solver={"max_pivots": 3})
    result = run_suite(cfg)
    assert result["tables"] == []
    assert len(result["rows"]) == 4
    assert all(row["status"] != "optimal" for row in result["rows"])


def test_write_rows_csv_blank_for_missing(tmp_path):
    spec = cheap_spec(domains=({"kind": "box"},))
    rows = experiment_rows(spec, run_experiment(
        spec, solver=SolverConfig(max_pivots=3)))
    path = tmp_path / "rows.csv"
    write_rows_csv(rows, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert ",,,," in lines[1]


# ----------------------------------------------------------- stylized norm

def test_norm_shell_sampling_geometry():
    c, inputs, radii, noisy = sample_norm_shell(5, 400, seed=7)
    assert abs(np.linalg.norm(c) - 1.0) < 1e-12
    norms = np.linalg.norm(inputs, axis=1)
    assert np.allclose(norms, radii)
    assert radii.min() >= 0.5 and radii.max() <= 1.5
    assert 0 < np.std(noisy - radii) < 0.1


def test_norm_shell_feasible_count_binomial_band():
    # half the radii fall below 1, so the noisy filter keeps about N/2;
    # 99% binomial band: N/2 +- 2.576 * sqrt(N)/2
    n = 1000
    for seed in (2023, 2024, 2025):
        _, _, _, noisy = sample_norm_shell(5, n, seed)
        count = int(np.sum(noisy <= 1.0))
        half_width = 2.576 * math.sqrt(n) / 2
        assert abs(count - n / 2) <= half_width


def test_stylized_norm_single_seed_structure():
    rows, details = run_stylized_norm(
        n1=5, seeds=(2023,), n_samples=200,
        domains=({"kind": "box"}, {"kind": "ch"},
                 {"kind": "ch_plus", "append_objective": True}),
        solver=SolverConfig(ball_tol=1e-5))
    assert len(rows) == 3
    assert [r["domain"] for r in rows] == ["box", "ch", "ch_plus"]
    seed, outcomes = details[0]
    assert seed == 2023
    for o in outcomes:
        assert o.record.solved
        # surrogate cap is part of every model
        assert o.y_hat[0] <= 1.0 + 1e-6
        assert o.record.optimal_value_error == pytest.approx(
            abs(o.v_hat + 1.0))
        assert np.all(np.abs(o.x_hat) <= 1.0 + 1e-9)


def test_stylized_norm_hull_tightens_objective():
    _, details = run_stylized_norm(
        n1=5, seeds=(2023,), n_samples=200,
        domains=({"kind": "box"}, {"kind": "ch"}),
        solver=SolverConfig(ball_tol=1e-5))
    by = {o.label: o for o in details[0][1]}
    # the hull sits inside the box, so its minimum cannot be lower
    assert by["ch"].v_hat >= by["box"].v_hat - 1e-9


# ---------------------------------------------------------- stylized price

def test_true_demand_curves():
    d1, d2 = true_demands(6.5, 7.5)
    assert d1 == pytest.approx(1e7 * 6.5 ** -3.2 * 7.5 ** 0.5)
    assert d2 == pytest.approx(1e7 * 6.5 ** 1.5 * 7.5 ** -2.2)


def test_price_truth_grid_oracle():
    truth = price_truth(0.005)
    assert truth.x_star == pytest.approx([9.500, 10.315], abs=1e-9)
    assert truth.v_star == pytest.approx(18026947, rel=1e-6)
    d = truth.value(truth.x_star)
    assert d.sum() <= DEMAND_CAP + 1e-6
    assert d.sum() >= 0.999 * DEMAND_CAP  # the cap binds at the optimum
    # band active side: p2 - p1 inside [0.5, 1.5]
    gap = truth.x_star[1] - truth.x_star[0]
    assert 0.5 - 1e-9 <= gap <= 1.5 + 1e-9


def test_stylized_price_single_seed_structure():
    domains = ({"kind": "box"}, {"kind": "ch"},
               {"kind": "ch_plus", "output_subset": (0, 1),
                "data_subset": "all"},
               {"kind": "ch_plus_eps", "output_subset": (0, 1),
                "data_subset": "all", "epsilon": 0.05})
    rows, details = run_stylized_price(seeds=(2023,), domains=domains)
    assert len(rows) == 4
    seed, outcomes = details[0]
    by = {o.label: o for o in outcomes}
    for o in outcomes:
        assert o.record.solved
        p1, p2 = o.x_hat
        assert 0.5 - 1e-9 <= p2 - p1 <= 1.5 + 1e-9
        assert o.record.optimal_solution_error is not None
    # domains only shrink the candidate set, so predicted revenue drops
    assert by["ch"].v_hat <= by["box"].v_hat + 1e-9
    assert by["ch_plus"].v_hat <= by["box"].v_hat + 1e-9
    # the enlarged hull contains the plain extended hull
    assert by["ch_plus_0.05"].v_hat >= by["ch_plus"].v_hat - 1e-9


def test_stylized_price_no_member_recorded_infeasible():
    # a coarse grid misses the thin 4-d hull slab entirely; the run must
    # record the miss, not raise
    domains = ({"kind": "ch_plus", "output_subset": (0, 1),
                "data_subset": "all"},)
    rows, details = run_stylized_price(seeds=(2023,), n_samples=400,
                                       domains=domains, grid_step=0.05)
    record = details[0][1][0].record
    assert record.status == "infeasible"
    assert record.function_value_error is None
    assert rows[0]["status"] == "infeasible"


def test_stylized_price_winner_respects_domain():
    domains = ({"kind": "ch_plus", "output_subset": (0, 1),
                "data_subset": "all"},)
    _, details = run_stylized_price(seeds=(2024,), domains=domains)
    outcome = details[0][1][0]
    assert outcome.record.solved
    # rebuild the extended dataset the runner used and re-test membership
    from validopt.bench import Dataset
    rng = np.random.default_rng(2024)
    prices = np.column_stack([rng.uniform(6.5, 9.5, 1000),
                              rng.uniform(7.5, 10.5, 1000)])
    d1, d2 = true_demands(prices[:, 0], prices[:, 1])
    demand = np.column_stack([d1, d2])
    dataset = Dataset(truth_name="price_two_products", rule="uniform",
                      n_samples=1000, sigma=0.0, seed=2024, inputs=prices,
                      clean_values=demand[:, 0], values=demand[:, 0])
    ext = build_extended_dataset(dataset, true_outputs=demand)
    oracle = membership_oracle(domain_spec(dict(domains[0]), 2), ext)
    report = oracle(outcome.x_hat, outcome.y_hat)
    assert report.inside
