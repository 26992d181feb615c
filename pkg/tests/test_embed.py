"""Mixed-integer encodings of trained models match direct prediction."""

import numpy as np
import pytest

import validopt.embed as embed_mod
from harness import forced_output, minimize_embedded
from validopt.embed import (EmbeddedOutput, IsoforBlock, embed_isofor_depth,
                            embed_regressor, propagate_bounds)
from validopt.errors import ArgumentError, ConfigError, DimensionError
from validopt.learn import (MinMaxScaler, MlpCore, StandardScaler,
                            TrainedRegressor, fit_isolation_forest,
                            path_lengths, predict, train_regressor)
from validopt.milp import (EQUAL, INFEASIBLE, MAXIMIZE, MINIMIZE, OPTIMAL,
                           MilpModel, SolverConfig, solve_milp)

LINE_X = np.array([[1.00], [1.75], [2.25], [3.00]])
LINE_Y = (LINE_X.ravel() - 1.75) ** 2


def identity_regressor(core, dim):
    return TrainedRegressor("mlp", MinMaxScaler(np.zeros(dim), np.ones(dim)),
                            StandardScaler(0.0, 1.0), core)


# -------------------------------------------------------------- linear

def test_linear_embedding_forces_the_regression_line():
    m = train_regressor("linear", (LINE_X, LINE_Y))
    status, val, _, emb = forced_output(m, [1.375], [0.0], [4.0])
    assert status == OPTIMAL
    assert val == pytest.approx(0.28125, abs=1e-9)
    assert emb.binaries == []
    # affine composition only: scale row, model row, unscale row
    assert len(emb.rows) == 3


def test_linear_embedding_matches_prediction_at_random_points():
    rng = np.random.default_rng(0)
    X = rng.uniform(-3, 5, size=(40, 3))
    y = X @ np.array([2.0, -1.0, 0.25]) + 3.0 + rng.normal(0, 0.1, 40)
    m = train_regressor("linear", (X, y))
    for x in rng.uniform(-3, 5, size=(10, 3)):
        status, val, _, _ = forced_output(m, x, [-3.0] * 3, [5.0] * 3)
        assert status == OPTIMAL
        assert val == pytest.approx(predict(m, x), abs=1e-6)


# --------------------------------------------------------------- trees

def test_depth_zero_tree_embeds_as_constant_without_binaries():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 2, size=(15, 2))
    y = rng.normal(size=15)
    m = train_regressor("tree", (X, y), max_depth=0)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 2.0) for _ in range(2)]
    emb = embed_regressor(m, xv, milp)
    assert emb.binaries == []
    milp.set_objective({emb.output_var: 1.0}, MINIMIZE)
    sol = solve_milp(milp, SolverConfig())
    assert sol.x[emb.output_var] == pytest.approx(y.mean(), abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_tree_embedding_matches_traversal_at_random_fixings(seed):
    # pin through equality rows so the box-wide big-M rows stay in play
    rng = np.random.default_rng(100 + seed)
    X = rng.uniform(-2, 2, size=(120, 2))
    y = np.sin(2 * X[:, 0]) + 0.5 * X[:, 1] ** 2
    m = train_regressor("tree", (X, y), max_depth=3)
    for x in rng.uniform(-2, 2, size=(25, 2)):
        status, val, _, _ = forced_output(m, x, [-2.0] * 2, [2.0] * 2,
                                          pin_rows=True)
        assert status == OPTIMAL
        assert val == pytest.approx(predict(m, x), abs=1e-6)


def test_tree_embedding_min_and_max_agree_at_a_fixed_point():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, size=(60, 2))
    y = X[:, 0] * 3 + X[:, 1]
    m = train_regressor("tree", (X, y), max_depth=4)
    x = [0.31, 0.77]
    _, lo_val, _, _ = forced_output(m, x, [0.0] * 2, [1.0] * 2, MINIMIZE)
    _, hi_val, _, _ = forced_output(m, x, [0.0] * 2, [1.0] * 2, MAXIMIZE)
    assert lo_val == pytest.approx(hi_val, abs=1e-6)
    assert lo_val == pytest.approx(predict(m, x), abs=1e-6)


def test_tree_one_hot_sums_to_one_in_solution():
    rng = np.random.default_rng(9)
    X = rng.uniform(-1, 1, size=(80, 2))
    y = X[:, 0] ** 2 + X[:, 1]
    m = train_regressor("tree", (X, y), max_depth=3)
    sol, xhat, emb = minimize_embedded(m, [-1.0, -1.0], [1.0, 1.0])
    assert sol.status == OPTIMAL
    zsum = sum(sol.x[z] for z in emb.binaries)
    assert zsum == pytest.approx(1.0, abs=1e-6)
    assert sol.x[emb.output_var] == pytest.approx(predict(m, xhat), abs=1e-6)


# ------------------------------------------------------------ ensembles

def test_forest_embedding_matches_prediction():
    rng = np.random.default_rng(2)
    X = rng.uniform(-2, 2, size=(100, 2))
    y = X[:, 0] ** 2 - X[:, 1]
    m = train_regressor("forest", (X, y), seed=3, n_trees=5, max_depth=3)
    for x in rng.uniform(-2, 2, size=(8, 2)):
        status, val, _, _ = forced_output(m, x, [-2.0] * 2, [2.0] * 2)
        assert status == OPTIMAL
        assert val == pytest.approx(predict(m, x), abs=1e-6)


def test_boosted_embedding_matches_prediction():
    rng = np.random.default_rng(3)
    X = rng.uniform(-2, 2, size=(100, 2))
    y = np.cos(X[:, 0]) + X[:, 1] ** 2
    m = train_regressor("boosted", (X, y), n_stages=6, learning_rate=0.2,
                        max_depth=2)
    for x in rng.uniform(-2, 2, size=(8, 2)):
        status, val, _, _ = forced_output(m, x, [-2.0] * 2, [2.0] * 2)
        assert status == OPTIMAL
        assert val == pytest.approx(predict(m, x), abs=1e-6)


def test_boosted_zero_rate_embeds_as_base_constant():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, size=(30, 2))
    y = rng.normal(2.0, 1.0, size=30)
    m = train_regressor("boosted", (X, y), n_stages=3, learning_rate=0.0)
    status, val, _, _ = forced_output(m, [0.4, 0.6], [0.0] * 2, [1.0] * 2)
    assert status == OPTIMAL
    assert val == pytest.approx(y.mean(), abs=1e-9)


# ------------------------------------------------------------------ mlp

def test_mlp_embedding_matches_prediction():
    rng = np.random.default_rng(6)
    X = rng.uniform(-1, 2, size=(200, 2))
    y = X[:, 0] ** 2 + np.sin(3 * X[:, 1])
    m = train_regressor("mlp", (X, y), seed=1, hidden=(6, 5), epochs=60)
    for i, x in enumerate(rng.uniform(-1, 2, size=(12, 2))):
        status, val, _, _ = forced_output(m, x, [-1.0] * 2, [2.0] * 2,
                                          pin_rows=bool(i % 2))
        assert status == OPTIMAL
        assert val == pytest.approx(predict(m, x), abs=1e-6)


def test_mlp_minimum_over_box_matches_fine_grid():
    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, size=(150, 2))
    y = (X[:, 0] - 0.3) ** 2 + (X[:, 1] + 0.2) ** 2
    m = train_regressor("mlp", (X, y), seed=2, hidden=(5, 5), epochs=80)
    sol, xhat, emb = minimize_embedded(m, [-1.0, -1.0], [1.0, 1.0])
    assert sol.status == OPTIMAL
    # the solver's point evaluates to its own reported output
    assert sol.x[emb.output_var] == pytest.approx(predict(m, xhat), abs=1e-6)
    g = np.linspace(-1, 1, 101)
    gx, gy = np.meshgrid(g, g)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    grid_min = m.predict(grid).min()
    assert sol.x[emb.output_var] <= grid_min + 1e-6


def test_stable_neurons_spend_no_binaries():
    # strongly positive biases keep every neuron active over the box
    core = MlpCore([np.array([[0.1, 0.1], [0.05, -0.05]]),
                    np.array([[1.0, 1.0]])],
                   [np.array([10.0, 10.0]), np.array([0.0])])
    m = identity_regressor(core, 2)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 1.0) for _ in range(2)]
    emb = embed_regressor(m, xv, milp)
    assert emb.binaries == []
    assert len(emb.activations) == 2


def test_propagated_and_loose_bounds_give_identical_optima(monkeypatch):
    rng = np.random.default_rng(8)
    X = rng.uniform(-1, 1, size=(120, 2))
    y = X[:, 0] * X[:, 1] + X[:, 0]
    m = train_regressor("mlp", (X, y), seed=3, hidden=(4, 4), epochs=60)
    sol_tight, _, _ = minimize_embedded(m, [-1.0, -1.0], [1.0, 1.0])

    original = embed_mod._intervals_from_scaled

    def inflated(core, a_lo, a_hi):
        return [(lo - 7.0, hi + 7.0) for lo, hi in original(core, a_lo, a_hi)]

    monkeypatch.setattr(embed_mod, "_intervals_from_scaled", inflated)
    sol_loose, _, _ = minimize_embedded(m, [-1.0, -1.0], [1.0, 1.0])
    assert sol_tight.status == OPTIMAL and sol_loose.status == OPTIMAL
    assert sol_tight.objective == pytest.approx(sol_loose.objective, abs=1e-6)


# ---------------------------------------------------- bound propagation

def test_propagate_bounds_zero_weights_pin_to_bias():
    core = MlpCore([np.zeros((3, 2)), np.zeros((1, 3))],
                   [np.array([1.0, -2.0, 0.5]), np.array([4.0])])
    m = identity_regressor(core, 2)
    intervals = propagate_bounds(m, (np.array([-5.0, -5.0]),
                                     np.array([5.0, 5.0])))
    np.testing.assert_allclose(intervals[0][0], [1.0, -2.0, 0.5])
    np.testing.assert_allclose(intervals[0][1], [1.0, -2.0, 0.5])
    np.testing.assert_allclose(intervals[1][0], [4.0])


def test_propagate_bounds_single_neuron_identity():
    core = MlpCore([np.array([[1.0]])], [np.array([0.0])])
    m = identity_regressor(core, 1)
    (lo, hi), = propagate_bounds(m, (np.array([-1.0]), np.array([2.0])))
    assert lo[0] == pytest.approx(-1.0) and hi[0] == pytest.approx(2.0)


def test_propagate_bounds_contain_sampled_preactivations():
    rng = np.random.default_rng(10)
    X = rng.uniform(-2, 3, size=(100, 2))
    y = np.tanh(X[:, 0]) + X[:, 1]
    m = train_regressor("mlp", (X, y), seed=5, hidden=(7, 6), epochs=40)
    box = (np.array([-2.0, -2.0]), np.array([3.0, 3.0]))
    intervals = propagate_bounds(m, box)
    pts = rng.uniform(-2.0, 3.0, size=(10000, 2))
    zs = m.core.forward(m.input_scaler.transform(pts))
    for (lo, hi), z in zip(intervals, zs):
        assert np.all(z >= lo - 1e-9)
        assert np.all(z <= hi + 1e-9)


def test_propagate_bounds_rejects_non_mlp():
    m = train_regressor("linear", (LINE_X, LINE_Y))
    with pytest.raises(ConfigError):
        propagate_bounds(m, (np.array([0.0]), np.array([4.0])))


# ------------------------------------------------------------ validation

def test_embed_rejects_unbounded_inputs_and_bad_dims():
    m = train_regressor("linear", (LINE_X, LINE_Y))
    milp = MilpModel()
    free = milp.add_var()  # unbounded
    with pytest.raises(ArgumentError):
        embed_regressor(m, [free], milp)
    milp2 = MilpModel()
    a = milp2.add_var(0, 1)
    b = milp2.add_var(0, 1)
    with pytest.raises(DimensionError):
        embed_regressor(m, [a, b], milp2)


def test_embed_rejects_unknown_kind():
    m = train_regressor("linear", (LINE_X, LINE_Y))
    fake = TrainedRegressor("other", m.input_scaler, m.output_scaler, m.core)
    milp = MilpModel()
    xv = milp.add_var(0, 4)
    with pytest.raises(ConfigError):
        embed_regressor(fake, [xv], milp)


def test_embedding_is_deterministic():
    rng = np.random.default_rng(11)
    X = rng.uniform(0, 1, size=(50, 2))
    y = X[:, 0] + X[:, 1] ** 2
    m = train_regressor("forest", (X, y), seed=1, n_trees=3, max_depth=2)
    dumps = []
    for _ in range(2):
        milp = MilpModel("same")
        xv = [milp.add_var(0.0, 1.0) for _ in range(2)]
        embed_regressor(m, xv, milp)
        dumps.append(milp.to_lp_string())
    assert dumps[0] == dumps[1]


# -------------------------------------------------------------- isofor

def _fix_and_solve(milp, x_vars, x):
    probe = milp.clone()
    for v, val in zip(x_vars, x):
        probe.add_constr({v: 1.0}, EQUAL, float(val))
    probe.set_objective({x_vars[0]: 1.0}, MINIMIZE)
    return solve_milp(probe, SolverConfig())


def test_isofor_threshold_zero_cuts_nothing():
    rng = np.random.default_rng(12)
    X = rng.uniform(0, 1, size=(60, 2))
    forest = fit_isolation_forest(X, n_trees=5, max_depth=4, subsample=32,
                                  seed=1)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 1.0) for _ in range(2)]
    block = embed_isofor_depth(forest, xv, 0, milp)
    assert not block.infeasible
    milp.set_objective({xv[0]: 1.0, xv[1]: 1.0}, MINIMIZE)
    sol = solve_milp(milp, SolverConfig())
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(0.0, abs=1e-7)  # corner reachable


def test_isofor_two_point_tree_infeasible_beyond_depth_one():
    X = np.array([[0.0, 0.0], [10.0, 10.0]])
    forest = fit_isolation_forest(X, n_trees=4, max_depth=2, subsample=2,
                                  seed=2)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 10.0) for _ in range(2)]
    block = embed_isofor_depth(forest, xv, 2, milp)
    assert block.infeasible
    milp.set_objective({xv[0]: 1.0}, MINIMIZE)
    assert solve_milp(milp, SolverConfig()).status == INFEASIBLE


def test_isofor_solutions_respect_depth_by_traversal():
    rng = np.random.default_rng(13)
    X = rng.normal(5.0, 0.6, size=(300, 2))
    forest = fit_isolation_forest(X, n_trees=8, max_depth=5, subsample=128,
                                  seed=3)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 10.0) for _ in range(2)]
    block = embed_isofor_depth(forest, xv, 5, milp)
    assert not block.infeasible
    milp.set_objective({xv[0]: 1.0, xv[1]: 0.5}, MINIMIZE)
    sol = solve_milp(milp, SolverConfig())
    assert sol.status == OPTIMAL
    xhat = np.array([sol.x[v] for v in xv])
    assert np.all(path_lengths(forest, xhat) >= 5)


def test_isofor_training_points_stay_feasible_and_outliers_drop_out():
    rng = np.random.default_rng(14)
    X = rng.normal(5.0, 0.5, size=(250, 2))
    forest = fit_isolation_forest(X, n_trees=6, max_depth=5, subsample=128,
                                  seed=4)
    milp = MilpModel()
    xv = [milp.add_var(-5.0, 15.0) for _ in range(2)]
    embed_isofor_depth(forest, xv, 5, milp)
    inside = X[rng.choice(250, 5, replace=False)]
    for x in inside:
        if np.all(path_lengths(forest, x) >= 5):
            assert _fix_and_solve(milp, xv, x).status == OPTIMAL
    outlier = np.array([-4.5, 14.5])
    if np.any(path_lengths(forest, outlier) < 5):
        assert _fix_and_solve(milp, xv, outlier).status == INFEASIBLE


def test_isofor_membership_agrees_with_traversal_on_a_sample():
    rng = np.random.default_rng(15)
    X = rng.normal(0.0, 1.0, size=(200, 2))
    forest = fit_isolation_forest(X, n_trees=5, max_depth=4, subsample=64,
                                  seed=5)
    milp = MilpModel()
    xv = [milp.add_var(-4.0, 4.0) for _ in range(2)]
    embed_isofor_depth(forest, xv, 4, milp)
    for x in rng.uniform(-4, 4, size=(12, 2)):
        want = bool(np.all(path_lengths(forest, x) >= 4))
        got = _fix_and_solve(milp, xv, x).status == OPTIMAL
        assert got == want


def test_isofor_threshold_validation():
    forest = fit_isolation_forest(np.zeros((3, 1)) + np.arange(3)[:, None],
                                  n_trees=2, max_depth=3, subsample=3)
    milp = MilpModel()
    xv = [milp.add_var(0.0, 2.0)]
    with pytest.raises(ArgumentError):
        embed_isofor_depth(forest, xv, 7, milp)
