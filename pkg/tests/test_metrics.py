"""Tests for error metrics, Box-normalized aggregation and ratio stats."""

import numpy as np
import pytest

from validopt.bench import get_ground_truth
from validopt.errors import ArgumentError, DataError, DimensionError
from validopt.metrics import (CSV_COLUMNS, ErrorRecord, aggregate,
                              compute_errors, markdown_table,
                              ratio_distribution_stats, record_to_csv_row)
from validopt.milp import INFEASIBLE, OPTIMAL


def test_scoring_the_true_optimum_yields_all_zeros():
    truth = get_ground_truth("beale")
    rec = compute_errors(truth.x_star, truth.v_star, truth.v_star, truth,
                         theta=lambda y: y - truth.v_star)
    assert rec.function_value_error == 0.0
    assert rec.optimal_value_error == 0.0
    assert rec.optimal_solution_error == 0.0
    assert rec.feasibility_error == 0.0
    assert rec.solved


def test_scalar_errors_reduce_to_absolute_differences():
    truth = get_ground_truth("beale")
    x = np.array([1.0, 1.0])
    h = truth.value(x)
    rec = compute_errors(x, h + 1.5, truth.v_star - 2.0, "beale")
    assert rec.function_value_error == pytest.approx(1.5)
    assert rec.optimal_value_error == pytest.approx(2.0)
    assert rec.optimal_solution_error == pytest.approx(
        np.linalg.norm(x - truth.x_star))
    assert rec.feasibility_error is None


def test_feasibility_error_is_the_hinge_at_the_cap():
    # theta(y) = y - 1 with a true response of 1.2 violates by 0.2
    truth = get_ground_truth("beale")
    x = truth.x_star
    h = truth.value(x)
    cap = h - 0.2
    rec = compute_errors(x, h, truth.v_star, truth, theta=lambda y: y - cap)
    assert rec.feasibility_error == pytest.approx(0.2)
    slack = compute_errors(x, h, truth.v_star, truth,
                           theta=lambda y: y - (h + 5.0))
    assert slack.feasibility_error == 0.0


def test_failed_solve_carries_status_and_no_numbers():
    rec = compute_errors(None, None, None, "beale", status=INFEASIBLE,
                         solve_seconds=0.5)
    assert rec.status == INFEASIBLE and not rec.solved
    assert rec.function_value_error is None
    assert rec.optimal_value_error is None
    assert rec.optimal_solution_error is None
    assert rec.feasibility_error is None
    assert rec.solve_seconds == 0.5


def test_mismatched_response_width_is_rejected():
    with pytest.raises(DimensionError):
        compute_errors([1.0, 1.0], [1.0, 2.0], 0.0, "beale")


def test_csv_row_has_all_columns_and_blank_missing_metrics():
    meta = {"function": "beale", "rule": "uniform", "n_samples": 500,
            "sigma": 0.1, "seed": 2023, "ml": "mlp", "domain": "ch_plus"}
    rec = ErrorRecord(status=OPTIMAL, function_value_error=0.25,
                      optimal_value_error=1.0, optimal_solution_error=2.0,
                      feasibility_error=None, solve_seconds=0.125)
    row = record_to_csv_row(meta, rec)
    assert tuple(row) == CSV_COLUMNS
    assert row["function_value_error"] == "0.25"
    assert row["feasibility_error"] == ""
    assert row["solve_seconds"] == "0.125"


# ------------------------------------------------------------ aggregation

def rows_for(values_by_domain, **meta):
    rows = []
    for domain, values in values_by_domain.items():
        for v in values:
            row = {"function": "f", "rule": "r", "n_samples": 10,
                   "sigma": 0.0, "ml": "m", "domain": domain,
                   "function_value_error": v}
            row.update(meta)
            rows.append(row)
    return rows


def cell_map(cells):
    return {c.domain: c for c in cells}


def test_identical_domains_all_read_one():
    cells = cell_map(aggregate(rows_for({"box": [2.0, 4.0],
                                         "ch": [4.0, 2.0]})))
    assert cells["box"].relative == 1.0
    assert cells["ch"].relative == 1.0
    assert cells["box"].is_minimum and cells["ch"].is_minimum


def test_quarter_ratio_is_marked_minimum():
    cells = cell_map(aggregate(rows_for({"box": [2.0, 2.0],
                                         "ch": [3.0],
                                         "ch_plus": [0.5, 0.5]})))
    assert cells["ch_plus"].relative == pytest.approx(0.25)
    assert cells["ch_plus"].is_minimum
    assert not cells["box"].is_minimum
    assert cells["box"].relative == 1.0


def test_median_ignores_a_heavy_tail():
    cells = cell_map(aggregate(rows_for({"box": [1.0, 2.0, 100.0]})))
    assert cells["box"].statistic == 2.0
    mean_cells = cell_map(aggregate(rows_for({"box": [1.0, 2.0, 100.0]}),
                                    statistic="mean"))
    assert mean_cells["box"].statistic == pytest.approx(103.0 / 3)


def test_median_cells_survive_outlier_inflation():
    base = {"box": [1.0, 2.0, 3.0], "ch": [0.5, 1.5, 9.0]}
    inflated = {"box": [1.0, 2.0, 3000.0], "ch": [0.5, 1.5, 9e6]}
    a = cell_map(aggregate(rows_for(base)))
    b = cell_map(aggregate(rows_for(inflated)))
    assert a["ch"].relative == b["ch"].relative


def test_failed_records_are_dropped_and_counted():
    rows = rows_for({"box": [2.0, 2.0], "ch": [1.0]})
    rows.append({"function": "f", "rule": "r", "n_samples": 10, "sigma": 0.0,
                 "ml": "m", "domain": "ch", "function_value_error": None})
    cells = cell_map(aggregate(rows))
    assert cells["ch"].n_used == 1
    assert cells["ch"].n_dropped == 1
    assert cells["box"].n_dropped == 0


def test_zero_box_statistic_is_flagged_not_divided():
    cells = cell_map(aggregate(rows_for({"box": [0.0, 0.0], "ch": [1.0]})))
    assert cells["ch"].box_zero and cells["ch"].relative is None
    assert cells["ch"].statistic == 1.0


def test_group_without_box_is_an_error():
    with pytest.raises(DataError):
        aggregate(rows_for({"ch": [1.0]}))


def test_aggregate_validates_names():
    with pytest.raises(ArgumentError):
        aggregate([], statistic="mode")
    with pytest.raises(ArgumentError):
        aggregate([], metric="happiness")


def test_groups_stay_separate():
    rows = rows_for({"box": [1.0], "ch": [0.5]}, function="f")
    rows += rows_for({"box": [4.0], "ch": [8.0]}, function="g")
    cells = aggregate(rows)
    by_key = {(c.group[0], c.domain): c for c in cells}
    assert by_key[("f", "ch")].relative == pytest.approx(0.5)
    assert by_key[("g", "ch")].relative == pytest.approx(2.0)


def test_markdown_table_bolds_minima_and_flags():
    rows = rows_for({"box": [2.0, 2.0], "ch": [0.5]})
    text = markdown_table(aggregate(rows),
                          group_keys=("function", "rule", "n_samples",
                                      "sigma", "ml"))
    assert "**0.25**" in text
    assert "| 1.00 |" in text
    flagged = markdown_table(aggregate(rows_for({"box": [0.0], "ch": [1.0]})),
                             group_keys=("function",))
    assert "†" in flagged


# --------------------------------------------------- ratio distributions

def test_equal_errors_give_unit_ratios():
    errs = [1.0, 2.0, 3.0]
    stats = ratio_distribution_stats(errs, errs)
    assert stats.fraction_below_one == 0.0
    assert stats.n == 3
    assert stats.skewness == 0.0


def test_log_symmetric_ratios_have_zero_skewness():
    stats = ratio_distribution_stats([0.1, 1.0, 10.0], [1.0, 1.0, 1.0])
    assert stats.skewness == pytest.approx(0.0, abs=1e-12)
    assert stats.fraction_below_one == pytest.approx(1.0 / 3.0)


def test_normal_log_ratios_have_kurtosis_three():
    rng = np.random.default_rng(0)
    logs = rng.normal(size=100_000)
    stats = ratio_distribution_stats(10.0 ** logs, np.ones(100_000))
    assert stats.kurtosis == pytest.approx(3.0, abs=0.1)
    assert stats.skewness == pytest.approx(0.0, abs=0.05)
    assert stats.fraction_below_one == pytest.approx(0.5, abs=0.01)


def test_zero_denominators_are_excluded_and_counted():
    stats = ratio_distribution_stats([1.0, 2.0, 3.0], [0.0, 1.0, 1.0])
    assert stats.n == 2
    assert stats.n_excluded_zero_denominator == 1
    with pytest.raises(DataError):
        ratio_distribution_stats([1.0], [0.0])


def test_zero_numerators_count_toward_fraction_but_not_moments():
    stats = ratio_distribution_stats([0.0, 1.0, 4.0], [2.0, 2.0, 2.0])
    assert stats.fraction_below_one == pytest.approx(2.0 / 3.0)
    assert stats.n_excluded_nonpositive == 1


def test_histogram_covers_the_log_ratios():
    stats = ratio_distribution_stats([0.1, 1.0, 10.0], [1.0, 1.0, 1.0],
                                     bins=4)
    assert stats.histogram_counts.sum() == 3
    assert stats.histogram_edges[0] == pytest.approx(-1.0)
    assert stats.histogram_edges[-1] == pytest.approx(1.0)


def test_ratio_inputs_must_align():
    with pytest.raises(DimensionError):
        ratio_distribution_stats([1.0, 2.0], [1.0])
