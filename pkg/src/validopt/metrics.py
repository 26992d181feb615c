"""Error metrics for surrogate optima and their tabular aggregation.

Four errors describe how a surrogate optimum (x_hat, y_hat, v_hat) relates
to the underlying truth: the gap between the predicted and true response at
x_hat, the gap to the true optimal value, the distance to the true
minimizer, and the constraint violation of the true response at x_hat.
Aggregation normalizes every domain's statistic by the plain bounding-box
domain so tables read as "fraction of the box error".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .bench import get_ground_truth
from .errors import ArgumentError, DataError, DimensionError
from .milp import OPTIMAL

BOX_DOMAIN = "box"

METRIC_FIELDS = (
    "function_value_error",
    "optimal_value_error",
    "optimal_solution_error",
    "feasibility_error",
)

CSV_COLUMNS = (
    "function", "rule", "n_samples", "sigma", "seed", "ml", "domain",
    "function_value_error", "optimal_value_error",
    "optimal_solution_error", "feasibility_error",
    "status", "setup_seconds", "solve_seconds",
)


@dataclass(frozen=True)
class ErrorRecord:
    """Errors of one solved instance; metric fields are None off-optimum."""

    status: str
    function_value_error: Optional[float] = None
    optimal_value_error: Optional[float] = None
    optimal_solution_error: Optional[float] = None
    feasibility_error: Optional[float] = None
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL


def compute_errors(x_hat, y_hat, v_hat, truth, theta=None,
                   status: str = OPTIMAL, setup_seconds: float = 0.0,
                   solve_seconds: float = 0.0) -> ErrorRecord:
    """Score one optimum against a known ground truth.

    x_hat, y_hat, v_hat come from the solver; truth supplies the noiseless
    response and the reference optimum.  theta, when given, maps a response
    vector to constraint values with the convention "feasible iff <= 0";
    its hinge at the true response becomes the feasibility error.  A
    non-optimal status yields a record whose metric fields are all None.
    """
    if isinstance(truth, str):
        truth = get_ground_truth(truth)
    if status != OPTIMAL:
        return ErrorRecord(status=status, setup_seconds=setup_seconds,
                           solve_seconds=solve_seconds)
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    y_hat = np.atleast_1d(np.asarray(y_hat, dtype=float))
    h_at = np.atleast_1d(truth.value(x_hat))
    if y_hat.shape != h_at.shape:
        raise DimensionError(
            f"predicted response has shape {y_hat.shape}, truth gives {h_at.shape}")
    feas = None
    if theta is not None:
        viol = np.atleast_1d(np.asarray(theta(h_at), dtype=float))
        feas = float(np.linalg.norm(np.maximum(viol, 0.0)))
    record = ErrorRecord(
        status=status,
        function_value_error=float(np.linalg.norm(y_hat - h_at)),
        optimal_value_error=float(abs(float(v_hat) - truth.v_star)),
        optimal_solution_error=float(np.linalg.norm(x_hat - truth.x_star)),
        feasibility_error=feas,
        setup_seconds=setup_seconds,
        solve_seconds=solve_seconds,
    )
    for name in METRIC_FIELDS:
        value = getattr(record, name)
        if value is not None and not np.isfinite(value):
            raise DataError(f"{name} is not finite at an optimal status")
    return record


def record_to_csv_row(meta: Mapping[str, object], record: ErrorRecord) -> dict:
    """One flat CSV row: provenance fields, then metrics and timings."""
    row = {key: meta.get(key, "") for key in CSV_COLUMNS[:7]}
    for name in METRIC_FIELDS:
        value = getattr(record, name)
        row[name] = "" if value is None else repr(float(value))
    row["status"] = record.status
    row["setup_seconds"] = repr(float(record.setup_seconds))
    row["solve_seconds"] = repr(float(record.solve_seconds))
    return row


# ------------------------------------------------------------ aggregation

@dataclass(frozen=True)
class TableCell:
    """One Box-normalized table entry."""

    group: tuple
    domain: str
    statistic: Optional[float]        # raw median or mean of the metric
    relative: Optional[float]         # statistic / box statistic
    is_minimum: bool = False
    box_zero: bool = False
    n_used: int = 0
    n_dropped: int = 0


_STATS: dict[str, Callable[[np.ndarray], float]] = {
    "median": lambda v: float(np.median(v)),
    "mean": lambda v: float(np.mean(v)),
}


def aggregate(rows: Iterable[Mapping[str, object]],
              metric: str = "function_value_error",
              statistic: str = "median",
              group_keys: Sequence[str] = ("function", "rule", "n_samples",
                                           "sigma", "ml"),
              domain_key: str = "domain") -> list[TableCell]:
    """Collapse per-seed rows into Box-normalized cells.

    Rows are dicts (CSV rows or richer); records whose metric is missing
    (failed solves) are dropped and counted.  Every group must contain the
    box domain; when its statistic is zero the ratios are flagged rather
    than divided.  Per group, the smallest raw statistic is marked on every
    domain attaining it.
    """
    if statistic not in _STATS:
        raise ArgumentError(f"unknown statistic {statistic!r}")
    if metric not in METRIC_FIELDS:
        raise ArgumentError(f"unknown metric {metric!r}")
    stat_fn = _STATS[statistic]

    groups: dict[tuple, dict[str, list]] = {}
    dropped: dict[tuple, dict[str, int]] = {}
    for row in rows:
        key = tuple(row.get(k) for k in group_keys)
        domain = str(row[domain_key])
        value = row.get(metric)
        if value in (None, ""):
            dropped.setdefault(key, {}).setdefault(domain, 0)
            dropped[key][domain] += 1
            continue
        groups.setdefault(key, {}).setdefault(domain, []).append(float(value))

    cells: list[TableCell] = []
    for key in groups:
        by_domain = groups[key]
        if BOX_DOMAIN not in by_domain:
            raise DataError(f"group {key} lacks the {BOX_DOMAIN!r} domain")
        stats = {d: stat_fn(np.asarray(v)) for d, v in by_domain.items()}
        box_stat = stats[BOX_DOMAIN]
        best = min(stats.values())
        for domain in sorted(stats):
            stat = stats[domain]
            if box_stat == 0.0:
                rel, flagged = None, True
            else:
                rel, flagged = stat / box_stat, False
            cells.append(TableCell(
                group=key, domain=domain, statistic=stat, relative=rel,
                is_minimum=(stat == best), box_zero=flagged,
                n_used=len(by_domain[domain]),
                n_dropped=dropped.get(key, {}).get(domain, 0)))
    return cells


def markdown_table(cells: Sequence[TableCell], group_keys: Sequence[str],
                   digits: int = 2) -> str:
    """Render cells as one markdown table, minima in bold.

    Rows are groups, columns are domains in first-seen order.  Flagged
    cells (zero box statistic) print the raw statistic with a dagger.
    """
    domains: list[str] = []
    for cell in cells:
        if cell.domain not in domains:
            domains.append(cell.domain)
    by_group: dict[tuple, dict[str, TableCell]] = {}
    for cell in cells:
        by_group.setdefault(cell.group, {})[cell.domain] = cell

    header = list(group_keys) + domains
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    for group in sorted(by_group, key=lambda g: tuple(str(v) for v in g)):
        parts = [str(v) for v in group]
        for domain in domains:
            cell = by_group[group].get(domain)
            if cell is None:
                parts.append("")
                continue
            if cell.box_zero:
                text = f"{cell.statistic:.{digits}e}†"
            else:
                text = f"{cell.relative:.{digits}f}"
            if cell.n_dropped:
                text += f" ({cell.n_dropped} dropped)"
            parts.append(f"**{text}**" if cell.is_minimum else text)
        lines.append("| " + " | ".join(parts) + " |")
    return "\n".join(lines) + "\n"


# --------------------------------------------------- ratio distributions

@dataclass(frozen=True)
class RatioStats:
    """Shape of an error-ratio distribution on the log10 scale."""

    n: int
    n_excluded_zero_denominator: int
    n_excluded_nonpositive: int
    fraction_below_one: float
    skewness: float
    kurtosis: float
    histogram_counts: np.ndarray = field(repr=False)
    histogram_edges: np.ndarray = field(repr=False)


def ratio_distribution_stats(numerators, denominators,
                             bins: int = 20) -> RatioStats:
    """Elementwise error ratios and their log10-scale moments.

    Pairs with a zero denominator are excluded (counted).  The share
    strictly below one is taken over all remaining ratios; the moments and
    histogram are computed on log10 of the strictly positive ratios, with
    zero-numerator pairs counted separately.  Kurtosis is the plain fourth
    standardized moment, 3 for a normal sample.
    """
    num = np.asarray(numerators, dtype=float).ravel()
    den = np.asarray(denominators, dtype=float).ravel()
    if num.shape != den.shape:
        raise DimensionError("ratio inputs must have equal length")
    keep = den != 0.0
    n_zero_den = int(np.count_nonzero(~keep))
    if not keep.any():
        raise DataError("every denominator is zero; no ratios to describe")
    ratios = num[keep] / den[keep]
    positive = ratios > 0.0
    n_nonpos = int(np.count_nonzero(~positive))
    logs = np.log10(ratios[positive])
    if logs.size == 0:
        raise DataError("no positive ratios; log-scale moments undefined")
    centered = logs - logs.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        skew, kurt = 0.0, 0.0
    else:
        skew = float(np.mean(centered ** 3)) / m2 ** 1.5
        kurt = float(np.mean(centered ** 4)) / m2 ** 2
    counts, edges = np.histogram(logs, bins=bins)
    return RatioStats(
        n=int(ratios.size),
        n_excluded_zero_denominator=n_zero_den,
        n_excluded_nonpositive=n_nonpos,
        fraction_below_one=float(np.mean(ratios < 1.0)),
        skewness=skew,
        kurtosis=kurt,
        histogram_counts=counts,
        histogram_edges=edges,
    )


__all__ = [
    "BOX_DOMAIN", "CSV_COLUMNS", "METRIC_FIELDS", "ErrorRecord", "TableCell",
    "RatioStats", "aggregate", "compute_errors", "markdown_table",
    "ratio_distribution_stats", "record_to_csv_row",
]
