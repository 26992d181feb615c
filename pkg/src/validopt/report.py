"""Turn result CSVs into markdown tables, ratio statistics, and figures.

The tables reconstruct the benchmark layout: one block per design-option
group, one column family per validity domain, each statistic scaled so the
box domain reads 1.00.  The ratio summary pairs extended-hull records with
plain-hull records seed by seed and reports the distribution of their
log ratios, plus a histogram figure and a median bar figure per metric.
"""

from __future__ import annotations

import csv
import os
from collections import Counter
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError
from .metrics import (CSV_COLUMNS, METRIC_FIELDS, aggregate, markdown_table,
                      ratio_distribution_stats)

GROUP_KEYS = ("function", "rule", "n_samples", "sigma", "ml")
PAIR_KEYS = GROUP_KEYS + ("seed",)


def read_result_rows(paths: Sequence[str]) -> list[dict]:
    """Load and concatenate result CSVs, verifying the schema first."""
    rows: list[dict] = []
    for path in paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for column in CSV_COLUMNS:
                if column not in header:
                    raise DataError(
                        f"{path} lacks required column '{column}'")
            rows.extend(reader)
    if not rows:
        raise DataError("no data rows in the given CSVs")
    return rows


def metric_ratio_pairs(rows: Sequence[Mapping[str, object]],
                       metric: str = "function_value_error",
                       numerator: str = "ch_plus",
                       denominator: str = "ch"):
    """Per-seed metric values of two domains, aligned for ratio statistics."""
    table: dict[tuple, dict[str, float]] = {}
    for row in rows:
        domain = str(row["domain"])
        if domain not in (numerator, denominator):
            continue
        value = row.get(metric)
        if value in (None, ""):
            continue
        key = tuple(row.get(k) for k in PAIR_KEYS)
        table.setdefault(key, {})[domain] = float(value)
    nums, dens = [], []
    for pair in table.values():
        if numerator in pair and denominator in pair:
            nums.append(pair[numerator])
            dens.append(pair[denominator])
    return np.asarray(nums), np.asarray(dens)


def _render_ratio_histogram(stats, numerator, denominator, metric, path):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    edges = np.asarray(stats.histogram_edges)
    counts = np.asarray(stats.histogram_counts)
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge",
           color="#4878a8", edgecolor="white")
    ax.axvline(0.0, color="#c44e52", linewidth=1.2)
    ax.set_xlabel(f"log10( {numerator} / {denominator} ), {metric}")
    ax.set_ylabel("pairs")
    ax.set_title(f"{numerator} vs {denominator}: "
                 f"{stats.fraction_below_one:.0%} of pairs below 1")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_median_bars(rows, metrics, statistic, path):
    fig, axes = plt.subplots(1, len(metrics),
                             figsize=(3.4 * len(metrics), 3.4),
                             squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        cells = aggregate(rows, metric=metric, statistic=statistic,
                          group_keys=GROUP_KEYS)
        per_domain: dict[str, list[float]] = {}
        for cell in cells:
            if cell.relative is not None:
                per_domain.setdefault(cell.domain, []).append(cell.relative)
        domains = sorted(per_domain)
        heights = [float(np.median(per_domain[d])) for d in domains]
        ax.bar(range(len(domains)), heights, color="#4878a8")
        ax.axhline(1.0, color="#c44e52", linewidth=1.0)
        ax.set_xticks(range(len(domains)))
        ax.set_xticklabels(domains, rotation=45, ha="right", fontsize=8)
        ax.set_title(metric.replace("_", " "), fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_report(csv_paths: Sequence[str], out_dir: str,
                statistic: str = "median",
                ratio_numerator: str = "ch_plus",
                ratio_denominator: str = "ch") -> dict:
    """Aggregate result CSVs into tables, a summary, and PNG figures.

    Groups are Box-normalized, so every design-option group present must
    include the box domain.  Returns the written paths under the keys
    "tables", "figures", and "summary".
    """
    rows = read_result_rows(csv_paths)
    os.makedirs(out_dir, exist_ok=True)

    tables, with_data = [], []
    for metric in METRIC_FIELDS:
        present = [r for r in rows if r.get(metric) not in (None, "")]
        if not present:
            continue
        with_data.append(metric)
        cells = aggregate(rows, metric=metric, statistic=statistic,
                          group_keys=GROUP_KEYS)
        path = os.path.join(out_dir, f"table_{metric}.md")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {statistic} {metric.replace('_', ' ')}, "
                     "relative to the box domain\n\n")
            fh.write(markdown_table(cells, GROUP_KEYS))
        tables.append(path)

    figures = []
    if with_data:
        bars = os.path.join(out_dir, "medians_by_domain.png")
        _render_median_bars(rows, with_data, statistic, bars)
        figures.append(bars)

    ratio_lines = []
    nums, dens = metric_ratio_pairs(rows, numerator=ratio_numerator,
                                    denominator=ratio_denominator)
    stats = None
    if nums.size:
        stats = ratio_distribution_stats(nums, dens)
        hist = os.path.join(out_dir, "ratio_histogram.png")
        _render_ratio_histogram(stats, ratio_numerator, ratio_denominator,
                                "function_value_error", hist)
        figures.append(hist)
        ratio_lines = [
            f"- pairs: {stats.n}",
            f"- fraction below one: {stats.fraction_below_one:.4f}",
            f"- log10-ratio skewness: {stats.skewness:.4f}",
            f"- log10-ratio kurtosis: {stats.kurtosis:.4f}",
            f"- excluded (zero denominator): "
            f"{stats.n_excluded_zero_denominator}",
            f"- excluded from moments (nonpositive ratio): "
            f"{stats.n_excluded_nonpositive}",
        ]

    statuses = Counter(str(r.get("status")) for r in rows)
    summary = os.path.join(out_dir, "summary.md")
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write("# Result summary\n\n")
        fh.write(f"- input files: {len(csv_paths)}\n")
        fh.write(f"- rows: {len(rows)}\n")
        for status in sorted(statuses):
            fh.write(f"- status {status}: {statuses[status]}\n")
        fh.write("\n## Tables\n\n")
        for path in tables:
            fh.write(f"- {os.path.basename(path)}\n")
        fh.write("\n## Figures\n\n")
        for path in figures:
            fh.write(f"- {os.path.basename(path)}\n")
        fh.write(f"\n## {ratio_numerator} / {ratio_denominator} "
                 "function value error ratios\n\n")
        if ratio_lines:
            fh.write("\n".join(ratio_lines) + "\n")
        else:
            fh.write("- no paired records\n")

    return {"tables": tables, "figures": figures, "summary": summary}


__all__ = ["emit_report", "metric_ratio_pairs", "read_result_rows"]
