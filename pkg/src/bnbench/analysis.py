"""Aggregation, pairwise comparisons and acceptance checks over results."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from bnbench import common, error
from bnbench.evaluate import MannWhitneyResult, Tail, mann_whitney_u
from bnbench.results import KEY_COLUMNS, FieldValue, RunResult

GROUP_FIELDS = KEY_COLUMNS

MEAN_METRICS = (
    "precision",
    "recall",
    "specificity",
    "accuracy",
    "hamming",
    "edges",
    "ms",
)

PLOT_METRICS = ("precision", "recall", "specificity", "accuracy", "hamming")

# Smallest p value printed as a number, as R does.
P_DISPLAY_FLOOR = 2.2e-16

Selector = Tuple[Tuple[str, FieldValue], ...]


def selector(**fields: FieldValue) -> Selector:
    for name in fields:
        if name not in GROUP_FIELDS:
            raise error.UsageError(f"cannot select on {name!r}")
    return tuple(sorted(fields.items(), key=lambda kv: kv[0]))


def describe(sel: Selector) -> str:
    return ",".join(f"{name}={value}" for name, value in sel) or "all"


def select(results: Sequence[RunResult], sel: Selector) -> List[RunResult]:
    return [
        r for r in results if all(r.field(name) == v for name, v in sel)
    ]


def metric_values(results: Sequence[RunResult], metric: str) -> List[float]:
    values = []
    for r in results:
        value = r.field(metric)
        if value == "":
            continue
        values.append(float(value))
    return values


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if values else math.nan


@dataclass(frozen=True)
class GroupMeans:
    key: Tuple[FieldValue, ...]
    count: int
    means: Dict[str, float]


def aggregate(
    results: Sequence[RunResult],
    group_by: Sequence[str],
    metrics: Sequence[str] = MEAN_METRICS,
) -> List[GroupMeans]:
    """mean of each metric per group, groups in ascending key order."""
    if not results:
        raise error.InsufficientDataError("no results to aggregate")
    for name in group_by:
        if name not in GROUP_FIELDS:
            raise error.UsageError(
                "cannot group by {!r} (choose from {})".format(
                    name, ", ".join(GROUP_FIELDS)
                )
            )
    groups: Dict[Tuple[Any, ...], List[RunResult]] = {}
    for r in results:
        key = tuple(r.field(name) for name in group_by)
        groups.setdefault(key, []).append(r)
    table = []
    for key in sorted(groups):
        members = groups[key]
        means = {}
        for metric in metrics:
            values = metric_values(members, metric)
            if values:
                means[metric] = _mean(values)
            else:
                common.warn(f"no {metric} values in group {key}")
        table.append(GroupMeans(key, len(members), means))
    return table


def format_aggregate(
    table: Sequence[GroupMeans],
    group_by: Sequence[str],
    metrics: Sequence[str] = MEAN_METRICS,
) -> str:
    header = list(group_by) + ["count"] + list(metrics)
    lines = ["\t".join(header)]
    for group in table:
        cells = [str(v) if v != "" else "-" for v in group.key]
        cells.append(str(group.count))
        for metric in metrics:
            value = group.means.get(metric)
            cells.append("-" if value is None else f"{value:.4f}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Comparison:
    label: str
    metric: str
    tail: Tail
    left: Selector
    right: Selector


@dataclass(frozen=True)
class ComparisonReport:
    comparison: Comparison
    left_count: int
    right_count: int
    left_mean: float
    right_mean: float
    test: MannWhitneyResult

    @property
    def p(self) -> float:
        return self.test.p

    def format_row(self) -> str:
        c = self.comparison
        if self.p < P_DISPLAY_FLOOR:
            p_text = f"< {P_DISPLAY_FLOOR}"
        else:
            p_text = f"{self.p:.3g}"
        return " | ".join(
            [
                c.label,
                c.metric,
                c.tail.value,
                p_text,
                f"{self.left_mean:.2f}",
                f"{self.right_mean:.2f}",
            ]
        )


def compare(
    results: Sequence[RunResult], comparison: Comparison
) -> ComparisonReport:
    """one-tailed Mann-Whitney test of the left group against the right."""
    sides = []
    for sel in (comparison.left, comparison.right):
        values = metric_values(select(results, sel), comparison.metric)
        if not values:
            raise error.SelectorError(describe(sel))
        sides.append(values)
    left, right = sides
    test = mann_whitney_u(left, right, comparison.tail)
    return ComparisonReport(
        comparison, len(left), len(right), _mean(left), _mean(right), test
    )


TABLE1: Tuple[Comparison, ...] = (
    Comparison(
        "density 0.4/0.8",
        "accuracy",
        Tail.GREATER,
        selector(density=0.4),
        selector(density=0.8),
    ),
    Comparison(
        "nodes 10/15",
        "accuracy",
        Tail.LESS,
        selector(nodes=10),
        selector(nodes=15),
    ),
    Comparison(
        "nodes 10/15",
        "hamming",
        Tail.LESS,
        selector(nodes=10),
        selector(nodes=15),
    ),
    Comparison(
        "discr./contin.",
        "accuracy",
        Tail.GREATER,
        selector(kind="binary"),
        selector(kind="four-level"),
    ),
    Comparison(
        "iamb/hc loglik",
        "sensitivity",
        Tail.LESS,
        selector(method="iamb"),
        selector(method="hc", score="loglik"),
    ),
    Comparison(
        "iamb/hc loglik",
        "specificity",
        Tail.GREATER,
        selector(method="iamb"),
        selector(method="hc", score="loglik"),
    ),
    Comparison(
        "ga/hc",
        "sensitivity",
        Tail.LESS,
        selector(method="ga"),
        selector(method="hc"),
    ),
    Comparison(
        "ga/hc",
        "specificity",
        Tail.GREATER,
        selector(method="ga"),
        selector(method="hc"),
    ),
)


def table1(results: Sequence[RunResult]) -> List[ComparisonReport]:
    """every summary comparison the results can support."""
    reports = []
    for comparison in TABLE1:
        try:
            reports.append(compare(results, comparison))
        except error.SelectorError as e:
            common.warn(
                f"skipping {comparison.label} {comparison.metric}: {e}"
            )
    return reports


def format_table1(reports: Sequence[ComparisonReport]) -> str:
    header = "comparison | metric | test | p-value | mean 1 | mean 2"
    return "\n".join([header] + [r.format_row() for r in reports]) + "\n"


@dataclass(frozen=True)
class AcceptanceCheck:
    name: str
    # None when the results lack the groups the check needs.
    passed: Optional[bool]
    detail: str


def _skipped(name: str, e: error.Error) -> AcceptanceCheck:
    return AcceptanceCheck(name, None, f"skipped: {e.message}")


def _detail(reports: Sequence[ComparisonReport]) -> str:
    return "; ".join(
        "{} {}: {:.3f} vs {:.3f}, p={:.3g}".format(
            r.comparison.label,
            r.comparison.metric,
            r.left_mean,
            r.right_mean,
            r.p,
        )
        for r in reports
    )


def _density_check(results: Sequence[RunResult]) -> AcceptanceCheck:
    name = "density effect on accuracy"
    try:
        r = compare(results, TABLE1[0])
    except error.SelectorError as e:
        return _skipped(name, e)
    passed = (
        r.left_mean > r.right_mean
        and r.p < 0.01
        and abs(r.left_mean - 0.68) <= 0.10
        and abs(r.right_mean - 0.55) <= 0.10
    )
    return AcceptanceCheck(name, passed, _detail([r]))


def _constraint_underfit_check(
    results: Sequence[RunResult],
) -> AcceptanceCheck:
    name = "iamb underfits against hc-loglik"
    try:
        sens = compare(results, TABLE1[4])
        spec = compare(results, TABLE1[5])
    except error.SelectorError as e:
        return _skipped(name, e)
    passed = (
        sens.left_mean < 0.15
        and sens.right_mean > 0.40
        and sens.p < 0.01
        and spec.left_mean > 0.85
        and spec.right_mean < 0.55
        and spec.p < 0.01
    )
    return AcceptanceCheck(name, passed, _detail([sens, spec]))


def _ga_check(results: Sequence[RunResult]) -> AcceptanceCheck:
    name = "ga reduces overfit against hc"
    try:
        sens = compare(results, TABLE1[6])
        spec = compare(results, TABLE1[7])
    except error.SelectorError as e:
        return _skipped(name, e)
    passed = (
        sens.left_mean < sens.right_mean
        and sens.p < 0.05
        and spec.left_mean > spec.right_mean
        and spec.p < 0.05
    )
    return AcceptanceCheck(name, passed, _detail([sens, spec]))


def _regularization_check(results: Sequence[RunResult]) -> AcceptanceCheck:
    name = "edge counts loglik > aic > bic"
    details = []
    passed = True
    for search in ("hc", "ts", "ga"):
        means = []
        for family in ("loglik", "aic", "bic"):
            values = metric_values(
                select(results, selector(method=search, score=family)),
                "edges",
            )
            if not values:
                return AcceptanceCheck(
                    name, None, f"skipped: no {search}-{family} results"
                )
            means.append(_mean(values))
        passed = passed and means[0] > means[1] > means[2]
        details.append(
            "{}: {:.2f} > {:.2f} > {:.2f}".format(search, *means)
        )
    return AcceptanceCheck(name, passed, "; ".join(details))


def _nodes_check(results: Sequence[RunResult]) -> AcceptanceCheck:
    name = "hamming grows with node count"
    try:
        r = compare(results, TABLE1[2])
    except error.SelectorError as e:
        return _skipped(name, e)
    passed = r.right_mean > r.left_mean and r.p < 0.05
    return AcceptanceCheck(name, passed, _detail([r]))


def _constraint_recall_check(
    results: Sequence[RunResult],
) -> AcceptanceCheck:
    name = "pc and iamb recall below hc-loglik"
    hc = metric_values(
        select(results, selector(method="hc", score="loglik")), "recall"
    )
    details = []
    passed = True
    for method in ("pc", "iamb"):
        values = metric_values(
            select(results, selector(method=method)), "recall"
        )
        if not values or not hc:
            return AcceptanceCheck(
                name, None, f"skipped: no {method} or hc-loglik results"
            )
        passed = passed and _mean(values) < _mean(hc)
        details.append(f"{method} {_mean(values):.3f}")
    details.append(f"hc-loglik {_mean(hc):.3f}")
    return AcceptanceCheck(name, passed, ", ".join(details))


def check_acceptance(results: Sequence[RunResult]) -> List[AcceptanceCheck]:
    return [
        _density_check(results),
        _constraint_underfit_check(results),
        _ga_check(results),
        _regularization_check(results),
        _nodes_check(results),
        _constraint_recall_check(results),
    ]


def format_acceptance(checks: Sequence[AcceptanceCheck]) -> str:
    lines = []
    for check in checks:
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[check.passed]
        lines.append(f"{status} {check.name}: {check.detail}")
    return "\n".join(lines) + "\n"


def write_plot_data(
    results: Sequence[RunResult],
    out_dir: Path,
    group_by: Sequence[str],
    metrics: Sequence[str] = PLOT_METRICS,
) -> List[Path]:
    """one long-format CSV (group, metric, value) per metric."""
    for name in group_by:
        if name not in GROUP_FIELDS:
            raise error.UsageError(f"cannot group by {name!r}")
    ordered = sorted(results, key=lambda r: r.sort_key)
    paths = []
    for metric in metrics:
        path = out_dir / f"{metric}.csv"
        with common.atomic_write_text(path) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["group", "metric", "value"])
            for r in ordered:
                value = r.field(metric)
                if value == "":
                    continue
                group = "/".join(str(r.field(name)) for name in group_by)
                writer.writerow([group or "all", metric, repr(float(value))])
        paths.append(path)
    return paths
