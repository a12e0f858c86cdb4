"""Structural metrics of a learned graph and the Mann-Whitney U test."""

import enum
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy import stats

from bnbench import error
from bnbench.graph import Dag

# Exact U distribution up to this many observations in the smaller sample.
EXACT_MAX_SIZE = 8


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise error.UsageError(f"negative count in {self}")

    @property
    def pairs(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def hamming(self) -> int:
        return self.fp + self.fn


def confusion(truth: Dag, learned: Dag) -> Confusion:
    """compare arcs over all ordered pairs (i, j) with i != j."""
    if truth.n != learned.n:
        raise error.DimensionError(
            "confusion", expected=(truth.n,), actual=(learned.n,)
        )
    off_diagonal = ~np.eye(truth.n, dtype=bool)
    t = truth.adj & off_diagonal
    g = learned.adj & off_diagonal
    tp = int((t & g).sum())
    fp = int((~t & g).sum())
    fn = int((t & ~g).sum())
    tn = int(off_diagonal.sum()) - tp - fp - fn
    return Confusion(tp, fp, tn, fn)


def _ratio(numerator: int, denominator: int) -> float:
    # An empty denominator means nothing could go wrong.
    if denominator == 0:
        return 1.0
    return numerator / denominator


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    specificity: float
    accuracy: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
        }


def metrics(c: Confusion) -> Metrics:
    """precision, recall (sensitivity), specificity and accuracy."""
    return Metrics(
        precision=_ratio(c.tp, c.tp + c.fp),
        recall=_ratio(c.tp, c.tp + c.fn),
        specificity=_ratio(c.tn, c.tn + c.fp),
        accuracy=_ratio(c.tp + c.tn, c.pairs),
    )


def edges(c: Confusion) -> int:
    """number of arcs in the learned graph."""
    return c.tp + c.fp


class Tail(enum.Enum):
    LESS = "less"
    GREATER = "greater"

    @classmethod
    def from_config_str(cls, config_str: str) -> "Tail":
        for tail in cls:
            if tail.value == config_str:
                return tail
        raise error.UsageError(f"invalid tail {config_str!r}")


@dataclass(frozen=True)
class MannWhitneyResult:
    # U of the first sample: pairs (x, y) with x > y, ties counting 1/2.
    u: float
    p: float
    exact: bool
    degenerate: bool = False


def _subset_sum_counts(values: np.ndarray, k: int) -> np.ndarray:
    """counts[s] = number of k-subsets of `values` (non-negative ints)
    summing to s. Counts are floats; only their ratios are used."""
    total = int(np.sort(values)[-k:].sum()) if k else 0
    counts = np.zeros((k + 1, total + 1))
    counts[0, 0] = 1.0
    for v in map(int, values):
        for size in range(k, 0, -1):
            if v == 0:
                counts[size] += counts[size - 1]
            else:
                counts[size, v:] += counts[size - 1, :-v]
    return counts[k]


def _exact_p(doubled_ranks: np.ndarray, na: int, tail: Tail) -> float:
    nb = len(doubled_ranks) - na
    first_is_small = na <= nb
    k = na if first_is_small else nb
    small = doubled_ranks[:na] if first_is_small else doubled_ranks[na:]
    observed = int(small.sum())
    counts = _subset_sum_counts(doubled_ranks, k)
    # U of the first sample grows with its rank sum and shrinks with the
    # rank sum of the second.
    want_low = (tail is Tail.LESS) == first_is_small
    if want_low:
        hits = counts[: observed + 1].sum()
    else:
        hits = counts[observed:].sum()
    return float(min(1.0, hits / counts.sum()))


def _normal_p(
    u: float, na: int, nb: int, ranks: np.ndarray, tail: Tail
) -> float:
    size = na + nb
    _, ties = np.unique(ranks, return_counts=True)
    tie_term = float((ties**3 - ties).sum()) / (size * (size - 1))
    variance = na * nb / 12.0 * ((size + 1) - tie_term)
    mean = na * nb / 2.0
    sd = math.sqrt(variance)
    if tail is Tail.LESS:
        return float(stats.norm.cdf((u - mean + 0.5) / sd))
    return float(stats.norm.sf((u - mean - 0.5) / sd))


def mann_whitney_u(
    a: Sequence[float], b: Sequence[float], tail: Tail
) -> MannWhitneyResult:
    """one-tailed Mann-Whitney U test of a against b.

    `Tail.LESS` tests whether a tends to be smaller than b. Ties get
    midranks. The p value is exact when the smaller sample has at most
    EXACT_MAX_SIZE values, otherwise it uses the normal approximation with
    tie-corrected variance and continuity correction.
    """
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        raise error.InsufficientDataError("Mann-Whitney needs two samples")
    pooled = np.concatenate(
        [np.asarray(a, dtype=float), np.asarray(b, dtype=float)]
    )
    ranks = stats.rankdata(pooled)
    u = float(ranks[:na].sum()) - na * (na + 1) / 2.0
    exact = min(na, nb) <= EXACT_MAX_SIZE
    if np.all(pooled == pooled[0]):
        return MannWhitneyResult(u, 0.5, exact, degenerate=True)
    if exact:
        doubled = np.rint(2.0 * ranks).astype(int)
        p = _exact_p(doubled, na, tail)
    else:
        p = _normal_p(u, na, nb, ranks, tail)
    return MannWhitneyResult(u, p, exact)
