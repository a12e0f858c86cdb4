"""Decomposable structure scores: log-likelihood, AIC and BIC.

Every score is a sum of per-family terms ``ll(X | pa(X)) - w * dim(X)``
with ``w`` equal to 0 (loglik), 1 (AIC) or ``log(m) / 2`` (BIC). Scores are
maximized. Binary data uses the multinomial likelihood at the MLE; four-level
data is treated as reals 1..4 and uses the linear-Gaussian likelihood.
"""

import enum
import math
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy

from bnbench import error
from bnbench.datagen import Dataset, VarKind, joint_index
from bnbench.graph import Dag, Move, MoveKind

VARIANCE_FLOOR = 1e-6

FamilyKey = Tuple[int, Tuple[int, ...]]


class ScoreFamily(enum.Enum):
    LOGLIK = "loglik"
    AIC = "aic"
    BIC = "bic"

    @classmethod
    def from_config_str(cls, config_str: str) -> "ScoreFamily":
        for family in cls:
            if family.value == config_str:
                return family
        raise error.UsageError(f"invalid score {config_str!r}")


class Likelihood(enum.Enum):
    MULTINOMIAL = "multinomial"
    GAUSSIAN = "gaussian"

    @classmethod
    def for_kind(cls, kind: VarKind) -> "Likelihood":
        if kind is VarKind.BINARY:
            return cls.MULTINOMIAL
        return cls.GAUSSIAN


@dataclass(frozen=True)
class ScoreKind:
    family: ScoreFamily
    likelihood: Likelihood

    @staticmethod
    def for_dataset(family: ScoreFamily, d: Dataset) -> "ScoreKind":
        return ScoreKind(family, Likelihood.for_kind(d.kind))

    def check(self, d: Dataset) -> None:
        if self.likelihood is not Likelihood.for_kind(d.kind):
            raise error.ConfigurationError(
                "{} likelihood does not fit {} data".format(
                    self.likelihood.value, d.kind.value
                )
            )

    def __str__(self) -> str:
        return f"{self.family.value}/{self.likelihood.value}"


def family_loglik_multinomial(
    d: Dataset, node: int, parents: Sequence[int]
) -> float:
    """sum over configs c and values x of N_xc * log(N_xc / N_c)."""
    arity = d.arity
    config, size = joint_index(d.values, parents, arity)
    cells = config * arity[node] + d.values[:, node]
    counts = np.bincount(cells, minlength=size * arity[node]).reshape(
        size, arity[node]
    )
    totals = counts.sum(axis=1)
    return float(xlogy(counts, counts).sum() - xlogy(totals, totals).sum())


def family_loglik_gaussian(
    d: Dataset, node: int, parents: Sequence[int]
) -> float:
    """OLS of the node on its parents; -(m/2)(log(2 pi s2) + 1)."""
    x = d.levels()
    y = x[:, node]
    design = np.column_stack([np.ones(d.m)] + [x[:, p] for p in parents])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    variance = max(float(np.mean(resid**2)), VARIANCE_FLOOR)
    return -(d.m / 2.0) * (math.log(2.0 * math.pi * variance) + 1.0)


def family_dim(
    d: Dataset, node: int, parents: Sequence[int], likelihood: Likelihood
) -> int:
    if likelihood is Likelihood.GAUSSIAN:
        # coefficients + intercept + variance
        return len(parents) + 2
    arity = d.arity
    configs = 1
    for p in parents:
        configs *= arity[p]
    return (arity[node] - 1) * configs


def penalty_weight(family: ScoreFamily, m: int) -> float:
    if family is ScoreFamily.LOGLIK:
        return 0.0
    if family is ScoreFamily.AIC:
        return 1.0
    return math.log(m) / 2.0


class FamilyScoreCache:
    """(node, parents) -> family score.

    Lookups may race with insertions from other threads; an entry is only
    published once its value is complete.
    """

    def __init__(self) -> None:
        self._scores: Dict[FamilyKey, float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: FamilyKey) -> Optional[float]:
        value = self._scores.get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, key: FamilyKey, value: float) -> float:
        with self._lock:
            return self._scores.setdefault(key, value)

    def __len__(self) -> int:
        return len(self._scores)


class Scorer:
    def __init__(
        self,
        d: Dataset,
        kind: ScoreKind,
        *,
        cache: Optional[FamilyScoreCache] = None,
        use_cache: bool = True,
        weight: Optional[float] = None,
    ) -> None:
        kind.check(d)
        self.data = d
        self.kind = kind
        self.weight = (
            penalty_weight(kind.family, d.m) if weight is None else weight
        )
        if use_cache:
            self.cache: Optional[FamilyScoreCache] = (
                cache if cache is not None else FamilyScoreCache()
            )
        else:
            self.cache = None

    def _compute(self, node: int, parents: Tuple[int, ...]) -> float:
        if self.kind.likelihood is Likelihood.MULTINOMIAL:
            ll = family_loglik_multinomial(self.data, node, parents)
        else:
            ll = family_loglik_gaussian(self.data, node, parents)
        dim = family_dim(self.data, node, parents, self.kind.likelihood)
        return ll - self.weight * dim

    def family_score(self, node: int, parents: Sequence[int]) -> float:
        key = (node, tuple(sorted(parents)))
        if self.cache is None:
            return self._compute(*key)
        value = self.cache.get(key)
        if value is None:
            value = self.cache.put(key, self._compute(*key))
        return value

    def score(self, dag: Dag) -> float:
        if dag.n != self.data.n:
            raise error.DimensionError(
                "score", expected=(self.data.n,), actual=(dag.n,)
            )
        return sum(
            self.family_score(node, dag.parents(node))
            for node in range(dag.n)
        )

    def delta(self, dag: Dag, move: Move) -> float:
        """score(dag.apply(move)) - score(dag); touches one family."""
        if not dag.can_apply(move):
            raise error.RejectedMoveError(move, "not applicable")
        return self.move_delta(dag, move)

    def move_delta(self, dag: Dag, move: Move) -> float:
        """`delta` for a move the caller already knows to be applicable."""
        old = dag.parents(move.dst)
        if move.kind is MoveKind.ADD:
            new = tuple(sorted(old + (move.src,)))
        else:
            new = tuple(p for p in old if p != move.src)
        return self.family_score(move.dst, new) - self.family_score(
            move.dst, old
        )


def loglik_multinomial(d: Dataset, g: Dag) -> float:
    return sum(
        family_loglik_multinomial(d, node, g.parents(node))
        for node in range(g.n)
    )


def loglik_gaussian(d: Dataset, g: Dag) -> float:
    return sum(
        family_loglik_gaussian(d, node, g.parents(node))
        for node in range(g.n)
    )


def dim(d: Dataset, g: Dag, lik: Likelihood) -> int:
    return sum(
        family_dim(d, node, g.parents(node), lik) for node in range(g.n)
    )


def loglik(d: Dataset, g: Dag, lik: Likelihood) -> float:
    if lik is Likelihood.MULTINOMIAL:
        return loglik_multinomial(d, g)
    return loglik_gaussian(d, g)


def bic(d: Dataset, g: Dag, lik: Likelihood) -> float:
    return loglik(d, g, lik) - math.log(d.m) / 2.0 * dim(d, g, lik)


def aic(d: Dataset, g: Dag, lik: Likelihood) -> float:
    return loglik(d, g, lik) - dim(d, g, lik)


def delta_score(scorer: Scorer, dag: Dag, move: Move) -> float:
    return scorer.delta(dag, move)
