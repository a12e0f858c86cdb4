import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.special import xlogy

from bnbench import common, error
from bnbench.datagen import Dataset, VarKind, joint_index

# |r| is capped below 1 so atanh stays finite.
MAX_ABS_CORRELATION = 1.0 - 1e-12
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    dof: int
    independent: bool
    # Set when the decision was made without a real test (sparse strata,
    # singular correlation matrix).
    degenerate: bool = False


class CiTest(enum.Enum):
    AUTO = "auto"
    G2 = "g2"
    FISHER_Z = "fisher-z"

    @classmethod
    def from_config_str(cls, config_str: str) -> "CiTest":
        for test in cls:
            if test.value == config_str:
                return test
        raise error.UsageError(f"invalid test {config_str!r}")


def _check_variables(d: Dataset, x: int, y: int, z: Sequence[int]) -> None:
    if x == y:
        raise error.UsageError(f"tested variable {x} against itself")
    if x in z or y in z:
        raise error.UsageError("conditioning set contains a tested variable")
    for v in (x, y, *z):
        if not 0 <= v < d.n:
            raise error.DimensionError(f"variable {v}", expected=(d.n,))


def _joint_counts(d: Dataset, x: int, y: int, z: Sequence[int]) -> np.ndarray:
    # Canonical order keeps the statistic exactly symmetric in x and y.
    if x > y:
        x, y = y, x
    arity = d.arity
    config, size = joint_index(d.values, z, arity)
    cells = (config * arity[x] + d.values[:, x]) * arity[y] + d.values[:, y]
    return np.bincount(cells, minlength=size * arity[x] * arity[y]).reshape(
        size, arity[x], arity[y]
    )


def _g2_statistic(counts: np.ndarray) -> float:
    """2 * sum N log(N N_z / (N_xz N_yz)) over cells with N > 0."""
    n_xz = counts.sum(axis=2)
    n_yz = counts.sum(axis=1)
    n_z = counts.sum(axis=(1, 2))
    total = (
        xlogy(counts, counts).sum()
        + xlogy(n_z, n_z).sum()
        - xlogy(n_xz, n_xz).sum()
        - xlogy(n_yz, n_yz).sum()
    )
    return max(0.0, 2.0 * float(total))


def g2_test(
    d: Dataset, x: int, y: int, z: Sequence[int], alpha: float
) -> CiResult:
    """G^2 likelihood-ratio test of x _||_ y | z on categorical data.

    When the degrees of freedom exceed m / 5 the strata are too sparse for a
    meaningful test and independence is declared.
    """
    _check_variables(d, x, y, z)
    arity = d.arity
    dof = (arity[x] - 1) * (arity[y] - 1)
    for v in z:
        dof *= arity[v]
    statistic = _g2_statistic(_joint_counts(d, x, y, z))
    if dof > d.m / 5.0:
        return CiResult(statistic, 1.0, dof, True, degenerate=True)
    p_value = float(stats.chi2.sf(statistic, dof))
    return CiResult(statistic, p_value, dof, p_value > alpha)


def fisher_z_test(
    d: Dataset, x: int, y: int, z: Sequence[int], alpha: float
) -> CiResult:
    """Fisher z test on the partial correlation of x and y given z.

    Four-level values are used as the reals 1..4.
    """
    _check_variables(d, x, y, z)
    k = len(z)
    effective = d.m - k - 3
    if effective <= 0:
        raise error.InsufficientDataError(
            f"fisher z needs more than {k + 3} rows, got {d.m}"
        )
    data = d.levels()[:, [x, y, *z]]
    degenerate = False
    r = 0.0
    if (data.std(axis=0) == 0).any():
        degenerate = True
    else:
        corr = np.corrcoef(data, rowvar=False)
        if k == 0:
            r = float(corr[0, 1])
        elif np.linalg.cond(corr) > MAX_CONDITION:
            degenerate = True
        else:
            precision = np.linalg.inv(corr)
            r = float(
                -precision[0, 1]
                / math.sqrt(precision[0, 0] * precision[1, 1])
            )
    r = min(max(r, -MAX_ABS_CORRELATION), MAX_ABS_CORRELATION)
    statistic = math.sqrt(effective) * math.atanh(r)
    p_value = float(2.0 * stats.norm.sf(abs(statistic)))
    return CiResult(
        statistic, p_value, effective, p_value > alpha, degenerate
    )


def conditional_mutual_information(
    d: Dataset, x: int, y: int, z: Sequence[int]
) -> float:
    """empirical I(x; y | z) in nats, from category counts."""
    _check_variables(d, x, y, z)
    return _g2_statistic(_joint_counts(d, x, y, z)) / (2.0 * d.m)


@dataclass(frozen=True)
class CiTestConfig:
    alpha: float = 0.05
    test: CiTest = CiTest.AUTO

    def resolve(self, d: Dataset) -> CiTest:
        if self.test is not CiTest.AUTO:
            return self.test
        if d.kind is VarKind.BINARY:
            return CiTest.G2
        return CiTest.FISHER_Z

    def run(self, d: Dataset, x: int, y: int, z: Sequence[int]) -> CiResult:
        if self.resolve(d) is CiTest.G2:
            result = g2_test(d, x, y, z, self.alpha)
        elif d.m - len(z) - 3 <= 0:
            # Too few rows to condition on z; nothing can be rejected.
            result = CiResult(0.0, 1.0, 0, True, degenerate=True)
        else:
            result = fisher_z_test(d, x, y, z, self.alpha)
        if result.degenerate:
            common.vvprint(
                f"Warning: degenerate test of {x}, {y} given {tuple(z)}"
            )
        return result
