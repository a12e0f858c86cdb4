import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnbench import common, datagen, error, graph, localsearch
from bnbench.datagen import Dataset, VarKind
from bnbench.graph import Dag
from bnbench.localsearch import Move, MoveKind, TabuList
from bnbench.scores import Likelihood, ScoreFamily, Scorer, ScoreKind

BIC = ScoreKind(ScoreFamily.BIC, Likelihood.MULTINOMIAL)


def common_cause() -> Dataset:
    """columns x, y, z with x <- z -> y; x and y agree with z 90% of rows."""
    rows = []
    for z in (0, 1):
        for x in (0, 1):
            for y in (0, 1):
                weight = (9 if x == z else 1) * (9 if y == z else 1)
                rows.extend([[x, y, z]] * weight)
    return Dataset(np.array(rows * 20), VarKind.BINARY)


def exhaustive_best(d: Dataset, kind: ScoreKind) -> float:
    scorer = Scorer(d, kind)
    return max(scorer.score(g) for g in graph.all_dags(d.n))


def test_tabu_list() -> None:
    tabu = TabuList(2)
    move = Move(MoveKind.REMOVE, 0, 1)
    tabu.add(move, 1)
    assert tabu.is_tabu(move, 1)
    assert tabu.is_tabu(move, 3)
    assert not tabu.is_tabu(move, 4)
    assert not tabu.is_tabu(Move(MoveKind.REMOVE, 1, 0), 2)
    tabu.expire(3)
    assert len(tabu) == 1
    tabu.expire(4)
    assert len(tabu) == 0
    with pytest.raises(error.UsageError):
        TabuList(0)


def test_neighborhood_order() -> None:
    dag = Dag.from_arcs(3, [(0, 1)])
    assert localsearch.neighborhood(dag) == [
        Move(MoveKind.ADD, 0, 2),
        Move(MoveKind.ADD, 1, 2),
        Move(MoveKind.ADD, 2, 0),
        Move(MoveKind.ADD, 2, 1),
        Move(MoveKind.REMOVE, 0, 1),
    ]


def test_neighborhood_excludes_cycles() -> None:
    dag = graph.random_dag(6, 0.6, np.random.default_rng(3))
    for move in localsearch.neighborhood(dag):
        assert dag.can_apply(move)


def test_hill_climb_independent_data_stays_empty() -> None:
    rows = [[(k >> bit) & 1 for bit in range(4)] for k in range(16)]
    d = Dataset(np.array(rows * 50), VarKind.BINARY)
    outcome = localsearch.hill_climb(d, BIC)
    assert outcome.dag.num_arcs == 0
    assert outcome.iterations == 0
    assert outcome.trace == (outcome.score,)


def test_hill_climb_reaches_exhaustive_best() -> None:
    d = common_cause()
    outcome = localsearch.hill_climb(d, BIC)
    assert outcome.dag.num_arcs == 2
    assert outcome.score == pytest.approx(exhaustive_best(d, BIC))
    assert not outcome.dag.has_arc(0, 1) and not outcome.dag.has_arc(1, 0)


def test_hill_climb_trace_strictly_increases() -> None:
    bn = datagen.generate_network(VarKind.BINARY, 6, 0.6, seed=2)
    d = datagen.forward_sample(bn, 300, np.random.default_rng(2))
    outcome = localsearch.hill_climb(d, BIC)
    assert len(outcome.trace) == outcome.iterations + 1
    assert all(b > a for a, b in zip(outcome.trace, outcome.trace[1:]))
    assert outcome.trace[-1] == pytest.approx(outcome.score)
    assert graph.is_acyclic(outcome.dag.adj)


def test_tabu_search_reaches_exhaustive_best() -> None:
    d = common_cause()
    outcome = localsearch.tabu_search(d, BIC)
    assert outcome.score == pytest.approx(exhaustive_best(d, BIC))
    assert outcome.score >= localsearch.hill_climb(d, BIC).score - 1e-9


def test_tabu_search_with_stall_limit_one_follows_hill_climb() -> None:
    bn = datagen.generate_network(VarKind.BINARY, 5, 0.6, seed=7)
    d = datagen.forward_sample(bn, 300, np.random.default_rng(7))
    hc = localsearch.hill_climb(d, BIC)
    ts = localsearch.tabu_search(d, BIC, stall_limit=1)
    assert ts.trace[: len(hc.trace)] == hc.trace
    assert ts.dag == hc.dag
    assert ts.score == pytest.approx(hc.score)


def test_tabu_search_never_below_hill_climb() -> None:
    for seed in range(5):
        bn = datagen.generate_network(VarKind.BINARY, 5, 0.8, seed=seed)
        d = datagen.forward_sample(bn, 100, np.random.default_rng(seed))
        hc = localsearch.hill_climb(d, BIC)
        ts = localsearch.tabu_search(d, BIC, tenure=3, stall_limit=10)
        assert ts.score >= hc.score - 1e-9
        trace = ts.trace
        assert all(b >= a for a, b in zip(trace, trace[1:]))


def test_tabu_search_gaussian_scores() -> None:
    bn = datagen.generate_network(VarKind.FOUR_LEVEL, 5, 0.6, seed=1)
    d = datagen.forward_sample(bn, 200, np.random.default_rng(1))
    kind = ScoreKind(ScoreFamily.AIC, Likelihood.GAUSSIAN)
    outcome = localsearch.tabu_search(d, kind, max_iters=30)
    assert outcome.iterations <= 30
    assert outcome.score == pytest.approx(Scorer(d, kind).score(outcome.dag))


def test_tabu_search_rejects_bad_limits() -> None:
    d = common_cause()
    with pytest.raises(error.UsageError):
        localsearch.tabu_search(d, BIC, stall_limit=0)
    with pytest.raises(error.UsageError):
        localsearch.tabu_search(d, BIC, tenure=0)


@pytest.mark.slow
def test_searches_match_exhaustive_best_on_three_nodes() -> None:
    hc_hits = ts_hits = 0
    trials = 200
    for seed in range(trials):
        density = 1.0 if seed % 2 else 0.6
        bn = datagen.generate_network(VarKind.BINARY, 3, density, seed=seed)
        d = datagen.forward_sample(bn, 1000, np.random.default_rng(seed))
        best = exhaustive_best(d, BIC)
        if localsearch.hill_climb(d, BIC).score >= best - 1e-9:
            hc_hits += 1
        if localsearch.tabu_search(d, BIC).score >= best - 1e-9:
            ts_hits += 1
    assert hc_hits >= 0.95 * trials
    assert ts_hits >= 0.90 * trials


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    kind=st.sampled_from(list(VarKind)),
    family=st.sampled_from(list(ScoreFamily)),
)
def test_search_trajectories_ignore_the_cache(
    seed: int, kind: VarKind, family: ScoreFamily
) -> None:
    bn = datagen.generate_network(kind, 5, 0.6, seed=seed)
    d = datagen.forward_sample(bn, 60, common.make_rng(seed))
    score = ScoreKind(family, Likelihood.for_kind(kind))

    cached = localsearch.hill_climb(d, score)
    uncached = localsearch.hill_climb(d, score, use_cache=False)
    assert uncached.trace == cached.trace
    assert uncached.dag == cached.dag

    cached = localsearch.tabu_search(d, score, stall_limit=10, max_iters=60)
    uncached = localsearch.tabu_search(
        d, score, stall_limit=10, max_iters=60, use_cache=False
    )
    assert uncached.trace == cached.trace
    assert uncached.iterations == cached.iterations
    assert uncached.dag == cached.dag
