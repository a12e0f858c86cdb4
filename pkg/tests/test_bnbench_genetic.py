from typing import Dict, Tuple

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnbench import common, datagen, error, genetic, graph
from bnbench.datagen import Dataset, VarKind
from bnbench.genetic import GaConfig, GaVariant, Genome, MutationOp
from bnbench.graph import Dag
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
    return Dataset(np.array(rows * 10), VarKind.BINARY)


def weighted(n: int, arcs_weights: Dict[Tuple[int, int], float]) -> Genome:
    dag = Dag.from_arcs(n, arcs_weights)
    weights = np.zeros((n, n))
    for (i, j), w in arcs_weights.items():
        weights[i, j] = w
    return Genome(dag, weights)


def test_variant_and_ops() -> None:
    assert GaVariant.from_config_str("continuous") is GaVariant.CONTINUOUS
    with pytest.raises(error.UsageError):
        GaVariant.from_config_str("binary")
    assert MutationOp.for_variant(GaVariant.DISCRETE) == (
        MutationOp.ADD,
        MutationOp.REMOVE,
    )
    assert MutationOp.PERTURB in MutationOp.for_variant(GaVariant.CONTINUOUS)


def test_config_validation() -> None:
    with pytest.raises(error.ConfigurationError):
        GaConfig(population_size=0)
    with pytest.raises(error.ConfigurationError):
        GaConfig(mutation_probability=1.5)
    with pytest.raises(error.ConfigurationError):
        GaConfig(weight_gate=True)
    GaConfig(variant=GaVariant.CONTINUOUS, weight_gate=True)


def test_genome_validation() -> None:
    dag = Dag.from_arcs(3, [(0, 1)])
    with pytest.raises(error.DimensionError):
        Genome(dag, np.zeros((2, 2)))
    bad = np.zeros((3, 3))
    bad[1, 2] = 0.5
    with pytest.raises(error.GraphError):
        Genome(dag, bad)
    bad = np.zeros((3, 3))
    bad[0, 1] = 1.5
    with pytest.raises(error.GraphError):
        Genome(dag, bad)
    g = weighted(3, {(0, 1): 0.25})
    assert g.variant is GaVariant.CONTINUOUS
    assert g.weight(0, 1) == 0.25
    assert Genome(dag).weight(0, 1) is None


def test_ga_init_arc_counts() -> None:
    rng = common.make_rng(0)
    assert genetic.ga_init(10, GaVariant.DISCRETE, rng).dag.num_arcs == 5
    assert genetic.ga_init(15, GaVariant.DISCRETE, rng).dag.num_arcs == 7
    g = genetic.ga_init(10, GaVariant.CONTINUOUS, rng)
    assert g.weights is not None
    assert (g.weights[g.dag.adj] >= 0).all()
    assert not g.weights[~g.dag.adj].any()
    with pytest.raises(error.UsageError):
        genetic.ga_init(1, GaVariant.DISCRETE, rng)


def test_crossover_skips_cycle_closing_arcs() -> None:
    p1 = Genome(Dag.from_arcs(3, [(1, 0)]))
    p2 = Genome(Dag.from_arcs(3, [(0, 1), (0, 2)]))
    child = genetic.ga_crossover(p1, p2, common.make_rng(0))
    assert child.dag.arcs() == [(0, 2), (1, 0)]
    assert p1.dag.arcs() == [(1, 0)]


def test_crossover_copies_star_into_empty_parent() -> None:
    p1 = Genome(Dag.empty(3))
    p2 = Genome(Dag.from_arcs(3, [(1, 0), (1, 2)]))
    child = genetic.ga_crossover(p1, p2, common.make_rng(0))
    assert child.dag == p2.dag


def test_crossover_with_empty_second_parent() -> None:
    p1 = Genome(Dag.from_arcs(3, [(1, 0)]))
    child = genetic.ga_crossover(p1, Genome(Dag.empty(3)), common.make_rng(0))
    assert child is p1


def test_crossover_carries_weights() -> None:
    p1 = weighted(3, {(1, 0): 0.1})
    p2 = weighted(3, {(2, 0): 0.7})
    child = genetic.ga_crossover(p1, p2, common.make_rng(0))
    assert child.weight(1, 0) == 0.1
    assert child.weight(2, 0) == 0.7


def test_crossover_rejects_mismatched_parents() -> None:
    rng = common.make_rng(0)
    with pytest.raises(error.DimensionError):
        genetic.ga_crossover(Genome(Dag.empty(3)), Genome(Dag.empty(4)), rng)
    with pytest.raises(error.UsageError):
        genetic.ga_crossover(
            Genome(Dag.empty(2)), weighted(2, {(0, 1): 0.5}), rng
        )


def test_perturb_is_bounded() -> None:
    g = weighted(3, {(0, 1): 0.9, (1, 2): 0.2})
    out = genetic.perturb_arcs(g, [(0, 1), (1, 2)], [5.0, -1.0])
    assert out.weight(0, 1) == 1.0
    assert out.weight(1, 2) == 0.0
    assert out.dag == g.dag
    with pytest.raises(error.GraphError):
        genetic.perturb_arcs(g, [(2, 0)], [0.1])
    with pytest.raises(error.UsageError):
        genetic.perturb_arcs(Genome(g.dag), [(0, 1)], [0.1])


def test_mutation_no_ops() -> None:
    rng = common.make_rng(0)
    empty = Genome(Dag.empty(3))
    assert genetic.apply_mutation(empty, MutationOp.REMOVE, rng) is None
    assert genetic.apply_mutation(empty, MutationOp.PERTURB, rng) is None
    full = Genome(Dag.from_arcs(3, [(0, 1), (0, 2), (1, 2)]))
    assert genetic.apply_mutation(full, MutationOp.ADD, rng) is None
    never = GaConfig(mutation_probability=0.0)
    assert genetic.ga_mutate(full, never, rng) is full


def test_mutation_add_and_remove() -> None:
    rng = common.make_rng(3)
    g = Genome(Dag.from_arcs(4, [(0, 1)]))
    added = genetic.apply_mutation(g, MutationOp.ADD, rng)
    assert added is not None and added.dag.num_arcs == 2
    removed = genetic.apply_mutation(g, MutationOp.REMOVE, rng)
    assert removed is not None and removed.dag.num_arcs == 0
    w = weighted(4, {(0, 1): 0.4})
    removed_w = genetic.apply_mutation(w, MutationOp.REMOVE, rng)
    assert removed_w is not None and removed_w.weights is not None
    assert not removed_w.weights.any()


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    n=st.integers(min_value=2, max_value=8),
    steps=st.integers(min_value=1, max_value=30),
)
def test_mutations_keep_genomes_acyclic(seed: int, n: int, steps: int) -> None:
    rng = common.make_rng(seed)
    config = GaConfig(mutation_probability=1.0, variant=GaVariant.CONTINUOUS)
    g = genetic.ga_init(n, GaVariant.CONTINUOUS, rng)
    for _ in range(steps):
        g = genetic.ga_mutate(g, config, rng)
        assert graph.is_acyclic(g.dag.adj)
        assert g.weights is not None
        assert (g.weights >= 0).all() and (g.weights <= 1).all()
        assert not g.weights[~g.dag.adj].any()


def test_tournament_select() -> None:
    rng = common.make_rng(1)
    assert genetic.tournament_select([1.0, 5.0, 3.0], 50, rng) == 1
    assert genetic.tournament_select([2.0, 2.0], 50, rng) == 0
    assert genetic.tournament_select([7.0], 3, rng) == 0


def test_weight_gate() -> None:
    g = weighted(3, {(0, 1): 0.3, (1, 2): 0.8})
    assert g.scored_dag().arcs() == [(0, 1), (1, 2)]
    assert g.scored_dag(weight_gate=True).arcs() == [(1, 2)]


def test_ga_evolve_trace_and_outcome() -> None:
    bn = datagen.generate_network(VarKind.BINARY, 5, 0.6, seed=3)
    d = datagen.forward_sample(bn, 200, common.make_rng(3))
    config = GaConfig(population_size=20, generations=15)
    outcome = genetic.ga_evolve(d, BIC, config, common.make_rng(3))
    assert outcome.iterations == 15
    assert len(outcome.trace) == 16
    assert all(b >= a for a, b in zip(outcome.trace, outcome.trace[1:]))
    assert outcome.score == pytest.approx(outcome.trace[-1])
    assert outcome.score == pytest.approx(Scorer(d, BIC).score(outcome.dag))
    assert graph.is_acyclic(outcome.dag.adj)


def test_ga_evolve_is_reproducible() -> None:
    d = common_cause()
    config = GaConfig(population_size=10, generations=5)
    a = genetic.ga_evolve(d, BIC, config, common.make_rng(8))
    b = genetic.ga_evolve(d, BIC, config, common.make_rng(8))
    assert a.dag == b.dag
    assert a.trace == b.trace


def test_ga_evolve_continuous_with_weight_gate() -> None:
    d = common_cause()
    config = GaConfig(
        population_size=15,
        generations=10,
        variant=GaVariant.CONTINUOUS,
        weight_gate=True,
    )
    outcome = genetic.ga_evolve(d, BIC, config, common.make_rng(2))
    assert outcome.score == pytest.approx(Scorer(d, BIC).score(outcome.dag))


def test_ga_evolve_ignores_the_cache() -> None:
    bn = datagen.generate_network(VarKind.BINARY, 5, 0.6, seed=2)
    d = datagen.forward_sample(bn, 80, common.make_rng(2))
    config = GaConfig(population_size=10, generations=8)
    cached = genetic.ga_evolve(d, BIC, config, common.make_rng(5))
    uncached = genetic.ga_evolve(
        d, BIC, config, common.make_rng(5), use_cache=False
    )
    assert uncached.trace == cached.trace
    assert uncached.dag == cached.dag


def test_ga_evolve_finds_exhaustive_best() -> None:
    d = common_cause()
    scorer = Scorer(d, BIC)
    best = max(scorer.score(g) for g in graph.all_dags(3))
    config = GaConfig(population_size=40, generations=40)
    hits = 0
    for seed in range(5):
        outcome = genetic.ga_evolve(d, BIC, config, common.make_rng(seed))
        if outcome.score == pytest.approx(best, abs=1e-6):
            hits += 1
    assert hits >= 4


@pytest.mark.slow
def test_ga_evolve_finds_exhaustive_best_across_seeds() -> None:
    d = common_cause()
    scorer = Scorer(d, BIC)
    best = max(scorer.score(g) for g in graph.all_dags(3))
    hits = 0
    for seed in range(50):
        outcome = genetic.ga_evolve(d, BIC, GaConfig(), common.make_rng(seed))
        if abs(outcome.score - best) <= 1e-6:
            hits += 1
    assert hits >= 45
