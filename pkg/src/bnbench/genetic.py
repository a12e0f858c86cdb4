"""Genetic algorithm over DAG connectivity matrices.

Individuals encode the adjacency matrix of a network; the continuous
variant also carries a weight in [0, 1] for every present arc. Fitness is
the structure score of the individual's graph. With the optional weight
gate only arcs weighing more than 0.5 are scored.
"""

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bnbench import common, error, graph
from bnbench.datagen import Dataset
from bnbench.graph import Arc, Dag
from bnbench.localsearch import SearchOutcome
from bnbench.scores import FamilyScoreCache, Scorer, ScoreKind

WEIGHT_GATE_THRESHOLD = 0.5


class GaVariant(enum.Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"

    @classmethod
    def from_config_str(cls, config_str: str) -> "GaVariant":
        for variant in cls:
            if variant.value == config_str:
                return variant
        raise error.UsageError(f"invalid GA variant {config_str!r}")

    def to_config_str(self) -> str:
        return self.value


class MutationOp(enum.Enum):
    ADD = "add"
    REMOVE = "remove"
    PERTURB = "perturb"

    @staticmethod
    def for_variant(variant: GaVariant) -> Tuple["MutationOp", ...]:
        if variant is GaVariant.CONTINUOUS:
            return (MutationOp.ADD, MutationOp.REMOVE, MutationOp.PERTURB)
        return (MutationOp.ADD, MutationOp.REMOVE)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 100
    tournament_size: int = 3
    mutation_probability: float = 0.25
    variant: GaVariant = GaVariant.DISCRETE
    # Score only arcs whose weight exceeds 0.5 (continuous variant).
    weight_gate: bool = False

    def __post_init__(self) -> None:
        for name in ("population_size", "generations", "tournament_size"):
            if getattr(self, name) < 1:
                raise error.ConfigurationError(
                    f"GA {name} {getattr(self, name)} below 1"
                )
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise error.ConfigurationError(
                f"mutation probability {self.mutation_probability} "
                "not in [0, 1]"
            )
        if self.weight_gate and self.variant is not GaVariant.CONTINUOUS:
            raise error.ConfigurationError(
                "weight gate needs the continuous variant"
            )


@dataclass(frozen=True, eq=False)
class Genome:
    dag: Dag
    # n x n, zero wherever the dag has no arc; None for the discrete variant.
    weights: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        if self.weights is None:
            return
        w = np.array(self.weights, dtype=float)
        if w.shape != self.dag.adj.shape:
            raise error.DimensionError(
                "genome weights",
                expected=self.dag.adj.shape,
                actual=w.shape,
            )
        if (w < 0.0).any() or (w > 1.0).any():
            raise error.GraphError("genome weight outside [0, 1]")
        if w[~self.dag.adj].any():
            raise error.GraphError("weight on an absent arc")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.dag.n

    @property
    def variant(self) -> GaVariant:
        if self.weights is None:
            return GaVariant.DISCRETE
        return GaVariant.CONTINUOUS

    def weight(self, src: int, dst: int) -> Optional[float]:
        if self.weights is None:
            return None
        return float(self.weights[src, dst])

    def scored_dag(self, weight_gate: bool = False) -> Dag:
        if not weight_gate or self.weights is None:
            return self.dag
        return Dag(self.weights > WEIGHT_GATE_THRESHOLD, check=False)


def _genome(adj: np.ndarray, weights: Optional[np.ndarray]) -> Genome:
    return Genome(Dag(adj, check=False), weights)


def _addable_arcs(adj: np.ndarray) -> List[Arc]:
    reach = graph.reachability(adj)
    n = adj.shape[0]
    return [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and not adj[i, j] and not reach[j, i]
    ]


def ga_init(n: int, variant: GaVariant, rng: np.random.Generator) -> Genome:
    """random genome with exactly n // 2 arcs.

    Endpoints are drawn uniformly and re-drawn until the arc is new and
    keeps the graph acyclic.
    """
    if n < 2:
        raise error.UsageError("genetic search needs at least 2 variables")
    adj = np.zeros((n, n), dtype=bool)
    weights = None if variant is GaVariant.DISCRETE else np.zeros((n, n))
    added = 0
    while added < n // 2:
        i, j = (int(v) for v in rng.integers(n, size=2))
        if i == j or adj[i, j] or graph.creates_cycle(adj, i, j):
            continue
        adj[i, j] = True
        if weights is not None:
            weights[i, j] = rng.random()
        added += 1
    return _genome(adj, weights)


def ga_crossover(
    p1: Genome, p2: Genome, rng: np.random.Generator
) -> Genome:
    """copy of p1 plus the outgoing arcs of one random source node of p2.

    Arcs that would close a cycle are skipped. When p2 has no arcs the
    offspring is p1 itself.
    """
    if p1.n != p2.n:
        raise error.DimensionError(
            "crossover parents", expected=(p1.n,), actual=(p2.n,)
        )
    if p1.variant is not p2.variant:
        raise error.UsageError("crossover between different GA variants")
    sources = [v for v in range(p2.n) if p2.dag.children(v)]
    if not sources:
        return p1
    k = sources[int(rng.integers(len(sources)))]
    adj = p1.dag.adj.copy()
    weights = None if p1.weights is None else p1.weights.copy()
    for c in p2.dag.children(k):
        if adj[k, c] or graph.creates_cycle(adj, k, c):
            continue
        adj[k, c] = True
        if weights is not None and p2.weights is not None:
            weights[k, c] = p2.weights[k, c]
    return _genome(adj, weights)


def perturb_arcs(
    g: Genome, arcs: Sequence[Arc], deltas: Sequence[float]
) -> Genome:
    """add deltas to the weights of present arcs, bounding to [0, 1]."""
    if g.weights is None:
        raise error.UsageError("perturbation needs a weighted genome")
    if len(arcs) != len(deltas):
        raise error.DimensionError(
            "perturbation", expected=(len(arcs),), actual=(len(deltas),)
        )
    weights = g.weights.copy()
    for (i, j), delta in zip(arcs, deltas):
        if not g.dag.has_arc(i, j):
            raise error.GraphError(f"cannot perturb absent arc {i} -> {j}")
        weights[i, j] = min(max(weights[i, j] + delta, 0.0), 1.0)
    return Genome(g.dag, weights)


def apply_mutation(
    g: Genome, op: MutationOp, rng: np.random.Generator
) -> Optional[Genome]:
    """apply one operator; None when it has nothing to act on."""
    adj = g.dag.adj
    if op is MutationOp.ADD:
        candidates = _addable_arcs(adj)
        if not candidates:
            return None
        i, j = candidates[int(rng.integers(len(candidates)))]
        new_adj = adj.copy()
        new_adj[i, j] = True
        weights = None if g.weights is None else g.weights.copy()
        if weights is not None:
            weights[i, j] = rng.random()
        return _genome(new_adj, weights)
    arcs = g.dag.arcs()
    if not arcs:
        return None
    if op is MutationOp.REMOVE:
        i, j = arcs[int(rng.integers(len(arcs)))]
        new_adj = adj.copy()
        new_adj[i, j] = False
        weights = None if g.weights is None else g.weights.copy()
        if weights is not None:
            weights[i, j] = 0.0
        return _genome(new_adj, weights)
    if g.weights is None:
        return None
    count = min(len(arcs), g.n // 2)
    if count == 0:
        return None
    chosen = rng.choice(len(arcs), size=count, replace=False)
    deltas = rng.normal(0.0, 1.0, size=count)
    return perturb_arcs(
        g, [arcs[int(k)] for k in chosen], [float(x) for x in deltas]
    )


def ga_mutate(
    g: Genome, config: GaConfig, rng: np.random.Generator
) -> Genome:
    if rng.random() >= config.mutation_probability:
        return g
    ops = MutationOp.for_variant(g.variant)
    op = ops[int(rng.integers(len(ops)))]
    mutated = apply_mutation(g, op, rng)
    if mutated is None:
        common.vvprint(f"[ga] {op.value} mutation had nothing to act on")
        return g
    return mutated


def tournament_select(
    fitness: Sequence[float], size: int, rng: np.random.Generator
) -> int:
    """index of the fittest of `size` uniform draws (with replacement)."""
    entrants = [int(i) for i in rng.integers(len(fitness), size=size)]
    return max(entrants, key=lambda i: (fitness[i], -i))


def ga_evolve(
    d: Dataset,
    score: ScoreKind,
    config: GaConfig,
    rng: np.random.Generator,
    *,
    cache: Optional[FamilyScoreCache] = None,
    use_cache: bool = True,
) -> SearchOutcome:
    """generational GA with tournament selection and elitism.

    Each generation draws `population_size` parent pairs, producing one
    offspring per pair by crossover then mutation; the worst offspring is
    replaced by the best individual of the previous generation. The trace
    holds the best fitness of the initial population and of every
    generation.
    """
    scorer = Scorer(d, score, cache=cache, use_cache=use_cache)

    def fitness_of(g: Genome) -> float:
        return scorer.score(g.scored_dag(config.weight_gate))

    population = [
        ga_init(d.n, config.variant, rng)
        for _ in range(config.population_size)
    ]
    fitness = [fitness_of(g) for g in population]
    elite = int(np.argmax(fitness))
    best, best_fitness = population[elite], fitness[elite]
    trace = [best_fitness]
    for generation in range(1, config.generations + 1):
        offspring = []
        for _ in range(config.population_size):
            p1 = population[
                tournament_select(fitness, config.tournament_size, rng)
            ]
            p2 = population[
                tournament_select(fitness, config.tournament_size, rng)
            ]
            offspring.append(
                ga_mutate(ga_crossover(p1, p2, rng), config, rng)
            )
        offspring_fitness = [fitness_of(g) for g in offspring]
        worst = int(np.argmin(offspring_fitness))
        offspring[worst] = population[elite]
        offspring_fitness[worst] = fitness[elite]
        population, fitness = offspring, offspring_fitness
        elite = int(np.argmax(fitness))
        if fitness[elite] > best_fitness:
            best, best_fitness = population[elite], fitness[elite]
        trace.append(fitness[elite])
        common.vvprint(f"[ga] generation {generation}: {fitness[elite]:.6f}")
    return SearchOutcome(
        best.scored_dag(config.weight_gate),
        best_fitness,
        config.generations,
        tuple(trace),
    )
