"""Constraint-based learners (PC, IAMB) and PDAG resolution.

Both learners produce a partially directed graph; `resolve_pdag` turns it
into one random DAG consistent with the directed part, so the learners can
be compared with score-based searches that return DAGs.
"""

import itertools
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np

from bnbench import common, error, graph
from bnbench.citest import CiTestConfig, conditional_mutual_information
from bnbench.datagen import Dataset
from bnbench.graph import Arc, Dag, Pdag


class SepsetTable:
    """separating set per unordered pair of non-adjacent variables."""

    def __init__(self) -> None:
        self._sets: Dict[FrozenSet[int], Tuple[int, ...]] = {}

    def record(self, x: int, y: int, sepset: Tuple[int, ...]) -> None:
        self._sets[frozenset((x, y))] = tuple(sorted(sepset))

    def get(self, x: int, y: int) -> Optional[Tuple[int, ...]]:
        return self._sets.get(frozenset((x, y)))

    def __contains__(self, pair: Tuple[int, int]) -> bool:
        return frozenset(pair) in self._sets

    def __iter__(self) -> Iterator[Tuple[Tuple[int, int], Tuple[int, ...]]]:
        for pair, sepset in sorted(
            self._sets.items(), key=lambda kv: sorted(kv[0])
        ):
            x, y = sorted(pair)
            yield (x, y), sepset

    def __len__(self) -> int:
        return len(self._sets)


def _require_two_variables(d: Dataset, learner: str) -> None:
    if d.n < 2:
        raise error.UsageError(f"{learner} needs at least 2 variables")


def pc_skeleton(
    d: Dataset, test: CiTestConfig, max_level: Optional[int] = None
) -> Tuple[np.ndarray, SepsetTable]:
    """PC edge removal over conditioning sets of size 0, 1, ..., n-2.

    `max_level` caps the conditioning set size.
    """
    n = d.n
    adj = ~np.eye(n, dtype=bool)
    sepsets = SepsetTable()
    levels = n - 1 if max_level is None else min(n - 1, max_level + 1)
    for level in range(levels):
        if all(adj[x].sum() - 1 < level for x in range(n)):
            break
        for x, y in itertools.permutations(range(n), 2):
            if not adj[x, y]:
                continue
            others = [int(v) for v in np.flatnonzero(adj[x]) if v != y]
            if len(others) < level:
                continue
            for cond in itertools.combinations(others, level):
                if test.run(d, x, y, cond).independent:
                    adj[x, y] = adj[y, x] = False
                    sepsets.record(x, y, cond)
                    common.vvprint(f"[pc] removed {x} - {y} | {cond}")
                    break
    return adj, sepsets


def _orient(
    directed: np.ndarray, undirected: np.ndarray, a: int, b: int
) -> bool:
    """orient undirected a - b as a -> b unless that closes a cycle."""
    if not undirected[a, b] or graph.creates_cycle(directed, a, b):
        return False
    directed[a, b] = True
    undirected[a, b] = undirected[b, a] = False
    return True


def orient_v_structures(
    skeleton: np.ndarray, sepsets: SepsetTable
) -> Pdag:
    """orient x -> z <- y for non-adjacent x, y whose sepset excludes z.

    Orientations conflicting with earlier ones are skipped.
    """
    n = skeleton.shape[0]
    directed = np.zeros((n, n), dtype=bool)
    undirected = skeleton.copy()
    for z in range(n):
        neighbors = [int(v) for v in np.flatnonzero(skeleton[z])]
        for x, y in itertools.combinations(neighbors, 2):
            if skeleton[x, y]:
                continue
            sepset = sepsets.get(x, y)
            if sepset is None or z in sepset:
                continue
            _orient(directed, undirected, x, z)
            _orient(directed, undirected, y, z)
    return Pdag(directed, undirected)


def apply_meek_rule_1(p: Pdag) -> Pdag:
    """a -> b - c with a, c non-adjacent becomes a -> b -> c, to fixpoint."""
    skeleton = p.skeleton()
    directed = p.directed.copy()
    undirected = p.undirected.copy()
    changed = True
    while changed:
        changed = False
        for a, b in graph.arcs_of(directed):
            for c in map(int, np.flatnonzero(undirected[b])):
                if c != a and not skeleton[a, c]:
                    changed |= _orient(directed, undirected, b, c)
    return Pdag(directed, undirected)


def pc_pdag(d: Dataset, test: CiTestConfig) -> Pdag:
    _require_two_variables(d, "pc")
    skeleton, sepsets = pc_skeleton(d, test)
    return apply_meek_rule_1(orient_v_structures(skeleton, sepsets))


def pc_learn(
    d: Dataset, test: CiTestConfig, rng: np.random.Generator
) -> Dag:
    return resolve_pdag(pc_pdag(d, test), rng)


def iamb_blanket(d: Dataset, x: int, test: CiTestConfig) -> Tuple[int, ...]:
    """grow-shrink estimate of the Markov blanket of x.

    The forward phase adds the candidate with the largest conditional mutual
    information while it is still dependent on x given the current set;
    the backward phase drops members independent of x given the rest.
    """
    blanket: List[int] = []
    while True:
        candidates = [v for v in range(d.n) if v != x and v not in blanket]
        if not candidates:
            break
        strength = [
            conditional_mutual_information(d, x, v, blanket)
            for v in candidates
        ]
        best = candidates[int(np.argmax(strength))]
        if test.run(d, x, best, blanket).independent:
            break
        blanket.append(best)
    for v in list(blanket):
        rest = [u for u in blanket if u != v]
        if test.run(d, x, v, rest).independent:
            blanket.remove(v)
    return tuple(sorted(blanket))


def iamb_blankets(d: Dataset, test: CiTestConfig) -> List[Tuple[int, ...]]:
    return [iamb_blanket(d, x, test) for x in range(d.n)]


def iamb_pdag(d: Dataset, test: CiTestConfig) -> Pdag:
    """blanket members become undirected edges (x in B(y) or y in B(x))."""
    _require_two_variables(d, "iamb")
    skeleton = np.zeros((d.n, d.n), dtype=bool)
    for x, blanket in enumerate(iamb_blankets(d, test)):
        for y in blanket:
            skeleton[x, y] = skeleton[y, x] = True
    return Pdag.from_skeleton(skeleton)


def iamb_learn(
    d: Dataset, test: CiTestConfig, rng: np.random.Generator
) -> Dag:
    return resolve_pdag(iamb_pdag(d, test), rng)


def random_topological_order(
    adj: np.ndarray, rng: np.random.Generator
) -> List[int]:
    """Kahn's procedure picking uniformly among the ready nodes."""
    indegree = adj.sum(axis=0).astype(int)
    ready = [v for v in range(adj.shape[0]) if indegree[v] == 0]
    order = []
    while ready:
        v = ready.pop(int(rng.integers(len(ready))))
        order.append(v)
        for w in np.flatnonzero(adj[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(int(w))
    return order


def _acyclic_directed_part(p: Pdag) -> Tuple[np.ndarray, List[Arc]]:
    if graph.is_acyclic(p.directed):
        return p.directed.copy(), []
    kept = np.zeros_like(p.directed)
    dropped = []
    for i, j in graph.arcs_of(p.directed):
        if graph.creates_cycle(kept, i, j):
            dropped.append((i, j))
        else:
            kept[i, j] = True
    return kept, dropped


def resolve_pdag(p: Pdag, rng: np.random.Generator) -> Dag:
    """orient every undirected edge along one random order of the nodes.

    The order is a random topological order of the directed part, so the
    result is acyclic and keeps every directed arc. A cyclic directed part
    has arcs closing cycles dropped (with a warning) first.
    """
    directed, dropped = _acyclic_directed_part(p)
    for i, j in dropped:
        common.warn(f"dropped arc {i} -> {j} closing a directed cycle")
    order = random_topological_order(directed, rng)
    position = np.empty(p.n, dtype=int)
    position[order] = np.arange(p.n)
    adj = directed
    for i, j in p.undirected_edges():
        if position[i] < position[j]:
            adj[i, j] = True
        else:
            adj[j, i] = True
    return Dag(adj, check=False)
