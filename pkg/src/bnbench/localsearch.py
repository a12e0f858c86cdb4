"""Hill climbing and tabu search over the add-arc / remove-arc neighborhood.

Both searches start from the empty graph and maximize a decomposable score.
Equal-delta moves are broken by `Move.sort_key`, so a search is a pure
function of its data and parameters.
"""

import collections
from dataclasses import dataclass
from typing import Deque, List, Optional, Tuple

import numpy as np

from bnbench import common, error, graph
from bnbench.datagen import Dataset
from bnbench.graph import Dag, Move, MoveKind
from bnbench.scores import FamilyScoreCache, Scorer, ScoreKind

__all__ = [
    "IMPROVEMENT_THRESHOLD",
    "Move",
    "MoveKind",
    "SearchOutcome",
    "TabuList",
    "hill_climb",
    "neighborhood",
    "tabu_search",
]

# Deltas at or below this count as no improvement.
IMPROVEMENT_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SearchOutcome:
    dag: Dag
    score: float
    iterations: int
    # Score after each iteration (best-so-far for searches that may worsen).
    trace: Tuple[float, ...] = ()


class TabuList:
    """Recently forbidden moves; an entry added at iteration t stays tabu
    through iteration t + tenure."""

    def __init__(self, tenure: int) -> None:
        if tenure < 1:
            raise error.UsageError(f"tabu tenure {tenure} below 1")
        self.tenure = tenure
        self._entries: Deque[Tuple[Move, int]] = collections.deque()

    def add(self, move: Move, iteration: int) -> None:
        self._entries.append((move, iteration + self.tenure))

    def expire(self, iteration: int) -> None:
        while self._entries and self._entries[0][1] < iteration:
            self._entries.popleft()

    def is_tabu(self, move: Move, iteration: int) -> bool:
        return any(
            m == move and iteration <= expiry for m, expiry in self._entries
        )

    def __len__(self) -> int:
        return len(self._entries)


def neighborhood(dag: Dag) -> List[Move]:
    """every applicable move, ordered by `Move.sort_key`."""
    reach = graph.reachability(dag.adj)
    adj = dag.adj
    moves = []
    for i in range(dag.n):
        for j in range(dag.n):
            if i != j and not adj[i, j] and not reach[j, i]:
                moves.append(Move(MoveKind.ADD, i, j))
    moves.extend(Move(MoveKind.REMOVE, i, j) for i, j in dag.arcs())
    return moves


def hill_climb(
    d: Dataset,
    score: ScoreKind,
    *,
    cache: Optional[FamilyScoreCache] = None,
    use_cache: bool = True,
) -> SearchOutcome:
    """greedy ascent to a local maximum of the score."""
    scorer = Scorer(d, score, cache=cache, use_cache=use_cache)
    dag = Dag.empty(d.n)
    current = scorer.score(dag)
    trace = [current]
    iterations = 0
    while True:
        best_move: Optional[Move] = None
        best_delta = -np.inf
        for move in neighborhood(dag):
            delta = scorer.move_delta(dag, move)
            if delta > best_delta:
                best_move, best_delta = move, delta
        if best_move is None or best_delta <= IMPROVEMENT_THRESHOLD:
            break
        dag = dag.apply(best_move)
        current += best_delta
        iterations += 1
        trace.append(current)
        common.vvprint(f"[hc] {iterations}: {best_move} -> {current:.6f}")
    return SearchOutcome(dag, scorer.score(dag), iterations, tuple(trace))


def tabu_search(
    d: Dataset,
    score: ScoreKind,
    tenure: Optional[int] = None,
    stall_limit: int = 50,
    max_iters: int = 2000,
    *,
    cache: Optional[FamilyScoreCache] = None,
    use_cache: bool = True,
) -> SearchOutcome:
    """tabu search returning the best graph visited.

    Each iteration takes the best admissible move even when it worsens the
    score; the inverse of the move taken becomes tabu for `tenure`
    iterations (default: the node count). A tabu move is admissible only
    when it would beat the best score found so far. The search stops after
    `stall_limit` iterations without a new best or after `max_iters`.
    """
    if stall_limit < 1:
        raise error.UsageError(f"stall limit {stall_limit} below 1")
    scorer = Scorer(d, score, cache=cache, use_cache=use_cache)
    tabu = TabuList(d.n if tenure is None else tenure)
    dag = Dag.empty(d.n)
    current = scorer.score(dag)
    best_dag, best = dag, current
    trace = [best]
    stall = 0
    iterations = 0
    for iteration in range(1, max_iters + 1):
        tabu.expire(iteration)
        chosen: Optional[Move] = None
        chosen_delta = -np.inf
        for move in neighborhood(dag):
            delta = scorer.move_delta(dag, move)
            if delta <= chosen_delta:
                continue
            if tabu.is_tabu(move, iteration) and not (
                current + delta > best + IMPROVEMENT_THRESHOLD
            ):
                continue
            chosen, chosen_delta = move, delta
        if chosen is None:
            break
        dag = dag.apply(chosen)
        current += chosen_delta
        tabu.add(chosen.inverse(), iteration)
        iterations = iteration
        if current > best + IMPROVEMENT_THRESHOLD:
            best_dag, best = dag, current
            stall = 0
        else:
            stall += 1
        trace.append(best)
        common.vvprint(f"[ts] {iteration}: {chosen} -> {current:.6f}")
        if stall >= stall_limit:
            break
    return SearchOutcome(
        best_dag, scorer.score(best_dag), iterations, tuple(trace)
    )
