import enum
import heapq
import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, List, Tuple

import numpy as np

from bnbench import common, error

Arc = Tuple[int, int]


def _as_square(adj: Any, what: str = "adjacency matrix") -> np.ndarray:
    a = np.asarray(adj, dtype=bool)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise error.DimensionError(what, actual=tuple(a.shape))
    return a


def is_acyclic(adj: Any) -> bool:
    """True iff the directed graph has no directed cycle (Kahn)."""
    a = _as_square(adj)
    indegree = a.sum(axis=0).astype(int)
    ready = [v for v in range(a.shape[0]) if indegree[v] == 0]
    visited = 0
    while ready:
        v = ready.pop()
        visited += 1
        for w in np.flatnonzero(a[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(int(w))
    return visited == a.shape[0]


def reachability(adj: Any) -> np.ndarray:
    """R[i, j] is True iff a directed path of length >= 1 leads i to j."""
    r = _as_square(adj).copy()
    for k in range(r.shape[0]):
        r |= np.outer(r[:, k], r[k, :])
    return r


def has_path(adj: Any, src: int, dst: int) -> bool:
    a = _as_square(adj)
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for w in map(int, np.flatnonzero(a[v])):
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def creates_cycle(adj: Any, src: int, dst: int) -> bool:
    """True if adding src -> dst would close a directed cycle."""
    return src == dst or has_path(adj, dst, src)


def arcs_of(adj: Any) -> List[Arc]:
    """arcs (i, j) of an adjacency matrix in row-major order."""
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(_as_square(adj)))]


def weakly_connected(adj: Any) -> bool:
    a = _as_square(adj)
    n = a.shape[0]
    root = list(range(n))

    def find(v: int) -> int:
        while root[v] != v:
            root[v] = root[root[v]]
            v = root[v]
        return v

    for i, j in zip(*np.nonzero(a)):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            root[ri] = rj
    return len({find(v) for v in range(n)}) <= 1


class MoveKind(enum.Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    src: int
    dst: int

    @property
    def arc(self) -> Arc:
        return (self.src, self.dst)

    @property
    def sort_key(self) -> Tuple[str, int, int]:
        return (self.kind.value, self.src, self.dst)

    def inverse(self) -> "Move":
        if self.kind is MoveKind.ADD:
            return Move(MoveKind.REMOVE, self.src, self.dst)
        return Move(MoveKind.ADD, self.src, self.dst)

    def __str__(self) -> str:
        return f"{self.kind.value}({self.src}->{self.dst})"


@dataclass(frozen=True)
class ParentSet:
    node: int
    parents: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.node in self.parents:
            raise error.GraphError(f"node {self.node} is its own parent")
        if list(self.parents) != sorted(set(self.parents)):
            raise error.GraphError(
                f"parents of {self.node} not sorted and unique"
            )


class Dag:
    """Directed acyclic graph over nodes 0..n-1; immutable."""

    def __init__(self, adj: Any, *, check: bool = True) -> None:
        a = np.array(_as_square(adj), dtype=bool)
        if check:
            if a.diagonal().any():
                raise error.GraphError("self-loop")
            if not is_acyclic(a):
                raise error.GraphError("directed cycle")
        a.setflags(write=False)
        self._adj = a

    @staticmethod
    def empty(n: int) -> "Dag":
        return Dag(np.zeros((n, n), dtype=bool), check=False)

    @staticmethod
    def from_arcs(n: int, arcs: Iterable[Arc]) -> "Dag":
        a = np.zeros((n, n), dtype=bool)
        for i, j in arcs:
            if not (0 <= i < n and 0 <= j < n):
                raise error.GraphError(f"arc {i} -> {j} outside 0..{n - 1}")
            a[i, j] = True
        return Dag(a)

    @property
    def n(self) -> int:
        return int(self._adj.shape[0])

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def num_arcs(self) -> int:
        return int(self._adj.sum())

    def arcs(self) -> List[Arc]:
        return arcs_of(self._adj)

    def has_arc(self, src: int, dst: int) -> bool:
        return bool(self._adj[src, dst])

    def parents(self, node: int) -> Tuple[int, ...]:
        return tuple(int(p) for p in np.flatnonzero(self._adj[:, node]))

    def children(self, node: int) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.flatnonzero(self._adj[node, :]))

    def parent_set(self, node: int) -> ParentSet:
        return ParentSet(node, self.parents(node))

    def can_apply(self, move: Move) -> bool:
        present = self.has_arc(move.src, move.dst)
        if move.kind is MoveKind.REMOVE:
            return present
        return not present and not creates_cycle(
            self._adj, move.src, move.dst
        )

    def apply(self, move: Move) -> "Dag":
        if move.kind is MoveKind.REMOVE:
            if not self.has_arc(move.src, move.dst):
                raise error.RejectedMoveError(move, "arc absent")
        elif self.has_arc(move.src, move.dst):
            raise error.RejectedMoveError(move, "arc present")
        elif creates_cycle(self._adj, move.src, move.dst):
            raise error.RejectedMoveError(move, "creates a cycle")
        a = self._adj.copy()
        a[move.src, move.dst] = move.kind is MoveKind.ADD
        return Dag(a, check=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return bool(np.array_equal(self._adj, other._adj))

    def __hash__(self) -> int:
        return hash((self.n, self._adj.tobytes()))

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, arcs={self.arcs()})"


class Pdag:
    """Partially directed graph: directed arcs plus undirected edges."""

    def __init__(self, directed: Any, undirected: Any) -> None:
        d = np.array(_as_square(directed), dtype=bool)
        u = np.array(_as_square(undirected, "undirected matrix"), dtype=bool)
        if d.shape != u.shape:
            raise error.DimensionError(
                "pdag", expected=d.shape, actual=u.shape
            )
        if d.diagonal().any() or u.diagonal().any():
            raise error.GraphError("self-loop")
        if not np.array_equal(u, u.T):
            raise error.GraphError("undirected matrix not symmetric")
        if (d & (u | u.T)).any():
            raise error.GraphError("edge both directed and undirected")
        d.setflags(write=False)
        u.setflags(write=False)
        self._directed = d
        self._undirected = u

    @staticmethod
    def from_skeleton(skeleton: Any) -> "Pdag":
        s = np.array(_as_square(skeleton), dtype=bool)
        s = s | s.T
        return Pdag(np.zeros_like(s), s)

    @property
    def n(self) -> int:
        return int(self._directed.shape[0])

    @property
    def directed(self) -> np.ndarray:
        return self._directed

    @property
    def undirected(self) -> np.ndarray:
        return self._undirected

    def undirected_edges(self) -> List[Arc]:
        return [
            (int(i), int(j))
            for i, j in zip(*np.nonzero(np.triu(self._undirected)))
        ]

    def skeleton(self) -> np.ndarray:
        return self._undirected | self._directed | self._directed.T


def topological_order(d: Dag) -> List[int]:
    """Kahn's order, always taking the lowest-index ready node."""
    a = d.adj
    indegree = a.sum(axis=0).astype(int)
    ready = [v for v in range(d.n) if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in np.flatnonzero(a[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(ready, int(w))
    return order


def arc_count_for(n: int, density: float) -> int:
    return int(round(density * n * (n - 1) / 2))


def random_dag(n: int, density: float, rng: np.random.Generator) -> Dag:
    """Weakly connected DAG with round(density * n(n-1)/2) arcs.

    A random spanning tree is laid over a random node permutation, each
    tree edge oriented from earlier to later; the remaining arcs are drawn
    uniformly among the forward pairs of the same permutation.
    """
    if n < 1:
        raise error.GraphError(f"node count {n} must be positive")
    if not 0.0 < density <= 1.0:
        raise error.ConfigurationError(f"density {density} not in (0, 1]")
    k = arc_count_for(n, density)
    if k < n - 1:
        raise error.InfeasibleDensityError(n, density, k)
    perm = rng.permutation(n)
    a = np.zeros((n, n), dtype=bool)
    for t in range(1, n):
        earlier = int(rng.integers(t))
        a[perm[earlier], perm[t]] = True
    free = [
        (int(perm[s]), int(perm[t]))
        for s in range(n)
        for t in range(s + 1, n)
        if not a[perm[s], perm[t]]
    ]
    extra = k - (n - 1)
    if extra:
        for idx in rng.choice(len(free), size=extra, replace=False):
            a[free[idx]] = True
    return Dag(a, check=False)


def hamming_distance(a: Dag, b: Dag) -> int:
    """Differing directed adjacency cells; a reversed arc costs 2."""
    if a.n != b.n:
        raise error.DimensionError(
            "hamming_distance", expected=(a.n,), actual=(b.n,)
        )
    return int((a.adj != b.adj).sum())


def all_dags(n: int) -> Iterator[Dag]:
    """Every DAG on n nodes (25 for n=3); exhaustive oracle for small n."""
    if n > 5:
        raise error.UsageError(f"refusing to enumerate DAGs on {n} nodes")
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        a = np.zeros((n, n), dtype=bool)
        for (i, j), state in zip(pairs, states):
            if state == 1:
                a[i, j] = True
            elif state == 2:
                a[j, i] = True
        if is_acyclic(a):
            yield Dag(a, check=False)


def format_dag(d: Dag) -> str:
    lines = [f"nodes: {d.n}"]
    lines.extend(f"{i} -> {j}" for i, j in d.arcs())
    return "\n".join(lines) + "\n"


def parse_dag(text: str, name: str = "network") -> Dag:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise error.FormatError(name, "empty network text")
    m = re.match(r"nodes:\s*(\d+)$", lines[0])
    if not m:
        raise error.FormatError(name, f"bad header {lines[0]!r}")
    n = int(m.group(1))
    arcs = []
    for line in lines[1:]:
        m = re.match(r"(\d+)\s*->\s*(\d+)$", line)
        if not m:
            raise error.FormatError(name, f"bad arc line {line!r}")
        arcs.append((int(m.group(1)), int(m.group(2))))
    try:
        return Dag.from_arcs(n, arcs)
    except error.GraphError as e:
        raise error.FormatError(name, e.message)


def write_dag(path: Path, d: Dag) -> None:
    with common.atomic_write_text(path) as f:
        f.write(format_dag(d))


def read_dag(path: Path) -> Dag:
    if not path.is_file():
        raise error.MissingFileError(str(path))
    return parse_dag(path.read_text("utf-8"), name=str(path))
