import csv
import dataclasses
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from bnbench import common, error, graph
from bnbench.graph import Dag

if TYPE_CHECKING:
    from bnbench.config import GridSpec


class VarKind(enum.Enum):
    BINARY = "binary"
    FOUR_LEVEL = "four-level"

    @classmethod
    def from_config_str(cls, config_str: str) -> "VarKind":
        for kind in cls:
            if kind.value == config_str:
                return kind
        raise error.ConfigurationError(
            f"unknown variable kind {config_str!r}"
        )

    def to_config_str(self) -> str:
        return self.value

    @property
    def arity(self) -> int:
        return 2 if self is VarKind.BINARY else 4

    @property
    def file_offset(self) -> int:
        # Four-level values are labelled 1..4 on disk, binary ones 0/1.
        return 0 if self is VarKind.BINARY else 1


def joint_index(
    values: np.ndarray, columns: Sequence[int], arity: Sequence[int]
) -> Tuple[np.ndarray, int]:
    """mixed-radix configuration index of `columns` per row, and its size.

    The first column is the most significant digit.
    """
    idx = np.zeros(values.shape[0], dtype=np.int64)
    size = 1
    for c in columns:
        idx = idx * arity[c] + values[:, c]
        size *= arity[c]
    return idx, size


@dataclass(frozen=True, eq=False)
class BayesNet:
    dag: Dag
    arity: Tuple[int, ...]
    cpts: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        n = self.dag.n
        if len(self.arity) != n or len(self.cpts) != n:
            raise error.DimensionError(
                "bayes net",
                expected=(n,),
                actual=(len(self.arity), len(self.cpts)),
            )
        for node, table in enumerate(self.cpts):
            parents = self.dag.parents(node)
            rows = int(np.prod([self.arity[p] for p in parents]))
            expected = (rows, self.arity[node])
            if table.shape != expected:
                raise error.DimensionError(
                    f"cpt of node {node}",
                    expected=expected,
                    actual=tuple(table.shape),
                )
            if (table < 0).any() or not np.allclose(
                table.sum(axis=1), 1.0, rtol=0.0, atol=1e-9
            ):
                raise error.GraphError(f"cpt rows of node {node} invalid")


@dataclass(frozen=True)
class Provenance:
    seed: Optional[int] = None
    network_id: str = ""
    density: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Dataset:
    values: np.ndarray
    kind: VarKind
    noise_rate: float = 0.0
    provenance: Provenance = Provenance()

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.int64)
        if values.ndim != 2:
            raise error.DimensionError("dataset", actual=tuple(values.shape))
        if values.shape[0] < 1:
            raise error.InsufficientDataError("dataset has no rows")
        if values.size and (
            values.min() < 0 or values.max() >= self.kind.arity
        ):
            raise error.FormatError(
                "dataset", f"values outside 0..{self.kind.arity - 1}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def arity(self) -> Tuple[int, ...]:
        return (self.kind.arity,) * self.n

    def levels(self) -> np.ndarray:
        """values as reals, using the on-disk labels (1..4 when four-level)."""
        return (self.values + self.kind.file_offset).astype(float)


def random_parameters(
    dag: Dag, arity: Union[int, Sequence[int]], rng: np.random.Generator
) -> BayesNet:
    """draw every CPT entry uniformly in (0, 1] and normalize each row."""
    if isinstance(arity, int):
        arities = (arity,) * dag.n
    else:
        arities = tuple(int(a) for a in arity)
    if any(a < 2 for a in arities):
        raise error.ConfigurationError("arity below 2")
    cpts = []
    for node in range(dag.n):
        rows = int(np.prod([arities[p] for p in dag.parents(node)]))
        raw = 1.0 - rng.random((rows, arities[node]))
        cpts.append(raw / raw.sum(axis=1, keepdims=True))
    return BayesNet(dag, arities, tuple(cpts))


def _kind_for_arity(arity: Sequence[int]) -> VarKind:
    for kind in VarKind:
        if all(a == kind.arity for a in arity):
            return kind
    raise error.ConfigurationError(f"no variable kind for arities {arity}")


def forward_sample(
    bn: BayesNet,
    m: int,
    rng: np.random.Generator,
    *,
    provenance: Provenance = Provenance(),
) -> Dataset:
    """ancestral sampling of m independent rows."""
    if m < 1:
        raise error.InsufficientDataError(f"sample count {m} below 1")
    values = np.zeros((m, bn.dag.n), dtype=np.int64)
    for node in graph.topological_order(bn.dag):
        idx, _ = joint_index(values, bn.dag.parents(node), bn.arity)
        cum = np.cumsum(bn.cpts[node], axis=1)
        u = rng.random(m)
        drawn = (u[:, None] >= cum[idx]).sum(axis=1)
        values[:, node] = np.minimum(drawn, bn.arity[node] - 1)
    return Dataset(values, _kind_for_arity(bn.arity), 0.0, provenance)


def inject_noise(d: Dataset, rate: float, rng: np.random.Generator) -> Dataset:
    """replace each cell with probability `rate` by one of the other values."""
    if not 0.0 <= rate < 1.0:
        raise error.ConfigurationError(f"noise rate {rate} not in [0, 1)")
    if rate == 0.0:
        return d
    arity = d.kind.arity
    hit = rng.random(d.values.shape) < rate
    shift = rng.integers(1, arity, size=d.values.shape)
    noisy = np.where(hit, (d.values + shift) % arity, d.values)
    return dataclasses.replace(d, values=noisy, noise_rate=rate)


@dataclass(frozen=True)
class GridCell:
    kind: VarKind
    nodes: int
    samples: int
    density: float
    noise: float
    replicate: int

    @property
    def network_key(self) -> Tuple[str, int, float, int]:
        return (self.kind.value, self.nodes, self.density, self.replicate)

    @property
    def sample_key(self) -> Tuple[str, int, float, int, int]:
        return self.network_key + (self.samples,)

    @property
    def key(self) -> Tuple[str, int, int, float, float, int]:
        return (
            self.kind.value,
            self.nodes,
            self.samples,
            self.density,
            self.noise,
            self.replicate,
        )

    @property
    def network_id(self) -> str:
        kind, nodes, density, replicate = self.network_key
        return f"{kind}-n{nodes}-d{density}-r{replicate}"


def network_seed(master_seed: int, cell: GridCell) -> int:
    return common.derive_seed(master_seed, "network", *cell.network_key)


def sample_seed(master_seed: int, cell: GridCell) -> int:
    return common.derive_seed(master_seed, "sample", *cell.sample_key)


def noise_seed(master_seed: int, cell: GridCell) -> int:
    return common.derive_seed(master_seed, "noise", *cell.key)


def generate_network(
    kind: VarKind, nodes: int, density: float, seed: int
) -> BayesNet:
    rng = common.make_rng(seed)
    dag = graph.random_dag(nodes, density, rng)
    return random_parameters(dag, kind.arity, rng)


def cell_datasets(
    master_seed: int,
    cell: GridCell,
    bn: Optional[BayesNet] = None,
) -> Tuple[BayesNet, Dataset, Dataset]:
    """(network, clean dataset, noisy dataset) for one grid cell.

    The structure is shared across sample sizes and noise rates; the clean
    sample is shared across noise rates.
    """
    if bn is None:
        bn = generate_network(
            cell.kind,
            cell.nodes,
            cell.density,
            network_seed(master_seed, cell),
        )
    seed = sample_seed(master_seed, cell)
    clean = forward_sample(
        bn,
        cell.samples,
        common.make_rng(seed),
        provenance=Provenance(seed, cell.network_id, cell.density),
    )
    noisy = inject_noise(
        clean, cell.noise, common.make_rng(noise_seed(master_seed, cell))
    )
    return bn, clean, noisy


def grid_cells(spec: "GridSpec") -> Iterator[GridCell]:
    spec.validate()
    for kind in spec.kinds:
        for nodes, ladder in spec.ladders:
            for density in spec.densities:
                for replicate in range(spec.replicates):
                    for samples in ladder:
                        for noise in spec.noise_rates:
                            yield GridCell(
                                kind,
                                nodes,
                                samples,
                                density,
                                noise,
                                replicate,
                            )


def grid_datasets(
    spec: "GridSpec",
) -> Iterator[Tuple[GridCell, BayesNet, Dataset]]:
    """every (cell, network, noisy dataset) of the grid, deterministically.

    Seeds derive from spec.master_seed and the cell coordinates, so any
    single cell is reproducible in isolation.
    """
    bn: Optional[BayesNet] = None
    bn_key: Optional[Tuple[Any, ...]] = None
    for cell in grid_cells(spec):
        if cell.network_key != bn_key:
            bn, bn_key = None, cell.network_key
        bn, _, noisy = cell_datasets(spec.master_seed, cell, bn)
        yield cell, bn, noisy


def sidecar_path_for(path: Path) -> Path:
    return path.with_suffix(".json")


def write_dataset(
    path: Path, d: Dataset, *, network_file: Optional[str] = None
) -> None:
    """CSV with header v0..v{n-1} plus a JSON provenance sidecar."""
    with common.atomic_write_text(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"v{i}" for i in range(d.n)])
        writer.writerows((d.values + d.kind.file_offset).tolist())
    sidecar = {
        "kind": d.kind.to_config_str(),
        "seed": d.provenance.seed,
        "network": network_file or d.provenance.network_id,
        "density": d.provenance.density,
        "noise_rate": d.noise_rate,
    }
    with common.atomic_write_text(sidecar_path_for(path)) as f:
        json.dump(sidecar, f, indent=2)
        f.write("\n")


def _read_sidecar(path: Path) -> Optional[Dict[str, Any]]:
    sidecar_path = sidecar_path_for(path)
    if not sidecar_path.is_file():
        return None
    try:
        sidecar = json.loads(sidecar_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise error.FormatError(str(sidecar_path), str(e))
    if not isinstance(sidecar, dict):
        raise error.FormatError(str(sidecar_path), "expected an object")
    return sidecar


def _infer_kind(path: Path, raw: np.ndarray) -> VarKind:
    if raw.min() == 0:
        return VarKind.BINARY
    if raw.max() > 1:
        return VarKind.FOUR_LEVEL
    raise error.FormatError(
        str(path), "only 1s; give the variable kind or a sidecar"
    )


def read_dataset(path: Path, kind: Optional[VarKind] = None) -> Dataset:
    """read a dataset CSV; the kind comes from `kind`, the sidecar or values.

    Without a sidecar, data holding a 0 is binary and data holding a level
    above 1 is four-level. Data of 1s only fits both and is refused.
    """
    if not path.is_file():
        raise error.MissingFileError(str(path))
    with path.open(newline="") as f:
        rows: List[List[str]] = list(csv.reader(f))
    if not rows:
        raise error.FormatError(str(path), "empty file")
    header = rows[0]
    if header != [f"v{i}" for i in range(len(header))]:
        raise error.FormatError(str(path), f"bad header {header}")
    try:
        raw = np.array([[int(v) for v in row] for row in rows[1:]])
    except ValueError as e:
        raise error.FormatError(str(path), str(e))
    if raw.size == 0:
        raise error.InsufficientDataError(f"{path} has no rows")
    if raw.ndim != 2 or raw.shape[1] != len(header):
        raise error.FormatError(str(path), "ragged rows")

    sidecar = _read_sidecar(path)
    if kind is None and sidecar is not None:
        kind = VarKind.from_config_str(str(sidecar.get("kind")))
    if kind is None:
        kind = _infer_kind(path, raw)
    provenance = Provenance()
    noise_rate = 0.0
    if sidecar is not None:
        provenance = Provenance(
            sidecar.get("seed"),
            str(sidecar.get("network") or ""),
            sidecar.get("density"),
        )
        noise_rate = float(sidecar.get("noise_rate") or 0.0)
    return Dataset(raw - kind.file_offset, kind, noise_rate, provenance)
