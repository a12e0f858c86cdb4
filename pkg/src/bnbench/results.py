"""Learner identifiers, per-run result records and the results CSV."""

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, Iterable, List, Optional, Set, Tuple, Union

from bnbench import common, error
from bnbench.datagen import GridCell, VarKind
from bnbench.evaluate import Confusion, Metrics, edges, metrics
from bnbench.scores import ScoreFamily

RESULT_COLUMNS = (
    "kind",
    "nodes",
    "samples",
    "density",
    "noise",
    "replicate",
    "method",
    "score",
    "seed",
    "tp",
    "fp",
    "tn",
    "fn",
    "precision",
    "recall",
    "specificity",
    "accuracy",
    "hamming",
    "score_final",
    "ms",
)

# Columns identifying a run; the rest are its outcome.
KEY_COLUMNS = RESULT_COLUMNS[:8]

FieldValue = Union[str, int, float]
ResultKey = Tuple[FieldValue, ...]


class MethodId(enum.Enum):
    PC = "pc"
    IAMB = "iamb"
    HC_LOGLIK = "hc-loglik"
    HC_AIC = "hc-aic"
    HC_BIC = "hc-bic"
    TS_LOGLIK = "ts-loglik"
    TS_AIC = "ts-aic"
    TS_BIC = "ts-bic"
    GA_LOGLIK = "ga-loglik"
    GA_AIC = "ga-aic"
    GA_BIC = "ga-bic"

    @classmethod
    def from_config_str(cls, config_str: str) -> "MethodId":
        for method in cls:
            if method.value == config_str:
                return method
        raise error.UsageError(
            "invalid method {!r} (choose from {})".format(
                config_str, ", ".join(m.value for m in cls)
            )
        )

    @classmethod
    def from_columns(cls, search: str, score: str) -> "MethodId":
        return cls.from_config_str(f"{search}-{score}" if score else search)

    @property
    def search(self) -> str:
        return self.value.split("-")[0]

    @property
    def score_family(self) -> Optional[ScoreFamily]:
        _, _, family = self.value.partition("-")
        return ScoreFamily.from_config_str(family) if family else None

    @property
    def is_constraint_based(self) -> bool:
        return self.score_family is None


ALL_METHODS = tuple(MethodId)


def parse_methods(words: Iterable[str]) -> List[MethodId]:
    """methods named in comma/space-separated words; "all" means all."""
    names = [w for w in common.split_flatten_words(words) if w]
    if not names or "all" in names:
        return list(ALL_METHODS)
    return [MethodId.from_config_str(name) for name in names]


def result_key(cell: GridCell, method: MethodId) -> ResultKey:
    """values of KEY_COLUMNS for one run."""
    family = method.score_family
    return (
        cell.kind.value,
        cell.nodes,
        cell.samples,
        cell.density,
        cell.noise,
        cell.replicate,
        method.search,
        "" if family is None else family.value,
    )


def _format_float(value: float) -> str:
    return repr(float(value))


@dataclass(frozen=True)
class RunResult:
    cell: GridCell
    method: MethodId
    seed: int
    confusion: Confusion
    # None for constraint-based learners, which optimize no score.
    score_final: Optional[float]
    ms: float

    @property
    def metrics(self) -> Metrics:
        return metrics(self.confusion)

    @property
    def key(self) -> ResultKey:
        return tuple(self.field(name) for name in KEY_COLUMNS)

    @property
    def sort_key(self) -> Tuple[ResultKey, int]:
        return (self.cell.key, ALL_METHODS.index(self.method))

    def fields(self) -> Dict[str, FieldValue]:
        """typed values of the results columns plus derived metrics."""
        cell = self.cell
        m = self.metrics
        values: Dict[str, FieldValue] = {
            "kind": cell.kind.value,
            "nodes": cell.nodes,
            "samples": cell.samples,
            "density": cell.density,
            "noise": cell.noise,
            "replicate": cell.replicate,
            "method": self.method.search,
            "score": (
                ""
                if self.method.score_family is None
                else self.method.score_family.value
            ),
            "seed": self.seed,
            "tp": self.confusion.tp,
            "fp": self.confusion.fp,
            "tn": self.confusion.tn,
            "fn": self.confusion.fn,
            "precision": m.precision,
            "recall": m.recall,
            "sensitivity": m.recall,
            "specificity": m.specificity,
            "accuracy": m.accuracy,
            "hamming": self.confusion.hamming,
            "edges": edges(self.confusion),
            "score_final": (
                "" if self.score_final is None else self.score_final
            ),
            "ms": self.ms,
        }
        return values

    def field(self, name: str) -> FieldValue:
        try:
            return self.fields()[name]
        except KeyError:
            raise error.UsageError(f"unknown result field {name!r}")

    def to_row(self) -> List[str]:
        values = self.fields()
        row = []
        for name in RESULT_COLUMNS:
            value = values[name]
            if name == "ms":
                row.append(f"{self.ms:.3f}")
            elif isinstance(value, float):
                row.append(_format_float(value))
            else:
                row.append(str(value))
        return row

    @staticmethod
    def from_row(row: Dict[str, str]) -> "RunResult":
        cell = GridCell(
            VarKind.from_config_str(row["kind"]),
            int(row["nodes"]),
            int(row["samples"]),
            float(row["density"]),
            float(row["noise"]),
            int(row["replicate"]),
        )
        confusion = Confusion(
            int(row["tp"]), int(row["fp"]), int(row["tn"]), int(row["fn"])
        )
        score_final = row["score_final"]
        return RunResult(
            cell,
            MethodId.from_columns(row["method"], row["score"]),
            int(row["seed"]),
            confusion,
            float(score_final) if score_final else None,
            float(row["ms"]),
        )


def format_rows(results: Iterable[RunResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for result in results:
        writer.writerow(result.to_row())
    return out.getvalue()


def _complete_text(path: Path) -> Tuple[str, bool]:
    """file text up to its last newline; flag set if a partial line was cut."""
    text = path.read_text("utf-8")
    if not text or text.endswith("\n"):
        return text, False
    return text[: text.rfind("\n") + 1], True


def parse_results(text: str, name: str = "results") -> List[RunResult]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != RESULT_COLUMNS:
        raise error.FormatError(name, f"unexpected header {header}")
    results = []
    for line_num, row in enumerate(reader, start=2):
        if len(row) != len(RESULT_COLUMNS):
            raise error.FormatError(name, f"line {line_num}: wrong width")
        try:
            results.append(RunResult.from_row(dict(zip(header, row))))
        except (ValueError, error.UsageError) as e:
            raise error.FormatError(name, f"line {line_num}: {e}")
    return results


def read_results(path: Path) -> List[RunResult]:
    """complete rows of a results file; a partial trailing line is ignored."""
    if not path.is_file():
        raise error.MissingFileError(str(path))
    text, truncated = _complete_text(path)
    if truncated:
        common.warn(f"ignoring incomplete last line of {path}")
    return parse_results(text, str(path))


def write_results(path: Path, results: Iterable[RunResult]) -> None:
    """write a complete results file in canonical row order."""
    ordered = sorted(results, key=lambda r: r.sort_key)
    with common.atomic_write_text(path) as f:
        f.write(",".join(RESULT_COLUMNS) + "\n")
        f.write(format_rows(ordered))


class ResultSink:
    """Append-only results file.

    Each row goes out in a single write followed by a flush, so a crash
    leaves at worst one partial trailing line, which `open` discards.
    """

    def __init__(self, path: Path) -> None:
        self.path = path
        self._file: Optional[IO[str]] = None
        self.existing: List[RunResult] = []

    def open(self) -> Set[ResultKey]:
        """prepare the file for appending; keys of rows already present."""
        try:
            if self.path.exists():
                text, truncated = _complete_text(self.path)
                self.existing = parse_results(text, str(self.path))
                if truncated:
                    common.warn(
                        f"dropping incomplete last line of {self.path}"
                    )
                    write_results(self.path, self.existing)
            else:
                common.make_dirs_for(self.path)
            self._file = self.path.open("a", newline="", encoding="utf-8")
            if self._file.tell() == 0:
                self._file.write(",".join(RESULT_COLUMNS) + "\n")
                self._file.flush()
        except OSError as e:
            raise error.SinkError(str(self.path), e)
        return {r.key for r in self.existing}

    def append(self, result: RunResult) -> None:
        if self._file is None:
            raise error.UsageError(f"results sink {self.path} not open")
        self._file.write(format_rows([result]))
        self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def finalize(self) -> List[RunResult]:
        """close and rewrite the file sorted; returns every row."""
        self.close()
        results = read_results(self.path)
        write_results(self.path, results)
        return results

    def __enter__(self) -> "ResultSink":
        return self

    def __exit__(self, *args: object) -> None:
        self.close()
