"""Experiment grid execution.

Every (cell, method) run is a pure function of the master seed, the cell
coordinates and the method, so runs may execute in any order and on any
number of workers. Each dataset cell is one unit of work: its network and
data are generated once and every pending method runs on them.
"""

import concurrent.futures
import functools
import time
from dataclasses import dataclass
from pathlib import Path
from typing import (
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    TypeVar,
)

import trio

from bnbench import common, error
from bnbench.citest import CiTestConfig
from bnbench.config import GridSpec, LearnerSettings
from bnbench.constraint import iamb_learn, pc_learn
from bnbench.datagen import Dataset, GridCell, cell_datasets, grid_cells
from bnbench.evaluate import confusion
from bnbench.genetic import ga_evolve
from bnbench.graph import Dag
from bnbench.localsearch import hill_climb, tabu_search
from bnbench.results import (
    MethodId,
    ResultKey,
    ResultSink,
    RunResult,
    result_key,
)
from bnbench.scores import FamilyScoreCache, ScoreFamily, ScoreKind

T = TypeVar("T")


@dataclass(frozen=True)
class MethodRun:
    dag: Dag
    score_final: Optional[float]
    ms: float


def method_seed(master_seed: int, cell: GridCell, method: MethodId) -> int:
    return common.derive_seed(master_seed, "method", *cell.key, method.value)


def run_method(
    method: MethodId,
    d: Dataset,
    settings: LearnerSettings,
    seed: int,
    *,
    cache: Optional[FamilyScoreCache] = None,
) -> MethodRun:
    """run one learner; `ms` covers the learner call only.

    `cache` must belong to `d` and to the method's score family.
    """
    rng = common.make_rng(seed)
    family = method.score_family
    start = time.perf_counter()
    score_final: Optional[float] = None
    if family is None:
        test = CiTestConfig(settings.alpha, settings.ci_test)
        if method is MethodId.PC:
            dag = pc_learn(d, test, rng)
        else:
            dag = iamb_learn(d, test, rng)
    else:
        kind = ScoreKind.for_dataset(family, d)
        if method.search == "hc":
            outcome = hill_climb(d, kind, cache=cache)
        elif method.search == "ts":
            outcome = tabu_search(
                d,
                kind,
                settings.tenure_for(d.n),
                settings.stall_limit,
                settings.max_iters,
                cache=cache,
            )
        else:
            outcome = ga_evolve(d, kind, settings.ga, rng, cache=cache)
        dag = outcome.dag
        score_final = outcome.score
    ms = (time.perf_counter() - start) * 1000.0
    return MethodRun(dag, score_final, ms)


def run_cell(
    master_seed: int,
    cell: GridCell,
    methods: Sequence[MethodId],
    settings: LearnerSettings,
) -> List[RunResult]:
    """every requested method on the noisy dataset of one grid cell."""
    bn, _, noisy = cell_datasets(master_seed, cell)
    caches: Dict[ScoreFamily, FamilyScoreCache] = {}
    results = []
    for method in methods:
        seed = method_seed(master_seed, cell, method)
        family = method.score_family
        cache = (
            None
            if family is None
            else caches.setdefault(family, FamilyScoreCache())
        )
        run = run_method(method, noisy, settings, seed, cache=cache)
        results.append(
            RunResult(
                cell,
                method,
                seed,
                confusion(bn.dag, run.dag),
                run.score_final,
                run.ms,
            )
        )
    return results


@dataclass(frozen=True)
class GridSummary:
    path: Path
    planned: int
    skipped: int
    completed: int
    failed_cells: int
    results: List[RunResult]


def _pending(
    spec: GridSpec, methods: Sequence[MethodId], done: Set[ResultKey]
) -> List[Tuple[GridCell, List[MethodId]]]:
    work = []
    for cell in grid_cells(spec):
        todo = [m for m in methods if result_key(cell, m) not in done]
        if todo:
            work.append((cell, todo))
    return work


def _call(
    executor: Optional[concurrent.futures.Executor], fn: Callable[[], T]
) -> T:
    if executor is None:
        return fn()
    return executor.submit(fn).result()


def run_grid(
    spec: GridSpec,
    methods: Sequence[MethodId],
    out: Path,
    jobs: int = 1,
    settings: Optional[LearnerSettings] = None,
) -> GridSummary:
    """run every (cell, method) of the grid not already present in `out`.

    Rows are appended as runs finish; at the end the file is rewritten in
    canonical order so identical grids give identical files apart from the
    timing column. With jobs > 1 cells run in worker processes.
    """
    spec.validate()
    if jobs < 1:
        raise error.UsageError(f"jobs {jobs} below 1")
    if not methods:
        raise error.UsageError("no methods selected")
    learners = LearnerSettings() if settings is None else settings
    sink = ResultSink(out)
    done = sink.open()
    planned = spec.size * len(methods)
    work = _pending(spec, methods, done)
    skipped = planned - sum(len(todo) for _, todo in work)
    if skipped:
        common.iprint(f"{skipped} of {planned} runs already in {out}")
    completed = 0
    failed_cells = 0

    async def _run_all(
        executor: Optional[concurrent.futures.Executor],
    ) -> None:
        limiter = trio.CapacityLimiter(jobs)

        async def _process_one(cell: GridCell, todo: List[MethodId]) -> None:
            nonlocal completed, failed_cells
            job = functools.partial(
                run_cell, spec.master_seed, cell, todo, learners
            )
            try:
                results = await trio.to_thread.run_sync(_call, executor, job)
            except error.Error as e:
                common.eprint(f"{cell.key}: {e}")
                failed_cells += 1
                return
            finally:
                limiter.release_on_behalf_of(cell)
            for result in results:
                sink.append(result)
            completed += len(results)
            common.vprint(
                f"[{completed + skipped}/{planned}] {cell.network_id} "
                f"m={cell.samples} noise={cell.noise}"
            )

        async with trio.open_nursery() as nursery:
            for cell, todo in work:
                await limiter.acquire_on_behalf_of(cell)
                nursery.start_soon(_process_one, cell, todo)

    with sink:
        if jobs == 1:
            trio.run(_run_all, None)
        else:
            with concurrent.futures.ProcessPoolExecutor(jobs) as executor:
                trio.run(_run_all, executor)
    results = sink.finalize()
    common.iprint(
        f"{completed} runs completed, {skipped} skipped, "
        f"{failed_cells} cells failed"
    )
    if failed_cells:
        raise error.AbortError(f"{failed_cells} grid cells failed")
    return GridSummary(
        out, planned, skipped, completed, failed_cells, results
    )