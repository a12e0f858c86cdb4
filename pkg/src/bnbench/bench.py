import argparse
import dataclasses
from pathlib import Path
from typing import List, Optional

import bnbench.base
import bnbench.config
from bnbench import common, error, harness
from bnbench.config import GridConfig, GridSpec, LearnerSettings
from bnbench.results import MethodId, parse_methods

description = """\
Run a benchmark grid and record one results row per (dataset, method).
"""

epilog = """\
The grid comes from --config (JSON, or TOML for a .toml file) or from a
built-in --preset:

  full     both kinds, 10 and 15 variables, 100 replicates
  desk     both kinds, 10 variables, 20 replicates
  desk-15  both kinds, 15 variables, 5 replicates
  smoke    a tiny grid for trying things out

Rows already present in --out are skipped, so an interrupted run resumes
where it stopped.  When the grid completes the file is rewritten in a fixed
row order; two runs with the same master seed then differ only in the ms
column.
"""


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        help="grid configuration file",
    )

    parser.add_argument(
        "--preset",
        choices=sorted(bnbench.config.PRESETS),
        help="built-in grid",
    )

    parser.add_argument(
        "--out",
        required=True,
        help="results CSV (appended to when it exists)",
    )

    parser.add_argument(
        "--methods",
        action="append",
        default=[],
        help="methods to run, comma separated (default: all 11)",
    )

    parser.add_argument(
        "--master-seed",
        type=int,
        help="override the grid's master seed",
    )

    bnbench.base.add_learner_arguments(parser)


class Main(bnbench.base.BaseMain):
    def __init__(self, args: argparse.Namespace) -> None:
        super().__init__(args)
        self._grid_config: Optional[GridConfig] = None

    @property
    def grid_config(self) -> GridConfig:
        if self._grid_config is None:
            args = self.args
            if args.config and args.preset:
                raise error.UsageError("give --config or --preset, not both")
            if args.config:
                config = bnbench.config.load_grid_config(Path(args.config))
            elif args.preset:
                config = GridConfig(bnbench.config.preset(args.preset))
            else:
                raise error.UsageError("missing --config or --preset")
            if args.master_seed is not None:
                config = dataclasses.replace(
                    config,
                    spec=dataclasses.replace(
                        config.spec, master_seed=args.master_seed
                    ),
                )
            self._grid_config = config
        return self._grid_config

    def base_settings(self) -> LearnerSettings:
        return self.grid_config.learners

    def methods(self) -> List[MethodId]:
        if self.args.methods:
            return parse_methods(self.args.methods)
        configured = self.grid_config.methods
        return parse_methods(configured if configured is not None else [])

    def _run(self) -> None:
        spec: GridSpec = self.grid_config.spec
        methods = self.methods()
        common.iprint(
            "{} datasets x {} methods = {} runs, master seed {}".format(
                spec.size,
                len(methods),
                spec.size * len(methods),
                spec.master_seed,
            )
        )
        summary = harness.run_grid(
            spec,
            methods,
            Path(self.args.out),
            jobs=max(self.args.num_jobs, 1),
            settings=self.settings,
        )
        common.iprint(f"{len(summary.results)} rows in {summary.path}")
