import argparse
import dataclasses
from pathlib import Path
from typing import Set

import bnbench.base
import bnbench.config
from bnbench import common, datagen, error, graph
from bnbench.datagen import GridCell, VarKind

description = """\
Generate random Bayesian networks and sample datasets from them.
"""

epilog = """\
A single simulation writes, under --out-dir:

  NAME-network.txt   the generating structure
  NAME.csv           the sampled data with noise applied (plus NAME.json)
  NAME-clean.csv     the same sample before noise (plus NAME-clean.json)

With --preset, every dataset of that grid is written instead, one network
file per structure and one CSV per (structure, sample size, noise rate).
The output is fully determined by --seed.
"""


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--kind",
        choices=[k.value for k in VarKind],
        default=VarKind.BINARY.value,
        help="variable kind (default %(default)s)",
    )

    parser.add_argument(
        "--nodes",
        type=int,
        default=10,
        help="number of variables (default %(default)s)",
    )

    parser.add_argument(
        "--density",
        type=float,
        default=0.4,
        help="arc density in (0, 1] (default %(default)s)",
    )

    parser.add_argument(
        "--samples",
        type=int,
        default=100,
        help="number of rows (default %(default)s)",
    )

    parser.add_argument(
        "--noise",
        type=float,
        default=0.0,
        help="fraction of entries replaced by a different value "
        "(default %(default)s)",
    )

    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="master seed (default %(default)s)",
    )

    parser.add_argument(
        "--name",
        default="sim",
        help="output file name prefix (default %(default)s)",
    )

    parser.add_argument(
        "--out-dir",
        default=".",
        help="output directory (default %(default)s)",
    )

    parser.add_argument(
        "--preset",
        choices=sorted(bnbench.config.PRESETS),
        help="write every dataset of a preset grid",
    )


class Main(bnbench.base.BaseMain):
    def write_single(self, out_dir: Path) -> None:
        args = self.args
        cell = GridCell(
            VarKind.from_config_str(args.kind),
            args.nodes,
            args.samples,
            args.density,
            args.noise,
            0,
        )
        if cell.samples < 1:
            raise error.UsageError(f"samples {cell.samples} below 1")
        if not 0.0 <= cell.noise < 1.0:
            raise error.UsageError(f"noise {cell.noise} not in [0, 1)")
        bn, clean, noisy = datagen.cell_datasets(args.seed, cell)
        network_path = out_dir / f"{args.name}-network.txt"
        graph.write_dag(network_path, bn.dag)
        datagen.write_dataset(
            out_dir / f"{args.name}.csv",
            noisy,
            network_file=network_path.name,
        )
        datagen.write_dataset(
            out_dir / f"{args.name}-clean.csv",
            clean,
            network_file=network_path.name,
        )
        common.iprint(
            "{}: {} arcs, {} rows of {} {} variables".format(
                network_path,
                bn.dag.num_arcs,
                noisy.m,
                noisy.n,
                noisy.kind.value,
            )
        )

    def write_grid(self, out_dir: Path) -> None:
        spec = dataclasses.replace(
            bnbench.config.preset(self.args.preset), master_seed=self.args.seed
        )
        written_networks: Set[str] = set()
        count = 0
        for cell, bn, noisy in datagen.grid_datasets(spec):
            network_name = f"{cell.network_id}-network.txt"
            if cell.network_id not in written_networks:
                graph.write_dag(out_dir / network_name, bn.dag)
                written_networks.add(cell.network_id)
            data_name = "{}-m{}-e{}.csv".format(
                cell.network_id, cell.samples, cell.noise
            )
            datagen.write_dataset(
                out_dir / data_name, noisy, network_file=network_name
            )
            common.vprint(f"wrote {data_name}")
            count += 1
        common.iprint(
            f"{len(written_networks)} networks, {count} datasets "
            f"in {out_dir}"
        )

    def _run(self) -> None:
        out_dir = Path(self.args.out_dir)
        if self.args.preset:
            self.write_grid(out_dir)
        else:
            self.write_single(out_dir)
