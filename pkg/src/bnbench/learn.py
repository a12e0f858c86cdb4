import argparse
from typing import Optional

import bnbench.base
from bnbench import common, datagen, error, graph, harness
from bnbench.evaluate import confusion, metrics
from bnbench.results import MethodId
from bnbench.scores import ScoreFamily

description = """\
Learn a network structure from a dataset.
"""

epilog = """\
METHOD is a search (pc, iamb, hc, ts, ga) or a full method name such as
hc-bic.  The score-based searches hc, ts and ga need a score, given with
--score or as part of the method name.

The learned structure is written to --out (or printed) in the same text
format used for generating networks.  With --truth, the structural metrics
against the generating network are printed as well.
"""

_SEARCHES = ["pc", "iamb", "hc", "ts", "ga"]


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--method",
        required=True,
        help="learner: {} or one of {}".format(
            "|".join(_SEARCHES), ", ".join(m.value for m in MethodId)
        ),
    )

    parser.add_argument(
        "--score",
        choices=[f.value for f in ScoreFamily],
        help="structure score for hc, ts and ga",
    )

    parser.add_argument(
        "--data",
        required=True,
        help="dataset CSV (header v0,v1,...)",
    )

    parser.add_argument(
        "--kind",
        choices=[k.value for k in datagen.VarKind],
        help="variable kind (default: from sidecar or values)",
    )

    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="seed for randomized steps (default %(default)s)",
    )

    parser.add_argument(
        "--out",
        help="write the learned network here instead of printing it",
    )

    parser.add_argument(
        "--truth",
        help="generating network; report metrics against it",
    )

    bnbench.base.add_learner_arguments(parser)


def resolve_method(name: str, score: Optional[str]) -> MethodId:
    if "-" in name:
        method = MethodId.from_config_str(name)
        if score is not None and method.score_family is not None:
            if method.score_family.value != score:
                raise error.UsageError(
                    f"--score {score} conflicts with method {name}"
                )
        return method
    if name not in _SEARCHES:
        raise error.UsageError(f"invalid method {name!r}")
    if name in ("pc", "iamb"):
        if score is not None:
            raise error.UsageError(f"method {name} takes no score")
        return MethodId.from_config_str(name)
    if score is None:
        raise error.UsageError(f"method {name} needs --score")
    return MethodId.from_columns(name, score)


class Main(bnbench.base.BaseMain):
    def _run(self) -> None:
        args = self.args
        method = resolve_method(args.method, args.score)
        kind = None if args.kind is None else datagen.VarKind(args.kind)
        d = datagen.read_dataset(self.get_path("data", "--data"), kind)
        common.vprint(
            f"{method.value} on {d.m} rows of {d.n} {d.kind.value} variables"
        )
        run = harness.run_method(method, d, self.settings, args.seed)
        if args.out:
            out_path = self.get_path("out", "--out")
            graph.write_dag(out_path, run.dag)
            common.iprint(f"wrote {run.dag.num_arcs} arcs to {out_path}")
        else:
            common.iprint(graph.format_dag(run.dag), end="")
        if run.score_final is not None:
            common.vprint(f"score: {run.score_final:.6f}")
        common.vprint(f"time: {run.ms:.1f} ms")
        if args.truth:
            truth = graph.read_dag(self.get_path("truth", "--truth"))
            c = confusion(truth, run.dag)
            m = metrics(c)
            common.iprint(
                f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} "
                f"hamming={c.hamming}"
            )
            common.iprint(
                "precision={:.4f} recall={:.4f} specificity={:.4f} "
                "accuracy={:.4f}".format(
                    m.precision, m.recall, m.specificity, m.accuracy
                )
            )
