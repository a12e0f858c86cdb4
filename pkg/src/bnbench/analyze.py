import argparse
from pathlib import Path

import bnbench.base
from bnbench import analysis, common, error, results

description = """\
Summarize a results CSV.
"""

epilog = """\
Reports (several may be combined; --table1 is the default):

  --table1           one-tailed Mann-Whitney comparisons of the main effects
                     (density, node count, variable kind, method families)
  --group-by FIELDS  metric means per group, e.g. --group-by density,method
  --plot-data DIR    one CSV of (group, metric, value) per metric, grouped
                     by --group-by (default: method,score)
  --acceptance       pass/fail of the reference effects; exits non-zero if
                     any check fails

Comparisons whose groups are absent from the results are skipped.
"""


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--results",
        required=True,
        help="results CSV written by bench",
    )

    parser.add_argument(
        "--table1",
        action="store_true",
        default=False,
        help="print the summary comparison table",
    )

    parser.add_argument(
        "--group-by",
        action="append",
        default=[],
        help="grouping fields, comma separated (from {})".format(
            ", ".join(analysis.GROUP_FIELDS)
        ),
    )

    parser.add_argument(
        "--metrics",
        action="append",
        default=[],
        help="metrics for --group-by and --plot-data",
    )

    parser.add_argument(
        "--plot-data",
        metavar="DIR",
        help="write per-metric distribution files into DIR",
    )

    parser.add_argument(
        "--acceptance",
        action="store_true",
        default=False,
        help="evaluate the acceptance checks",
    )


class Main(bnbench.base.BaseMain):
    def _run(self) -> None:
        args = self.args
        rows = results.read_results(Path(args.results))
        if not rows:
            raise error.InsufficientDataError(f"{args.results} has no rows")
        common.vprint(f"{len(rows)} results in {args.results}")
        group_by = [w for w in common.split_flatten_words(args.group_by) if w]
        metrics = [w for w in common.split_flatten_words(args.metrics) if w]
        wants_table1 = args.table1 or not (
            group_by or args.plot_data or args.acceptance
        )

        if wants_table1:
            reports = analysis.table1(rows)
            common.iprint(analysis.format_table1(reports), end="")

        if group_by:
            chosen = metrics or list(analysis.MEAN_METRICS)
            table = analysis.aggregate(rows, group_by, chosen)
            common.iprint(
                analysis.format_aggregate(table, group_by, chosen), end=""
            )

        if args.plot_data:
            paths = analysis.write_plot_data(
                rows,
                Path(args.plot_data),
                group_by or ["method", "score"],
                metrics or list(analysis.PLOT_METRICS),
            )
            for path in paths:
                common.vprint(f"wrote {path}")

        if args.acceptance:
            checks = analysis.check_acceptance(rows)
            common.iprint(analysis.format_acceptance(checks), end="")
            if any(check.passed is False for check in checks):
                raise error.AbortError("acceptance checks failed")
