import json
from pathlib import Path
from typing import List

import pytest

from bnbench import cli, error, graph, results
from bnbench.learn import resolve_method
from bnbench.results import MethodId

FAST = ["--pop", "6", "--gens", "3", "--stall", "5", "--max-iters", "40"]


def simulate(tmp_path: Path, *extra: str) -> int:
    return cli.run(
        [
            "simulate",
            "--nodes",
            "5",
            "--density",
            "0.6",
            "--samples",
            "60",
            "--noise",
            "0.1",
            "--seed",
            "3",
            "--out-dir",
            str(tmp_path),
            *extra,
        ]
    )


def test_missing_operation(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli.run([]) == 1
    assert "missing OPERATION" in capsys.readouterr().out


def test_simulate_writes_network_and_data(tmp_path: Path) -> None:
    assert simulate(tmp_path) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "sim-clean.csv",
        "sim-clean.json",
        "sim-network.txt",
        "sim.csv",
        "sim.json",
    ]
    dag = graph.read_dag(tmp_path / "sim-network.txt")
    assert dag.n == 5
    assert dag.num_arcs == 6
    lines = (tmp_path / "sim.csv").read_text().splitlines()
    assert lines[0] == "v0,v1,v2,v3,v4"
    assert len(lines) == 61
    sidecar = json.loads((tmp_path / "sim.json").read_text())
    assert sidecar["kind"] == "binary"
    assert sidecar["network"] == "sim-network.txt"


def test_simulate_is_seeded(tmp_path: Path) -> None:
    first = tmp_path / "a"
    second = tmp_path / "b"
    first.mkdir()
    second.mkdir()
    assert simulate(first) == 0
    assert simulate(second) == 0
    for name in ("sim.csv", "sim-network.txt"):
        assert (first / name).read_text() == (second / name).read_text()


def test_simulate_rejects_bad_density(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code = cli.run(
        ["simulate", "--nodes", "10", "--density", "0.1"]
        + ["--out-dir", str(tmp_path)]
    )
    assert code == 1
    assert "weakly connected" in capsys.readouterr().out
    assert not list(tmp_path.iterdir())


def test_simulate_preset(tmp_path: Path) -> None:
    code = cli.run(
        ["simulate", "--preset", "smoke", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    networks = sorted(tmp_path.glob("*-network.txt"))
    assert [p.name for p in networks] == [
        "binary-n5-d0.4-r0-network.txt",
        "four-level-n5-d0.4-r0-network.txt",
    ]
    assert len(list(tmp_path.glob("*.csv"))) == 8
    assert (tmp_path / "binary-n5-d0.4-r0-m100-e0.1.csv").is_file()


def test_resolve_method() -> None:
    assert resolve_method("hc", "bic") is MethodId.HC_BIC
    assert resolve_method("ts-aic", None) is MethodId.TS_AIC
    assert resolve_method("ts-aic", "aic") is MethodId.TS_AIC
    assert resolve_method("iamb", None) is MethodId.IAMB
    for name, score in [
        ("hc", None),
        ("pc", "bic"),
        ("hc-bic", "aic"),
        ("anneal", None),
    ]:
        with pytest.raises(error.UsageError):
            resolve_method(name, score)


@pytest.mark.parametrize("method", ["pc", "iamb", "hc-bic", "ts-aic", "ga"])
def test_learn(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], method: str
) -> None:
    assert simulate(tmp_path) == 0
    capsys.readouterr()
    args = ["learn", "--method", method, "--data", str(tmp_path / "sim.csv")]
    if method == "ga":
        args += ["--score", "loglik"]
    args += ["--truth", str(tmp_path / "sim-network.txt")] + FAST
    assert cli.run(args) == 0
    out = capsys.readouterr().out
    assert out.startswith("nodes: 5\n")
    assert "precision=" in out
    assert "tp=" in out


def test_learn_writes_network(tmp_path: Path) -> None:
    assert simulate(tmp_path) == 0
    out = tmp_path / "learned.txt"
    code = cli.run(
        [
            "learn",
            "--method",
            "hc",
            "--score",
            "bic",
            "--data",
            str(tmp_path / "sim.csv"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert graph.read_dag(out).n == 5


def test_learn_errors(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    missing = str(tmp_path / "absent.csv")
    assert cli.run(["learn", "--method", "pc", "--data", missing]) == 1
    assert "missing file" in capsys.readouterr().out
    assert cli.run(["learn", "--method", "hc", "--data", missing]) == 1
    assert "needs --score" in capsys.readouterr().out


def bench(out: Path, *extra: str) -> int:
    return cli.run(
        ["bench", "--preset", "smoke", "--out", str(out)] + FAST + list(extra)
    )


def test_bench_preset(tmp_path: Path) -> None:
    out = tmp_path / "results.csv"
    assert bench(out, "--methods", "pc,hc-bic") == 0
    rows = results.read_results(out)
    assert len(rows) == 16
    assert {r.method for r in rows} == {MethodId.PC, MethodId.HC_BIC}

    assert bench(out, "--methods", "pc,hc-bic", "--methods", "iamb") == 0
    assert len(results.read_results(out)) == 24


def test_bench_config_file(tmp_path: Path) -> None:
    config = tmp_path / "grid.json"
    config.write_text(
        json.dumps(
            {
                "kinds": ["four-level"],
                "ladders": {"4": [30]},
                "densities": [0.6],
                "noise_rates": [0.0],
                "replicates": 2,
                "methods": ["iamb", "ts-bic"],
                "learners": {"stall": 5, "max_iters": 30},
            }
        )
    )
    out = tmp_path / "results.csv"
    args = ["bench", "--config", str(config), "--out", str(out)]
    assert cli.run(args + ["--master-seed", "4"]) == 0
    rows = results.read_results(out)
    assert [(r.cell.replicate, r.method) for r in rows] == [
        (0, MethodId.IAMB),
        (0, MethodId.TS_BIC),
        (1, MethodId.IAMB),
        (1, MethodId.TS_BIC),
    ]


def test_bench_errors(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    out = str(tmp_path / "results.csv")
    assert cli.run(["bench", "--out", out]) == 1
    assert "missing --config or --preset" in capsys.readouterr().out
    both = ["--config", "grid.json", "--preset", "smoke"]
    assert cli.run(["bench", "--out", out] + both) == 1
    assert "not both" in capsys.readouterr().out
    assert bench(tmp_path / "x.csv", "--methods", "hc") == 1
    assert bench(tmp_path / "x.csv", "--alpha", "2") == 1


def write_results(path: Path, methods: str = "pc,iamb,hc-loglik") -> None:
    assert bench(path, "--methods", methods) == 0


def analyze(path: Path, *extra: str) -> int:
    return cli.run(["analyze", "--results", str(path)] + list(extra))


def test_analyze_default_table(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "results.csv"
    write_results(path)
    capsys.readouterr()
    assert analyze(path) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("comparison | metric | test | p-value")
    labels = [line.split(" | ")[0] for line in lines[1:]]
    assert labels == ["discr./contin.", "iamb/hc loglik", "iamb/hc loglik"]


def test_analyze_group_by(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "results.csv"
    write_results(path)
    capsys.readouterr()
    assert analyze(path, "--group-by", "kind", "--metrics", "accuracy") == 0
    lines: List[str] = capsys.readouterr().out.splitlines()
    assert lines[0] == "kind\tcount\taccuracy"
    assert [line.split("\t")[:2] for line in lines[1:]] == [
        ["binary", "12"],
        ["four-level", "12"],
    ]


def test_analyze_plot_data_and_acceptance(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    path = tmp_path / "results.csv"
    write_results(path, "pc")
    plots = tmp_path / "plots"
    assert analyze(path, "--plot-data", str(plots), "--acceptance") == 0
    assert sorted(p.name for p in plots.iterdir()) == [
        "accuracy.csv",
        "hamming.csv",
        "precision.csv",
        "recall.csv",
        "specificity.csv",
    ]
    out = capsys.readouterr().out
    assert "SKIP density effect on accuracy" in out
    assert "comparison |" not in out


def test_analyze_errors(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    assert analyze(tmp_path / "absent.csv") == 1
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(results.RESULT_COLUMNS) + "\n")
    assert analyze(empty) == 1
    assert "has no rows" in capsys.readouterr().out
    path = tmp_path / "results.csv"
    write_results(path)
    assert analyze(path, "--group-by", "accuracy") == 1
