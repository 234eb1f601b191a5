import subprocess
import sys

import pytest

from trimot.cli import EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, main

SUBCOMMANDS = ["trim1d", "match", "stripe", "quantize", "rates", "selftest"]


@pytest.fixture
def two_points(tmp_path):
    paths = {}
    for name, text in (("x", "0.2\n0.8\n"), ("a", "0.0\n0.4\n"), ("b", "0.41\n1.0\n")):
        paths[name] = tmp_path / f"{name}.csv"
        paths[name].write_text(text)
    return paths


def test_trim1d_example(two_points, capsys):
    rc = main(["trim1d", "--n", "2", "--p", "1", "--alpha", "0.5", "--seed", "7",
               "--input-x", str(two_points["x"])])
    out = capsys.readouterr().out
    assert rc == EXIT_OK and "cost 0.13\n" in out


def test_match_example(two_points, tmp_path, capsys):
    rc = main(["match", "--input-x", str(two_points["a"]), "--input-y", str(two_points["b"]),
               "--p", "1", "--alpha", "0.5", "--out", str(tmp_path / "m")])
    out = capsys.readouterr().out
    assert rc == EXIT_OK and "cost 0.01\n" in out
    lines = (tmp_path / "m" / "pairing.csv").read_text().splitlines()
    assert lines[0] == "x_index,y_index,cost" and lines[1].startswith("1,0,")


def test_rates_writes_reports(tmp_path, capsys):
    rc = main(["rates", "--statistic", "untrimmed_1d_cost", "--n-grid", "20,40,80", "--reps", "5",
               "--p", "1", "--seed", "1", "--workers", "2", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["untrimmed_1d_cost_plot.svg", "untrimmed_1d_cost_rows.csv",
                     "untrimmed_1d_cost_slope.csv", "untrimmed_1d_cost_summary.csv"]
    assert "slope" in capsys.readouterr().out


def test_quantize_and_stripe(capsys):
    assert main(["quantize", "--n", "200", "--p", "1"]) == EXIT_OK
    assert "limit constant 0.5" in capsys.readouterr().out
    assert main(["stripe", "--n", "100", "--alpha", "0.9"]) == EXIT_OK
    assert main(["stripe", "--n", "100", "--alpha", "0.9", "--method", "mc",
                 "--mc-draws", "5000"]) == EXIT_OK
    assert main(["stripe", "--n", "27", "--d", "3", "--alpha", "0.9"]) in (EXIT_OK, EXIT_INFEASIBLE)


def test_exit_codes(tmp_path, capsys):
    assert main(["trim1d", "--alpha", "1.5"]) == EXIT_USAGE
    assert main(["trim1d", "--bogus"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["rates", "--statistic", "trim1d_cost", "--n-grid", "10,5,20"]) == EXIT_USAGE
    assert main(["match", "--input-x", str(tmp_path / "missing.csv"),
                 "--input-y", str(tmp_path / "missing.csv")]) == EXIT_IO
    assert main(["stripe", "--n", "256", "--alpha", "0.25"]) == EXIT_INFEASIBLE
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,number\n")
    assert main(["trim1d", "--input-x", str(bad)]) == EXIT_IO


def test_deterministic_across_workers(tmp_path):
    outs = []
    for w in ("1", "3"):
        d = tmp_path / w
        assert main(["rates", "--statistic", "trim1d_cost", "--n-grid", "10,20,30", "--reps", "4",
                     "--workers", w, "--out", str(d)]) == EXIT_OK
        outs.append([(d / f).read_bytes() for f in sorted(p.name for p in d.iterdir())])
    assert outs[0] == outs[1]


def test_selftest_passes(capsys):
    assert main(["selftest"]) == EXIT_OK
    assert "FAIL" not in capsys.readouterr().out


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_smoke(cmd):
    res = subprocess.run([sys.executable, "-m", "trimot", cmd, "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0
    assert "usage: trimot " + cmd in res.stdout
    if cmd not in ("selftest",):
        assert "default" in res.stdout
