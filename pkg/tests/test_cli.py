import subprocess
import sys

import numpy as np
import pytest

from bkmonitor import corpus
from bkmonitor.cli import cli_main
from bkmonitor.csvio import read_error_trace


@pytest.fixture
def model_path(tmp_path):
    def get(name):
        p = tmp_path / f"{name}.fpm"
        p.write_text(corpus.path(name).read_text())
        return str(p)
    return get


def test_analyze_flip(model_path, capsys):
    assert cli_main(["analyze", "--model", model_path("flip2")]) == 0
    out = capsys.readouterr().out
    assert "gamma_min = 0.2\n" in out
    assert "gamma_star = 0.2" in out


def test_simulate_monitor_trivial(model_path, tmp_path):
    m = model_path("coupled4")
    t, e = str(tmp_path / "t.csv"), str(tmp_path / "e.csv")
    assert cli_main(["simulate", "--model", m, "--steps", "50", "--seed", "3", "--out", t]) == 0
    assert cli_main(["monitor", "--model", m, "--partition", "trivial", "--trajectory", t, "--out", e]) == 0
    cols = read_error_trace(e)
    assert cols["kl"].size == 51
    np.testing.assert_array_equal(cols["kl"], 0.0)


def test_monitor_model_partition(model_path, tmp_path):
    m = model_path("coupled4")
    t, e = str(tmp_path / "t.csv"), str(tmp_path / "e.csv")
    cli_main(["simulate", "--model", m, "--steps", "20", "--out", t])
    assert cli_main(["monitor", "--model", m, "--trajectory", t, "--out", e]) == 0
    assert open(e).readline().strip() == "t,kl,l1,eps,maxlog,l1_left,l1_right"


def test_experiment_outputs(model_path, tmp_path):
    out = tmp_path / "exp"
    args = ["experiment", "--model", model_path("coupled4"), "--partitions", "A|B|C|D;model",
            "--steps", "30", "--trials", "2", "--seed", "1", "--out", str(out)]
    assert cli_main(args) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["summary.csv", "trace_p0_trial0.csv", "trace_p0_trial1.csv",
                     "trace_p1_trial0.csv", "trace_p1_trial1.csv"]
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("partition,trials,steps,mean_kl")
    assert lines[1].startswith("A|B|C|D,2,30,") and lines[2].startswith("model,2,30,")


@pytest.mark.parametrize("suite", ["thm3", "thm45", "fact1", "metrics"])
def test_verify(suite, capsys):
    assert cli_main(["verify", "--suite", suite, "--trials", "100", "--seed", "7"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert cli_main([]) == 2
    assert cli_main(["verify", "--suite", "nope"]) == 2
    assert cli_main(["simulate", "--model", "x.fpm", "--steps", "ten", "--out", "t.csv"]) == 2
    assert "error" in capsys.readouterr().err


def test_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.fpm"
    bad.write_text("var A 2\ncpt A <-\n0.5 0.6\n")
    assert cli_main(["analyze", "--model", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line 3" in err and "row 0" in err
    assert cli_main(["analyze", "--model", str(tmp_path / "missing.fpm")]) == 1


def test_module_entry_point(model_path):
    res = subprocess.run([sys.executable, "-m", "bkmonitor", "analyze", "--model", model_path("hmm1")],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "gamma_min = 0.3" in res.stdout
