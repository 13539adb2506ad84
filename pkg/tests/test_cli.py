import subprocess
import sys

import pytest

from cdgarch import cli
from cdgarch.config import reference_config_path
from cdgarch.validation import CriterionResult

COGARCH = reference_config_path().parent / "cogarch.ini"


def _report(out):
    return (out / "report.txt").read_text()


def test_analyze_cogarch_mean(tmp_path):
    assert cli.run(["analyze", "--config", str(COGARCH), "--out", str(tmp_path)]) == 0
    rows = dict(line.split(",", 1) for line in (tmp_path / "stability.csv").read_text().splitlines())
    assert float(rows["M"]) == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert "M = 1.333" in _report(tmp_path)


def test_simulate_euler_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = ["simulate", "--scheme", "euler", "--seed", "7", "--horizon", "5", "--out", str(out)]
        assert cli.run(args) == 0
        outs.append(out)
    for f in ("path_0000.csv", "path_0000.json", "report.txt"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()


def test_resolved_config_reproduces_outputs(tmp_path):
    first = tmp_path / "first"
    assert cli.run(["simulate", "--horizon", "3", "--paths", "2", "--out", str(first)]) == 0
    second = tmp_path / "second"
    resolved = first / "config.resolved.ini"
    assert cli.run(["simulate", "--config", str(resolved), "--out", str(second)]) == 0
    for f in ("path_0000.csv", "path_0001.csv", "path_0001.json"):
        assert (first / f).read_bytes() == (second / f).read_bytes()
    digest = [line for line in _report(first).splitlines() if line.startswith("config_digest")]
    assert digest and digest[0] in _report(second)


def test_report_echoes_defaults(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\neta = 1\nc_mu = 2\nc_nu = 0.5\n")
    assert cli.run(["mean", "--config", str(cfg), "--delta", "0.01", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert "run.panels = 10000  # default" in rep
    assert "run.step = 0.01  # command line" in rep
    assert "noise.lambda_L  # default" in rep


def test_mean_both_solvers(tmp_path):
    args = ["mean", "--solver", "both", "--horizon", "2", "--out", str(tmp_path)]
    assert cli.run(args) == 0
    lines = (tmp_path / "mean.csv").read_text().splitlines()
    assert lines[0] == "t,m,solver"
    assert any(line.endswith(",renewal") for line in lines)
    assert "sup |m_dde - m_renewal|" in _report(tmp_path)


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[model]\neta = 1\nc_mu = 2\nc_nu = 0.5\ncmu = 3\n")
    assert cli.run(["analyze", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "cmu" in capsys.readouterr().err


def test_condition_failure_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\neta = 1\nc_mu = 0.5\nc_nu = 0.5\n")
    assert cli.run(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "c0 > ||f||_1" in capsys.readouterr().err


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        cli.run(["simulate", "--bogus"])
    assert exc.value.code == 2


def test_failed_validation_exits_3(tmp_path, monkeypatch):
    def fake_run_all(self, progress=None):
        res = [CriterionResult(1, "stub", True, "ok"), CriterionResult(2, "stub", False, "bad")]
        for r in res:
            progress(r)
        return res

    monkeypatch.setattr(cli.Battery, "run_all", fake_run_all)
    assert cli.run(["validate", "--out", str(tmp_path)]) == 3
    table = (tmp_path / "validation.csv").read_text().splitlines()
    assert table[-1] == "AC2,,,,,,false"


def test_events_simulation_writes_event_column(tmp_path):
    assert cli.run(["simulate", "--horizon", "5", "--out", str(tmp_path)]) == 0
    header = (tmp_path / "path_0000.csv").read_text().splitlines()[0]
    assert header == "t,x,y,event"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cdgarch", "analyze", "--config", str(COGARCH),
         "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "M = " in proc.stdout
