import csv
import io
import json

import pytest

from qpurify import cli
from qpurify.cli import EXIT_OK, EXIT_USAGE, main, parse_range
from qpurify.circuits.constants import export_text


def test_parse_range_inclusive():
    assert parse_range("0.1:0.9:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert len(parse_range("0:1:0.05")) == 21
    assert parse_range("0.5:0.5:0.1") == [0.5]
    for bad in ("0:1", "a:1:0.1", "0:1:0", "1:0:0.1"):
        with pytest.raises(cli.UsageError):
            parse_range(bad)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["verify-3slot", "--gamma-range", "0:1"],
    ["verify-3slot", "--gamma", "1.5"],
    ["verify-3slot", "--gamma", "0.2", "--gamma-range", "0:1:0.5"],
    ["verify-3slot", "--samples", "0"],
    ["verify-nogo", "--gamma", "0"],
    ["verify-3slot", "--format", "xml"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_export_constants(tmp_path):
    out = tmp_path / "c.txt"
    assert main(["export-constants", "--output", str(out)]) == EXIT_OK
    assert out.read_text() == export_text()


def test_verify_3slot_csv_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["verify-3slot", "--gamma-range", "0:1:0.5", "--samples", "10",
                     "--seed", "7", "--format", "csv", "--output", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.DictReader(io.StringIO(paths[0].read_text())))
    assert list(rows[0]) == ["gamma", "primal", "dual", "formula", "circuit", "baseline", "delta"]
    assert [float(r["gamma"]) for r in rows] == [0.0, 0.5, 1.0]
    for r in rows:
        assert abs(float(r["primal"]) - float(r["formula"])) < 1e-6
        assert abs(float(r["circuit"]) - float(r["formula"])) < 1e-9
    assert float(rows[0]["delta"]) == 0.0


def test_verify_nogo_jsonl(capsys):
    assert main(["verify-nogo", "--gamma", "0.3", "--format", "jsonl"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["pass"] is True
    assert abs(rec["full_ico"] - 0.775) < 1e-6


def test_verify_nogo_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "verify_nogo", lambda g, tol: _Rep(ok=False, failures=[]))
    assert main(["verify-nogo", "--gamma", "0.3"]) == cli.EXIT_FAIL
    monkeypatch.setattr(cli, "verify_nogo", lambda g, tol: _Rep(ok=False, failures=["sdp_6: numerical"]))
    assert main(["verify-nogo", "--gamma", "0.3"]) == cli.EXIT_SOLVER


class _Rep:
    def __init__(self, ok, failures):
        self.ok, self.failures = ok, failures

    def record(self):
        return {"gamma": 0.3, "pass": self.ok}


def test_experiment_csv(capsys):
    assert main(["experiment-causal-order", "--gamma", "0"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == ["gamma", "parallel", "sequential", "ico", "baseline"]
    assert len(rows) == 1
    for k in ("parallel", "sequential", "ico", "baseline"):
        assert abs(float(rows[0][k]) - 1) < 1e-6
