"""Command-line behavior: exit codes, output layout, determinism, and
atomic writes."""

import json
import math
import os

import numpy as np
import pytest

import qglab.cli as cli
from qglab.fixtures import save_fixture
from qglab.secular import EigenvalueList


@pytest.fixture()
def interval_json(tmp_path):
    path = tmp_path / "interval.json"
    save_fixture("interval", str(path))
    return str(path)


@pytest.fixture()
def star_json(tmp_path):
    path = tmp_path / "star3.json"
    save_fixture("star3", str(path))
    return str(path)


# ------------------------------------------------------ spectrum

def test_spectrum_csv_layout_and_values(interval_json, capsys):
    code = cli.main(["spectrum", "--graph", interval_json, "--count", "5"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "n,lambda,multiplicity"
    first = lines[1].split(",")
    assert int(first[0]) == 0 and int(first[2]) == 1
    assert abs(float(first[1])) < 1e-9
    second = lines[2].split(",")
    assert float(second[1]) == pytest.approx(math.pi ** 2, rel=1e-9)


def test_spectrum_json_document(interval_json, capsys):
    code = cli.main(["spectrum", "--graph", interval_json, "--count", "3",
                     "--format", "json"])
    assert code == cli.EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["method"] == "secular"
    assert doc["certified"] is True
    assert len(doc["values"]) >= 1


def test_spectrum_both_methods_agree(interval_json, capsys):
    code = cli.main(["spectrum", "--graph", interval_json, "--count", "4",
                     "--method", "both"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "n,lambda_secular,lambda_fem,abs_diff"
    for row in lines[1:]:
        parts = row.split(",")
        assert float(parts[3]) < 1e-3


def test_spectrum_is_deterministic(interval_json, tmp_path):
    out1 = tmp_path / "run1.csv"
    out2 = tmp_path / "run2.csv"
    for out in (out1, out2):
        code = cli.main(["spectrum", "--graph", interval_json,
                         "--count", "8", "--output", str(out)])
        assert code == cli.EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_uncertified_run_returns_exit_two(interval_json, monkeypatch):
    fake = EigenvalueList(values=np.array([0.0]),
                          multiplicities=np.array([1]),
                          lambda_max=1.0, weyl_expected=3, certified=False)
    monkeypatch.setattr(cli, "compute_spectrum", lambda g, req: fake)
    code = cli.main(["spectrum", "--graph", interval_json, "--count", "1",
                     "--output", os.devnull])
    assert code == cli.EXIT_UNCERTIFIED


# ------------------------------------------------------ trace-avg

def test_trace_avg_writes_csv_and_plot_companion(star_json, tmp_path):
    out = tmp_path / "trace.csv"
    code = cli.main(["trace-avg", "--graph", star_json, "--count", "12",
                     "--output", str(out)])
    assert code == cli.EXIT_OK
    header = out.read_text().split("\n", 1)[0]
    assert header == "n,lambda_pert,lambda_free,diff,S_N,cesaro"
    plot = (tmp_path / "trace.csv.plot").read_text().strip().split("\n")
    assert len(plot) == 12
    n, s = plot[0].split()
    assert int(n) == 1 and math.isfinite(float(s))


def test_trace_avg_stdout_has_no_plot_companion(star_json, tmp_path, capsys):
    before = set(os.listdir(tmp_path))
    code = cli.main(["trace-avg", "--graph", star_json, "--count", "10"])
    assert code == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("n,lambda_pert")
    assert set(os.listdir(tmp_path)) == before


def test_trace_avg_rejects_small_count(star_json, capsys):
    code = cli.main(["trace-avg", "--graph", star_json, "--count", "5"])
    assert code == cli.EXIT_ERROR
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------ check

def test_check_json_on_stdout_summary_on_stderr(star_json, capsys):
    code = cli.main(["check", "--graph", star_json])
    assert code == cli.EXIT_OK
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    assert doc["conclusion"] == "SpectrumMustDiffer"
    assert captured.err.startswith("conclusion: SpectrumMustDiffer")


def test_check_to_file_prints_summary_on_stdout(star_json, tmp_path, capsys):
    out = tmp_path / "verdict.json"
    code = cli.main(["check", "--graph", star_json, "--output", str(out)])
    assert code == cli.EXIT_OK
    assert json.loads(out.read_text())["phi1"] == pytest.approx(-2.0 / 3.0)
    assert capsys.readouterr().out.startswith("conclusion:")


# ------------------------------------------------------ demo

def test_demo_writes_the_advertised_files(tmp_path, capsys):
    code = cli.main(["demo", "star3", "--output", str(tmp_path)])
    assert code == cli.EXIT_OK
    for suffix in (".json", "-spectrum.csv", "-trace.csv", "-trace.plot",
                   "-check.json"):
        assert (tmp_path / ("star3" + suffix)).exists()
    out = capsys.readouterr().out
    assert "ground state" in out
    assert "rigidity verdict: SpectrumMustDiffer" in out


def test_demo_unknown_name_fails_cleanly(tmp_path, capsys):
    code = cli.main(["demo", "moebius", "--output", str(tmp_path)])
    assert code == cli.EXIT_ERROR
    assert "unknown demo" in capsys.readouterr().err
    assert os.listdir(tmp_path) == []


# ------------------------------------------------------ error paths

def test_missing_graph_file_is_an_error(tmp_path, capsys):
    code = cli.main(["spectrum", "--graph", str(tmp_path / "nope.json"),
                     "--count", "2"])
    assert code == cli.EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_malformed_graph_file_is_an_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"vertices\": []}")
    code = cli.main(["spectrum", "--graph", str(bad), "--count", "2"])
    assert code == cli.EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_failed_write_leaves_no_partial_file(interval_json, tmp_path):
    target_dir = tmp_path / "out"
    target_dir.mkdir()
    target = target_dir / "spec.csv"
    orig_replace = os.replace

    def broken_replace(src, dst):
        raise OSError("disk full")

    os.replace = broken_replace
    try:
        code = cli.main(["spectrum", "--graph", interval_json,
                         "--count", "3", "--output", str(target)])
    finally:
        os.replace = orig_replace
    assert code == cli.EXIT_ERROR
    assert os.listdir(target_dir) == []
