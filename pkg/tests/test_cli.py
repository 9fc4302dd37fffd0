import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rssinfer.cli import main
from rssinfer.sampling import load_dataset


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def data_file(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, _, _ = run(capsys, "simulate", "--scheme", "rss", "-k", "3", "--design", "6,5,4",
                     "--seed", "7", "-o", str(path))
    assert code == 0
    return path


def test_simulate_stdout_matches_file(capsys, data_file):
    code, out, _ = run(capsys, "simulate", "--scheme", "rss", "-k", "3", "--design", "6,5,4", "--seed", "7")
    assert code == 0
    assert out == data_file.read_text()
    ds = load_dataset(data_file)
    assert ds.n == 15 and ds.k == 3


def test_simulate_jps_json(capsys):
    code, out, _ = run(capsys, "simulate", "--scheme", "jps", "-k", "2", "-n", "9",
                       "--dist", "normal", "--format", "json")
    assert code == 0
    assert len(json.loads(out)["observations"]) == 9


def test_estimate(capsys, data_file):
    code, out, _ = run(capsys, "estimate", "-i", str(data_file))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "naive", "S", "M", "L"]
    assert len(rows) == 16
    assert float(rows[-1][4]) == 1.0
    code, out, _ = run(capsys, "estimate", "-i", str(data_file), "--estimators", "L", "--format", "json")
    doc = json.loads(out)
    assert list(doc["estimators"]) == ["L"] and len(doc["estimators"]["L"]) == 16


def test_estimate_skips_undefined_stratified(capsys, caplog, tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x,rank,set_size\n0.1,1,2\n0.5,1,2\n")
    code, out, _ = run(capsys, "estimate", "-i", str(path))
    assert code == 0
    assert out.splitlines()[0] == "x,naive,M,L"
    assert "stratified estimator skipped" in caplog.text


def test_interval_and_pvalue(capsys, data_file):
    code, out, _ = run(capsys, "interval", "--counts", "5,5", "--alpha", "0.1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 11 and float(rows[0]["lower"]) == 0.0
    code, out, _ = run(capsys, "interval", "-i", str(data_file), "--format", "json")
    assert len(json.loads(out)["rows"]) == 16
    code, out, _ = run(capsys, "pvalue", "--counts", "2,1", "--p0", "0.5", "--y", "1", "--format", "json")
    doc = json.loads(out)
    assert doc["pvalue_ge"] == pytest.approx(0.34375)
    code, out, _ = run(capsys, "pvalue", "-i", str(data_file), "--p0", "0.5", "--x", "0.5")
    assert code == 0 and out.startswith("y,p0,pvalue_ge,pvalue_le")


def test_band(capsys, data_file):
    code, out, _ = run(capsys, "band", "--counts", "20,20", "--Z", "M", "--reps", "2000", "--format", "json")
    assert code == 0
    assert 0.1 < json.loads(out)["kappa"] < 0.4
    code, out, _ = run(capsys, "band", "-i", str(data_file), "--Z", "L", "--reps", "1000")
    assert code == 0 and out.startswith("x,lower,estimate,upper")
    code, out, _ = run(capsys, "band", "--sweep-k2", "4", "--reps", "1000")
    assert code == 0 and len(out.splitlines()) == 6


def test_efficiency(capsys):
    code, out, _ = run(capsys, "efficiency", "-k", "2", "--grid", "9")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    assert float(rows[4]["t"]) == 0.5 and float(rows[4]["E_M"]) == pytest.approx(1.0)
    code, out, _ = run(capsys, "efficiency", "-k", "3", "--pi", "0.5,0.3,0.2", "--format", "json")
    assert len(json.loads(out)["t"]) == 99


def test_errors_plain_and_json(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,rank,set_size\n0.1,1,2\n0.2,9,2\n")
    code, out, err = run(capsys, "estimate", "-i", str(bad))
    assert code == 1 and out == ""
    assert "line 3" in err
    code, out, err = run(capsys, "estimate", "-i", str(bad), "--error-json")
    doc = json.loads(err)
    assert doc["error"] == "ParseError" and doc["line"] == 3
    code, _, err = run(capsys, "efficiency", "-k", "2", "--pi", "0.5,0.6")
    assert code == 1 and "sum" in err
    code, _, err = run(capsys, "band", "--counts", "5,5", "--reps", "10")
    assert code == 1 and "replications" in err
    code, _, err = run(capsys, "estimate", "-i", str(tmp_path / "missing.csv"))
    assert code == 1


def test_no_partial_output_file(capsys, tmp_path):
    out = tmp_path / "out.csv"
    code, _, _ = run(capsys, "interval", "--counts", "5,5", "-i", "x.csv", "-o", str(out))
    assert code == 1 and not out.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rssinfer", "efficiency", "-k", "1", "--grid", "3"],
                          capture_output=True, text=True, check=True)
    vals = np.array([[float(v) for v in line.split(",")] for line in proc.stdout.splitlines()[1:]])
    np.testing.assert_allclose(vals[:, 6], 1.0)
