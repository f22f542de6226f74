import csv
import json

import pytest

from supcusp import cli


def _run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_json_stdout(capsys):
    code, out, _ = _run(["--cmd", "classify"], capsys)
    assert code == 0
    results = json.loads(out)["results"]
    assert [r["kind"] for r in results] == ["regular-loxodromic"] * 5


def test_classify_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["--cmd", "classify", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert float(rows[0]["t0"]) == pytest.approx(0.7, abs=1e-9)


def test_close_reports_uncertified_exit_code(tmp_path):
    out = tmp_path / "close.csv"
    assert cli.main(["--cmd", "close", "--out", str(out)]) == cli.EXIT_UNCERTIFIED
    rows = list(csv.DictReader(out.open()))
    assert [r["status"] for r in rows] == ["certified"] * 4 + ["uncertified"]


def test_close_single_certified_experiment(tmp_path):
    from supcusp.fixtures import load_data

    exp = load_data("closing_experiments.json")["experiments"][0]
    inp = tmp_path / "one.json"
    inp.write_text(json.dumps(exp))
    out = tmp_path / "one_out.json"
    assert cli.main(["--cmd", "close", "--in", str(inp), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["results"][0]["certified"]


def test_close_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["--cmd", "close", "--out", str(a)])
    cli.main(["--cmd", "close", "--out", str(b), "--jobs", "2"])
    assert a.read_text() == b.read_text()


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"a": 1,,}')
    code, _, err = _run(["--cmd", "classify", "--in", str(bad)], capsys)
    assert code == 1
    assert "bad.json:1:" in err and "malformed JSON" in err


def test_missing_file(capsys):
    code, _, err = _run(["--cmd", "classify", "--in", "/nonexistent.json"], capsys)
    assert code == 1
    assert "error" in err


def test_invalid_tolerance(capsys):
    code, _, _ = _run(["--cmd", "close", "--tol", "-1"], capsys)
    assert code == 1


def test_qeval_ratios_constant(tmp_path):
    out = tmp_path / "q.csv"
    assert cli.main(["--cmd", "qeval", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    re = [float(r["ratio_re"]) for r in rows]
    im = [float(r["ratio_im"]) for r in rows]
    assert max(re) - min(re) < 1e-10 and max(im) - min(im) < 1e-10


def test_fourier_csv_header(capsys):
    code, out, _ = _run(["--cmd", "fourier"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "I,m,re,im"


def test_poincare_json(tmp_path):
    out = tmp_path / "p.json"
    assert cli.main(["--cmd", "poincare", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert len(res) == 2
    assert len(res[0]["shell_norms"]) == 6


def test_verify_subset_table(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["--cmd", "verify", "--out", str(out), "--quad-radial", "48", "--quad-angular", "48"]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 12
    assert all(r["status"] == "pass" for r in rows)
