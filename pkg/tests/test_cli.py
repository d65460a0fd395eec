import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import GAU_WU, J4
from nrflat import cli
from nrflat.fileio import dumps, matrix_to_json
from nrflat.verify import CriterionResult


@pytest.fixture
def gw_file(tmp_path):
    path = tmp_path / "gw.json"
    path.write_text(dumps(matrix_to_json(GAU_WU)))
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_gau_wu(gw_file, tmp_path, capsys):
    out_json = tmp_path / "r.json"
    code, _, _ = run(["analyze", gw_file, "--out-json", out_json, "--n-phi", 1024], capsys)
    assert code == 0
    doc = json.loads(out_json.read_text())
    assert len(doc["flats"]) == 2
    assert doc["symmetry_axis"] == pytest.approx(math.pi / 2, abs=1e-9)
    assert doc["cross_check"]["matched"] is True
    assert doc["input"]["dim"] == 4


def test_analyze_to_stdout_is_deterministic(gw_file, capsys):
    _, first, _ = run(["analyze", gw_file, "--n-phi", 720], capsys)
    _, second, _ = run(["analyze", gw_file, "--n-phi", 720], capsys)
    assert first == second
    assert json.loads(first)["flat_angle"] == pytest.approx(2 * math.asin(math.sqrt(5) / 4))


def test_analyze_zero_and_disk(tmp_path, capsys):
    for name, a in (("zero", np.zeros((4, 4))), ("j4", J4)):
        path = tmp_path / f"{name}.json"
        path.write_text(dumps(matrix_to_json(a)))
        csv_path = tmp_path / f"{name}.csv"
        code, out, _ = run(["analyze", path, "--n-phi", 720, "--out-csv", csv_path], capsys)
        assert code == 0
        assert json.loads(out)["flats"] == []
        rows = np.loadtxt(csv_path, delimiter=",", skiprows=1)
        if name == "j4":
            r = np.hypot(rows[:, 2], rows[:, 3])
            assert np.max(np.abs(r - math.cos(math.pi / 5))) <= 1e-12


def test_analyze_exports(gw_file, tmp_path, capsys):
    csv1, svg = tmp_path / "b.csv", tmp_path / "b.svg"
    args = ["analyze", gw_file, "--n-phi", 720, "--out-csv", csv1, "--out-svg", svg]
    assert run(args, capsys)[0] == 0
    first = csv1.read_bytes()
    assert run(args, capsys)[0] == 0
    assert csv1.read_bytes() == first
    assert svg.read_text().startswith("<?xml")


@pytest.mark.parametrize("content, fragment", [
    ('{"dim": 2, "re": [[1, 2], [3]]}', "row 1 has 1 entries"),
    ('{"dim": 2,\n "re": [[1, 2], [3, 4]', ":2:"),
])
def test_analyze_bad_input_exits_2(tmp_path, capsys, content, fragment):
    path = tmp_path / "bad.json"
    path.write_text(content)
    out_json = tmp_path / "r.json"
    code, out, err = run(["analyze", path, "--out-json", out_json], capsys)
    assert code == 2
    assert fragment in err
    assert not out_json.exists()


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(["analyze", tmp_path / "nope.json"], capsys)
    assert code == 2
    assert "nope.json" in err


def test_bad_radius_exits_2(gw_file, capsys):
    assert run(["analyze", gw_file, "--radius", "-1"], capsys)[0] == 2


def test_cross_check_mismatch_exits_3(gw_file, tmp_path, capsys, monkeypatch):
    real = cli.analyze

    def broken(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.matched = False
        rep.discrepancies = ["forced"]
        return rep

    monkeypatch.setattr(cli, "analyze", broken)
    out_json = tmp_path / "r.json"
    code, _, err = run(["analyze", gw_file, "--n-phi", 720, "--out-json", out_json], capsys)
    assert code == 3
    assert "forced" in err
    # The report is still written so the mismatch can be inspected.
    assert out_json.exists()


def test_family_maximal(capsys):
    code, out, _ = run(["family", "--d", 1, "--theta", 2.0943951, "--maximal"], capsys)
    assert code == 0
    assert "L = 1\n" in out


def test_family_from_k(capsys, tmp_path):
    k = math.sqrt(1 - math.sqrt(3) / 2)
    out_json = tmp_path / "f.json"
    code, out, _ = run(["family", "--k", repr(k), "--out-json", out_json], capsys)
    assert code == 0
    doc = json.loads(out_json.read_text())
    assert doc["params"]["theta"] == pytest.approx(math.pi / 6, abs=1e-12)
    assert f"angle between flat lines = {math.pi / 6:.12g}" in out


def test_family_writes_matrix_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    args = ["family", "--d", 1, "--theta", 60, "--x", 1, "--y", 1, "--degrees",
            "--out-matrix", path]
    assert run(args, capsys)[0] == 0
    code, out, _ = run(["analyze", path, "--n-phi", 720], capsys)
    assert code == 0
    flats = json.loads(out)["flats"]
    assert len(flats) == 2
    assert all(f["distance"] == pytest.approx(1.0, abs=1e-9) for f in flats)


@pytest.mark.parametrize("argv, fragment", [
    (["--d", 1, "--theta", 1, "--x", 2.5, "--y", 1], "0 < x < 2d"),
    (["--d", 1, "--theta", 4, "--x", 1, "--y", 1], "0 < theta < pi"),
    (["--d", 1, "--theta", 1, "--x", 1, "--y", 5], "y must satisfy"),
    (["--k", 2], "0 < k < sqrt(2)"),
    (["--k", 0.5, "--d", 1], "cannot be combined"),
    (["--d", 1, "--theta", 1], "needs both --x and --y"),
    (["--theta", 1, "--maximal"], "give exactly one of"),
])
def test_family_invalid_parameters_exit_2(capsys, argv, fragment):
    code, _, err = run(["family", *argv], capsys)
    assert code == 2
    assert fragment in err


def test_boundary_command(gw_file, tmp_path, capsys):
    out_json = tmp_path / "b.json"
    code, out, _ = run(["boundary", gw_file, "--n-phi", 4096, "--out-json", out_json], capsys)
    assert code == 0
    assert out.startswith("phi,support,x,y,gap\n")
    doc = json.loads(out_json.read_text())
    assert len(doc["flats"]) == 2
    assert doc["symmetry_axis"] == pytest.approx(math.pi / 2, abs=1e-9)


def test_verify_random_suite(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("NR_THREADS", "1")
    out_json = tmp_path / "v.json"
    code, out, _ = run(["verify", "--suite", "random", "--samples", 12, "--out-json", out_json],
                       capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split("\t")[:3] == ["criterion", "status", "seconds"]
    assert lines[1].startswith("7\tPASS\t")
    doc = json.loads(out_json.read_text())
    assert doc["passed"] is True and doc["samples"] == 12


def test_verify_failure_exits_1(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [
        CriterionResult(7, "forced", False)])
    assert run(["verify", "--suite", "random"], capsys)[0] == 1


def test_invalid_thread_setting_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("NR_THREADS", "many")
    code, _, err = run(["verify", "--suite", "random", "--samples", 1], capsys)
    assert code == 2
    assert "NR_THREADS" in err


def test_usage_errors_from_argparse(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["analyze"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["analyze", "x.json", "--n-phi", "10"])


def test_entry_point_module():
    proc = subprocess.run([sys.executable, "-m", "nrflat.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("nrflat ")
