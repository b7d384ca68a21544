import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from quasinormal.cli import main
from quasinormal.core import OperatorTuple, SubspaceBasis
from quasinormal.models import gallery_entry
from quasinormal.tuplefile import dumps_subspace, write_tuple


@pytest.fixture
def files(tmp_path):
    def put(name, T, expected=None):
        p = tmp_path / f"{name}.json"
        write_tuple(p, T, name, expected)
        return str(p)
    return put


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestClassify:
    def test_jordan(self, files, capsys):
        e = gallery_entry("jordan2")
        code, out, _ = run(["classify", files(e.name, e.T, e.expected)], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["flags"]["spherically_qn"] is False
        assert doc["expected_mismatches"] == {}

    def test_diag_normal_all_true(self, files, capsys):
        e = gallery_entry("diag-normal-2")
        code, out, _ = run(["classify", files(e.name, e.T)], capsys)
        assert code == 0 and all(json.loads(out)["flags"].values())

    def test_csv_and_out_file(self, files, tmp_path, capsys):
        e = gallery_entry("diag-normal-2")
        out = tmp_path / "r.csv"
        code, _, _ = run(["classify", files(e.name, e.T), "--csv", "--out", str(out)], capsys)
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert code == 0
        assert {r["flag"] for r in rows} >= {"commuting", "spherically_qn"}

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"d": 1, "dim": 2}')
        code, _, err = run(["classify", str(bad)], capsys)
        assert code == 2 and "error" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(["classify", str(tmp_path / "none.json")], capsys)
        assert code == 2

    def test_tol_flag(self, files, capsys):
        # [T*, T] = diag(eps^2, -eps^2)
        T = OperatorTuple([np.array([[1.0, 1e-3], [0.0, 1.0]])])
        path = files("near", T)
        _, out_tight, _ = run(["classify", path], capsys)
        _, out_loose, _ = run(["classify", path, "--tol", "1e-3"], capsys)
        assert not json.loads(out_tight)["flags"]["normal_tuple"]
        assert json.loads(out_loose)["flags"]["normal_tuple"]


def test_hierarchy_violation_exit_code(files, capsys, monkeypatch):
    import quasinormal.cli as cli
    from quasinormal.classify import classify as real

    def broken(T, tol):
        rep = real(T, tol)
        rep.flags["spherically_qn"] = False
        return rep
    monkeypatch.setattr(cli, "classify", broken)
    code, _, err = run(["classify", files("d", gallery_entry("diag-normal-2").T)], capsys)
    assert code == 3 and "hierarchy" in err


class TestKoszul:
    def test_auto_grid(self, files, capsys):
        T = OperatorTuple([np.diag([1, 2]), np.diag([3, 4])])
        code, out, _ = run(["koszul", files("dd", T), "--auto"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
                           "exact", "h_0", "h_1", "h_2"]
        body = rows[1:]
        assert [r[4] for r in body[:2]] == ["false", "false"]
        assert {(float(r[0]), float(r[2])) for r in body[:2]} == {(1, 3), (2, 4)}
        assert all(r[4] == "true" for r in body[2:])

    def test_grid_file_keeps_order(self, files, tmp_path, capsys):
        g = tmp_path / "g.json"
        g.write_text("[[[5, 0]], [[0, 0]], [[1, 0]]]")
        path = files("jordan2", gallery_entry("jordan2").T)
        code, out, _ = run(["koszul", path, "--grid", str(g)], capsys)
        rows = list(csv.reader(io.StringIO(out)))[1:]
        assert code == 0
        assert [r[0] for r in rows] == ["5.0", "0.0", "1.0"]
        assert [r[2] for r in rows] == ["true", "false", "true"]

    def test_non_commuting(self, files, capsys):
        J = np.array([[0, 1], [0, 0]])
        code, _, err = run(["koszul", files("nc", OperatorTuple([J, J.T]))], capsys)
        assert code == 4 and "commuting" in err


class TestSuite:
    def test_charact(self, capsys):
        code, out, _ = run(["theorem-suite", "--suite", "charact", "--trials", "30"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["suite"] == "charact" and doc["trials"] == 30 and doc["failures"] == []

    def test_theta_laws(self, capsys):
        code, out, _ = run(["theorem-suite", "--suite", "theta-laws", "--trials", "20"], capsys)
        assert code == 0 and json.loads(out)["failures"] == []

    def test_unknown(self, capsys):
        code, _, err = run(["theorem-suite", "--suite", "nope"], capsys)
        assert code == 2 and "unknown" in err

    def test_conjecture_writes_candidates(self, tmp_path, capsys):
        cands = tmp_path / "c.json"
        log = tmp_path / "log.json"
        code, out, _ = run(["theorem-suite", "--suite", "conjecture", "--trials", "40",
                            "--candidates", str(cands), "--log", str(log)], capsys)
        assert code == 0
        assert json.loads(cands.read_text()) == []
        assert json.loads(out)["candidates"] == 0
        assert json.loads(log.read_text())["suite"] == "conjecture"


class TestExtensionReport:
    def _n(self, files):
        return files("N", OperatorTuple([np.diag([1, 2]), np.diag([3, 4])]))

    def test_diag(self, files, tmp_path, capsys):
        sub = tmp_path / "h.json"
        sub.write_text(dumps_subspace(SubspaceBasis.coordinate(2, [0])))
        code, out, _ = run(["extension-report", self._n(files), "--subspace", str(sub)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["theta_block"]["block_diagonal"]
        assert doc["invertibility"]["agree"]
        assert doc["A_norm"] == 0

    def test_not_invariant(self, files, tmp_path, capsys):
        sub = tmp_path / "h.json"
        sub.write_text('{"dim": 2, "columns": [[[1, 0], [1, 0]]]}')
        code, _, err = run(["extension-report", self._n(files), "--subspace", str(sub)], capsys)
        assert code == 5 and "residual" in err


def test_gallery_export(tmp_path, capsys):
    code, _, _ = run(["gallery", "--outdir", str(tmp_path), "--name", "jordan2"], capsys)
    assert code == 0
    assert [p.name for p in tmp_path.iterdir()] == ["jordan2.json"]
    code, out, _ = run(["gallery", "--list"], capsys)
    assert "hardy-d2-N4" in out


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quasinormal", "theorem-suite",
                           "--suite", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
