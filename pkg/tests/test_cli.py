import json
import subprocess
import sys

import numpy as np
import pytest

from geomed.cli import main
from geomed.report import ExperimentReport

from conftest import DIAMOND


@pytest.fixture
def diamond_csv(tmp_path):
    path = tmp_path / "diamond.csv"
    np.savetxt(path, DIAMOND, delimiter=",")
    return path


def run_json(argv, capsys):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


class TestMedian:
    @pytest.mark.parametrize("method", ["weiszfeld", "agd", "newton"])
    def test_diamond(self, diamond_csv, capsys, method):
        out = run_json(["median", "--in", str(diamond_csv), "--method", method, "--eps", "1e-3"], capsys)
        row = out["rows"][0]
        assert row["method"] == method
        assert np.linalg.norm(row["point"]) < 1e-3
        assert out["experiment"] == "median"

    def test_csv_output_file(self, diamond_csv, tmp_path):
        dest = tmp_path / "out.csv"
        assert main(["median", "--in", str(diamond_csv), "--format", "csv", "--out", str(dest)]) == 0
        report = ExperimentReport.load(dest)
        assert report.rows[0]["certified_distance"] <= 1e-6

    def test_skip_header(self, tmp_path, capsys):
        path = tmp_path / "h.csv"
        path.write_text("x,y\n1,0\n-1,0\n0,1\n0,-1\n")
        out = run_json(["median", "--in", str(path), "--skip-header"], capsys)
        assert np.linalg.norm(out["rows"][0]["point"]) <= 1e-6

    def test_missing_file(self, tmp_path, capsys):
        assert main(["median", "--in", str(tmp_path / "nope.csv")]) == 2
        assert "input error" in capsys.readouterr().err

    def test_bad_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,zz\n")
        assert main(["median", "--in", str(path)]) == 2

    def test_collinear_newton(self, tmp_path):
        path = tmp_path / "line.csv"
        path.write_text("0,0\n1,1\n2,2\n")
        assert main(["median", "--in", str(path), "--method", "newton"]) == 2

    def test_solver_failure(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        np.savetxt(path, np.random.default_rng(0).standard_normal((30, 4)), delimiter=",")
        assert main(["median", "--in", str(path), "--max-iters", "1", "--eps", "1e-12"]) == 3
        assert "solver failure" in capsys.readouterr().err


class TestMom:
    def test_one_block_is_mean(self, tmp_path, capsys):
        pts = np.random.default_rng(1).standard_normal((12, 3))
        path = tmp_path / "d.csv"
        np.savetxt(path, pts, delimiter=",", fmt="%.17g")
        out = run_json(["mom", "--in", str(path), "--k", "1"], capsys)
        np.testing.assert_array_equal(out["rows"][0]["estimate"], pts.mean(axis=0))

    def test_replicated(self, diamond_csv, capsys):
        out = run_json(["mom", "--in", str(diamond_csv), "--k", "4", "--reps", "3", "--seed", "2"], capsys)
        assert len(out["rows"][0]["estimate"]) == 2

    def test_too_many_blocks(self, diamond_csv):
        assert main(["mom", "--in", str(diamond_csv), "--k", "9"]) == 2


class TestReturns:
    def test_stdout(self, tmp_path, capsys):
        path = tmp_path / "p.csv"
        path.write_text("A,B\n1,1\n2,4\n")
        assert main(["returns", "--in", str(path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "A,B"
        np.testing.assert_allclose([float(x) for x in lines[1].split(",")], [np.log(2), np.log(4)], rtol=1e-15)

    def test_nonpositive_price(self, tmp_path, capsys):
        path = tmp_path / "p.csv"
        path.write_text("1,1\n2,-4\n")
        assert main(["returns", "--in", str(path)]) == 2
        assert "row 2, column 2" in capsys.readouterr().err


class TestExperiments:
    def test_growth_dim(self, capsys):
        out = run_json(["exp", "growth-dim", "--dims", "4,8", "--seed", "1"], capsys)
        assert [r["d"] for r in out["rows"]] == [4, 8]
        assert "slope_q" in out["summary"]

    def test_growth_dim_odd(self):
        assert main(["exp", "growth-dim", "--dims", "5"]) == 2

    def test_compare_prices(self, tmp_path, capsys):
        prices = np.exp(np.cumsum(np.random.default_rng(3).normal(0, 0.01, size=(61, 3)), axis=0))
        path = tmp_path / "p.csv"
        np.savetxt(path, prices, delimiter=",", header="A,B,C", comments="")
        argv = ["exp", "compare", "--in", str(path), "--prices", "--horizon", "10", "--cutoffs", "30,40", "--reps", "0"]
        out = run_json(argv, capsys)
        assert out["parameters"]["T"] == 60
        assert {r["estimator"] for r in out["rows"]} == {"mean", "median", "g-median", "gMOM5", "gMOM10"}

    def test_compare_infeasible(self, tmp_path):
        path = tmp_path / "r.csv"
        np.savetxt(path, np.zeros((20, 2)), delimiter=",")
        assert main(["exp", "compare", "--in", str(path), "--cutoffs", "15", "--horizon", "10"]) == 2

    def test_cert_bench(self, capsys):
        argv = ["exp", "cert-bench", "--family", "gaussian", "--d", "3", "--n", "20", "--eps-list", "1e-2,1e-3"]
        out = run_json(argv, capsys)
        assert len(out["rows"]) == 6
        assert out["summary"]["all_sound"]

    def test_reproducible_output(self, capsys):
        argv = ["exp", "cert-bench", "--d", "3", "--n", "15", "--eps-list", "1e-2", "--format", "csv"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first


def test_module_entry_point(diamond_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "geomed", "median", "--in", str(diamond_csv)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0]["method"] == "newton"


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["median"])
    assert info.value.code == 2
