import json
import math
import subprocess
import sys

import pytest

from edgekernel import __version__
from edgekernel import fredholm
from edgekernel.cli import main, parse_grid, read_csv_table
from edgekernel.finite_kernels import EnsembleSpec, FiniteKernel, ScalingMap
from edgekernel.fredholm import DeterminantError, gap_matrix
from edgekernel.limit_kernels import GOELimitKernel, k_gse


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    manifest, cols = read_csv_table(out)
    return code, manifest, cols


def floats(col):
    return [float(v) for v in col]


class TestGrid:
    def test_inclusive(self):
        assert parse_grid("-2:1:1") == [-2.0, -1.0, 0.0, 1.0]
        assert parse_grid("0:0:1") == [0.0]
        assert parse_grid("0:1:0.1")[-1] == pytest.approx(1.0)
        assert len(parse_grid("0:1:0.3")) == 4

    def test_lists(self):
        assert parse_grid("-5,-3,2") == [-5.0, -3.0, 2.0]
        assert parse_grid("0.5") == [0.5]

    @pytest.mark.parametrize("bad", ["1:0:1", "0:1:0", "a:b:c", "", "0:1", "nan"])
    def test_bad_grid_is_usage_error(self, capsys, bad):
        code, _, err = run(capsys, "limit", "--ensemble", "goe", "--s-grid", bad)
        assert code == 2 and "error" in err


class TestLimit:
    def test_far_right(self, capsys):
        code, manifest, cols = table(capsys, "limit", "--ensemble", "gue", "--s-grid", "8:9:1")
        assert code == 0
        assert all(abs(f - 1.0) < 1e-9 for f in floats(cols["F"]))
        assert manifest["command"] == "limit" and manifest["version"] == __version__

    def test_single_row_equals_direct(self, capsys):
        _, _, cols = table(capsys, "limit", "--ensemble", "goe", "--s-grid", "0:0:1")
        assert float(cols["F"][0]) == gap_matrix(GOELimitKernel(), 0.0).sqrt_value

    def test_ordering(self, capsys):
        _, _, cols = table(capsys, "limit", "--ensemble", "gse", "--s-grid", "-2:1:1")
        s, F = floats(cols["s"]), floats(cols["F"])
        assert s == sorted(s) and all(b >= a for a, b in zip(F, F[1:]))

    def test_header(self, capsys):
        _, out, _ = run(capsys, "limit", "--ensemble", "gue", "--s-grid", "1")
        lines = out.splitlines()
        assert lines[0] == f"# edgekernel v{__version__}"
        assert lines[1].startswith("# manifest ")
        assert lines[2].split(",")[:2] == ["s", "F"]

    def test_json_mirrors_csv(self, capsys):
        _, _, cols = table(capsys, "limit", "--ensemble", "goe", "--s-grid", "-1,0.5")
        _, out, _ = run(capsys, "limit", "--ensemble", "goe", "--s-grid", "-1,0.5", "--format", "json")
        payload = json.loads(out)
        assert payload["version"] == __version__
        assert payload["columns"]["F"] == floats(cols["F"])
        assert set(payload["columns"]) == set(cols)

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        code, out, _ = run(capsys, "limit", "--ensemble", "gue", "--s-grid", "0", "-o", str(path))
        assert code == 0 and out == ""
        assert path.read_text().startswith("# edgekernel")

    def test_reproducible_from_manifest(self, capsys):
        _, manifest, cols = table(capsys, "limit", "--ensemble", "gse", "--s-grid=-1:0:0.5", "--tol", "1e-9")
        p = manifest["params"]
        _, _, again = table(capsys, "limit", "--ensemble", p["ensemble"], "--s-grid", p["s_grid"],
                            "--tol", repr(p["tol"]), "--m", str(p["m"]), "--rho-mode", p["rho_mode"])
        assert again == cols

    def test_numerical_failure(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise DeterminantError("forced")

        monkeypatch.setattr(fredholm, "gap_matrix", boom)
        code, _, cols = table(capsys, "limit", "--ensemble", "goe", "--s-grid", "0,1")
        assert code == 3
        assert all(st.startswith("failed") for st in cols["status"])
        assert all(math.isnan(f) for f in floats(cols["F"]))


class TestFinite:
    def test_single_gse_eigenvalue(self, capsys):
        _, _, cols = table(capsys, "finite", "--ensemble", "gse", "--N", "3", "--t-grid", "0:0:1")
        assert abs(float(cols["F"][0]) - 0.5) < 1e-8

    def test_gse_order_one_is_empty(self, capsys):
        _, manifest, cols = table(capsys, "finite", "--ensemble", "gse", "--N", "1", "--t-grid", "0:0:1")
        assert manifest["n_eigenvalues"] == 0
        assert abs(float(cols["F"][0]) - 1.0) < 1e-12

    def test_parity(self, capsys):
        code, _, err = run(capsys, "finite", "--ensemble", "goe", "--N", "3", "--t-grid", "0:0:1")
        assert code == 2 and "even N" in err

    def test_oracle_column(self, capsys):
        _, _, cols = table(capsys, "finite", "--ensemble", "gse", "--N", "3", "--t-grid", "2:2:1")
        assert abs(float(cols["F"][0]) - float(cols["oracle"][0])) < 1e-6

    def test_no_oracle_column_for_large_n(self, capsys):
        _, _, cols = table(capsys, "finite", "--ensemble", "goe", "--N", "10", "--t-grid", "3")
        assert "oracle" not in cols


class TestConverge:
    def test_gse(self, capsys):
        code, manifest, cols = table(capsys, "converge", "--ensemble", "gse", "--s", "0", "--N-list", "51,101,201")
        assert code == 0
        errs = floats(cols["abs_err"])
        assert errs[0] > errs[1] > errs[2]
        assert cols["decreasing"] == ["", "true", "true"]
        assert len(set(cols["F_inf"])) == 1
        assert manifest["monotone_decrease"] is True

    def test_matches_unscaled_pipeline(self, capsys):
        _, _, cols = table(capsys, "converge", "--ensemble", "goe", "--s", "-1", "--N-list", "20")
        spec = EnsembleSpec("GOE", 20)
        t = float(ScalingMap(20)(-1.0))
        assert float(cols["t"][0]) == t
        direct = gap_matrix(FiniteKernel(spec, scaled=False), t).sqrt_value
        assert abs(float(cols["F_N"][0]) - direct) < 1e-8

    def test_parity(self, capsys):
        code, _, _ = run(capsys, "converge", "--ensemble", "gse", "--s", "0", "--N-list", "51,100")
        assert code == 2


class TestOracle:
    def test_painleve_matches_limit(self, capsys):
        _, _, p = table(capsys, "oracle", "painleve", "--s", "0")
        _, _, f = table(capsys, "oracle", "painleve", "--s", "0")
        _, _, lim = table(capsys, "limit", "--ensemble", "gue", "--s-grid", "0:0:1")
        assert set(p) == {"s", "F1", "F2", "F4"}
        assert abs(float(p["F2"][0]) - float(lim["F"][0])) < 1e-6
        assert p == f

    def test_painleve_range(self, capsys):
        code, _, _ = run(capsys, "oracle", "painleve", "--s", "-11")
        assert code == 2

    def test_small_n_bit_identical(self, capsys):
        argv = ("oracle", "small-n", "--ensemble", "goe", "--N", "2", "--t", "0")
        assert table(capsys, *argv)[2] == table(capsys, *argv)[2]

    def test_small_n_too_large(self, capsys):
        code, _, _ = run(capsys, "oracle", "small-n", "--ensemble", "goe", "--N", "8", "--t", "0")
        assert code == 2

    def test_mc_seeded(self, capsys):
        argv = ("oracle", "mc", "--ensemble", "gse", "--N", "21", "--samples", "2000", "--seed", "42",
                "--s-grid", "-2:1:1")
        _, m1, a = table(capsys, *argv)
        _, _, b = table(capsys, *argv)
        assert a == b and m1["seed"] == 42
        assert floats(a["cdf"]) == sorted(floats(a["cdf"]))

    def test_calibrate(self, capsys, tmp_path):
        path = tmp_path / "constants.txt"
        code, manifest, cols = table(capsys, "oracle", "calibrate-f4", "--calibration-file", str(path), "--m", "48")
        assert code == 0 and manifest["convention"] == "s"
        assert cols["match"] == ["true", "false", "false"]
        assert "f4_argument_convention=s" in path.read_text()

    def test_calibrate_mismatch_exit(self, capsys, tmp_path):
        code, _, err = run(capsys, "oracle", "calibrate-f4", "--calibration-file", str(tmp_path / "c.txt"),
                           "--tol", "1e-30", "--s-grid", "0", "--m", "32")
        assert code == 4 and "mismatch" in err


class TestKernel:
    def test_limit_gse_s(self, capsys):
        _, _, cols = table(capsys, "kernel", "limit", "--ensemble", "gse", "--entry", "S", "--grid", "0")
        assert float(cols["S"][0]) == pytest.approx(k_gse(0.0, 0.0).e11, abs=1e-15)

    def test_goe_is_includes_eps(self, capsys):
        _, _, cols = table(capsys, "kernel", "finite", "--ensemble", "goe", "--N", "100", "--entry", "IS",
                           "--grid", "0:1:1")
        vals = {(float(x), float(y)): float(v) for x, y, v in zip(cols["x"], cols["y"], cols["IS"])}
        kern = FiniteKernel(EnsembleSpec("GOE", 100))
        raw = kern.blocks([0.0, 1.0], [0.0, 1.0])[2]
        assert vals[(1.0, 0.0)] - vals[(0.0, 1.0)] == pytest.approx(raw[1, 0] - raw[0, 1] - 1.0, abs=1e-14)

    def test_compare_limit(self, capsys):
        _, manifest, cols = table(capsys, "kernel", "finite", "--ensemble", "gse", "--N", "101", "--grid", "-1:1:1",
                                  "--compare-limit")
        assert set(cols) == {"x", "y", "e11", "e12", "e21", "e22"}
        assert 0 < manifest["max_abs_diff_vs_limit"] < 0.05

    def test_finite_needs_n(self, capsys):
        code, _, _ = run(capsys, "kernel", "finite", "--ensemble", "gse", "--grid", "0")
        assert code == 2

    def test_bad_entry(self):
        with pytest.raises(SystemExit) as exc:
            main(["kernel", "limit", "--ensemble", "gse", "--entry", "XX", "--grid", "0"])
        assert exc.value.code == 2

    def test_emit_plot(self, capsys, tmp_path):
        stem = tmp_path / "dump"
        code, _, _ = run(capsys, "kernel", "limit", "--ensemble", "goe", "--grid", "-1:1:0.5",
                         "--emit-plot", str(stem))
        assert code == 0
        script = (tmp_path / "dump.py").read_text()
        compile(script, "dump.py", "exec")
        assert "dump.csv" in script
        _, cols = read_csv_table((tmp_path / "dump.csv").read_text())
        assert len(cols["x"]) == 25


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "edgekernel", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout


def test_negative_grid_without_equals(capsys):
    code, _, cols = table(capsys, "limit", "--ensemble", "gue", "--s-grid", "-1:0:1")
    assert code == 0 and floats(cols["s"]) == [-1.0, 0.0]
