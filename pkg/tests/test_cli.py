import csv
import io
import json
import subprocess
import sys

import pytest

from mahlerlim.cli import dumps, main
from mahlerlim.experiments import reference_value


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestMeasure:
    def test_jensen_root_on_circle(self, capsys):
        d = run_json(capsys, "measure", "--kind", "classic", "--poly", "Z1-1", "--method", "jensen")
        assert d["value"] == 0.0 and d["method"] == "JensenExact"
        assert set(d) == {"value", "error", "method", "detail"}

    def test_prod_circle(self, capsys):
        d = run_json(capsys, "measure", "--kind", "prod", "--poly", "Z1-1", "--poly", "Z1-1",
                     "--poly", "Z1-1", "--method", "circle")
        assert d["value"] == pytest.approx(reference_value("prod-(z-1)^3"), abs=1e-6)

    def test_jensen_needs_one_variable(self, capsys):
        code, out, err = run(capsys, "measure", "--kind", "classic", "--poly", "Z1+Z2+1", "--method", "jensen")
        assert code == 3 and out == ""
        assert "method requires 1 variable" in err and err.count("\n") == 1

    def test_default_method_per_kind(self, capsys):
        assert run_json(capsys, "measure", "--poly", "2*Z1+1")["method"] == "JensenExact"
        assert run_json(capsys, "measure", "--kind", "max", "--poly", "Z1+1", "--poly", "Z1-2")["method"] == "CircleQuadrature"
        d = run_json(capsys, "measure", "--poly", "Z1+Z2+1", "--samples", "4096", "--shifts", "4")
        assert d["method"] == "TorusQMC" and d["value"] == pytest.approx(0.3231, abs=0.02)

    def test_boyd_lawton(self, capsys):
        d = run_json(capsys, "measure", "--poly", "Z1+Z2+1", "--method", "boyd-lawton", "--b", "40")
        assert d["value"] == pytest.approx(reference_value("classic-linear-2"), abs=1e-3)

    def test_boyd_lawton_needs_b(self, capsys):
        assert run(capsys, "measure", "--poly", "Z1+Z2+1", "--method", "boyd-lawton")[0] == 2

    def test_poly_from_file(self, capsys, tmp_path):
        f = tmp_path / "polys.txt"
        f.write_text("# three factors\nZ1-1\nZ1-1\n\nZ1-1\n")
        d = run_json(capsys, "measure", "--kind", "prod", "--poly", f"@{f}")
        assert d["value"] == pytest.approx(-1.80308535, abs=1e-6)

    @pytest.mark.parametrize("argv", [
        ["measure", "--poly", "Z1+"],
        ["measure", "--poly", "Z0"],
        ["measure", "--kind", "classic", "--poly", "Z1", "--poly", "Z1"],
        ["measure", "--poly", "Z1", "--method", "simpson"],
        ["measure", "--poly", "Z1+Z2", "--samples", "0"],
        ["measure", "--poly", "@/nonexistent/file"],
        ["measure"],
        ["frobnicate"],
        [],
    ])
    def test_usage_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and err.startswith("mahlerlim: error:")

    @pytest.mark.parametrize("poly", ["0", "Z1 - Z1"])
    def test_zero_polynomial_is_computation_error(self, capsys, poly):
        assert run(capsys, "measure", "--poly", poly)[0] == 3


class TestHeight:
    def test_examples(self, capsys):
        assert run(capsys, "height", "--matrix", "1;2")[1] == '{"height":2,"witness":[2,-1]}\n'
        assert run(capsys, "height", "--matrix", "1,0;0,1")[1] == '{"height":"infinite","witness":null}\n'
        assert run_json(capsys, "height", "--matrix", "1,1;4,4;16,16")["height"] == 4

    @pytest.mark.parametrize("text", ["1,2;3", "a;b", "", "1;;2"])
    def test_malformed(self, capsys, text):
        assert run(capsys, "height", "--matrix", text)[0] == 2


class TestSubstitute:
    @pytest.mark.parametrize("poly, matrix, expected", [
        ("Z1+Z2+1", "1;1", "2*Z1 + 1"),
        ("Z1-Z2", "1;1", "0"),
        ("Z1+Z2", "1;-1", "Z1^-1 + Z1"),
    ])
    def test_examples(self, capsys, poly, matrix, expected):
        code, out, _ = run(capsys, "substitute", "--poly", poly, "--matrix", matrix)
        assert code == 0 and out == expected + "\n"

    def test_dimension_mismatch(self, capsys):
        assert run(capsys, "substitute", "--poly", "Z1+Z2+Z3", "--matrix", "1;1")[0] == 2


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConverge:
    def test_monomial(self, capsys):
        code, out, _ = run(capsys, "converge", "--poly", "Z1*Z2", "--b-list", "2,3,5", "--reference", "0")
        rows = read_csv(out)
        assert code == 0 and [r["value"] for r in rows] == ["0.0"] * 3
        assert list(rows[0]) == ["b", "mu", "m_vars", "value", "error", "reference", "deviation", "status"]

    def test_linear_3(self, capsys):
        code, out, _ = run(capsys, "converge", "--poly", "Z1+Z2+Z3+1", "--b-start", "10", "--b-end", "50",
                           "--b-step", "20", "--reference", "0.4262790")
        rows = read_csv(out)
        assert [r["b"] for r in rows] == ["10", "30", "50"]
        assert float(rows[-1]["deviation"]) < 0.01 and rows[-1]["mu"] == "50"

    def test_start_after_end(self, capsys):
        assert run(capsys, "converge", "--poly", "Z1+Z2+1", "--b-start", "9", "--b-end", "3")[0] == 2

    @pytest.mark.parametrize("extra", [["--b-list", "3,3"], ["--b-list", "x"], ["--reference", "big"],
                                       ["--family", "matrix", "--m", "1"], ["--b-step", "0"]])
    def test_bad_flags(self, capsys, extra):
        assert run(capsys, "converge", "--poly", "Z1+Z2+1", *extra)[0] == 2

    def test_skipped_row(self, capsys):
        code, out, _ = run(capsys, "converge", "--poly", "Z1^2-Z2", "--b-list", "2,3")
        rows = read_csv(out)
        assert rows[0]["status"] == "skipped" and rows[0]["value"] == ""
        assert rows[1]["status"] == "ok" and rows[1]["value"] != ""

    def test_all_skipped(self, capsys):
        code, out, err = run(capsys, "converge", "--poly", "Z1^2-Z2", "--b-list", "2")
        assert code == 3 and out == "" and err

    def test_matrix_family_json_auto_reference(self, capsys):
        rows = run_json(capsys, "converge", "--poly", "Z1+Z2+1", "--family", "matrix", "--m", "2",
                        "--b-list", "4,8", "--samples", "8192", "--shifts", "4", "--reference", "auto",
                        "--format", "json")
        assert [r["m_vars"] for r in rows] == [2, 2]
        assert rows[0]["reference"] == pytest.approx(0.3231, abs=0.02)
        assert all(r["deviation"] == pytest.approx(abs(r["value"] - r["reference"]), abs=1e-11) for r in rows)


class TestVerify:
    def test_fast_text(self, capsys):
        code, out, _ = run(capsys, "verify", "--fast")
        assert code == 0 and "prod-(z-1)^3" in out and "FAIL" not in out

    def test_json(self, capsys):
        d = run_json(capsys, "verify", "--format", "json")
        assert d["passed"] and d["mode"] == "fast"
        case = next(c for c in d["cases"] if c["name"] == "classic-linear-3")
        assert {"computed", "reference", "tolerance"} <= set(case)

    def test_fast_and_full_exclusive(self, capsys):
        assert run(capsys, "verify", "--fast", "--full")[0] == 2


class TestConfigAndOutput:
    def test_config_file_flags_win(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# defaults\nkind = prod\nmethod = circle\npoly = Z1-1\n")
        d = run_json(capsys, "--config", str(cfg), "measure", "--kind", "classic")
        assert d["method"] == "CircleQuadrature" and abs(d["value"]) < 1e-10

    def test_bad_config_line(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("kind\n")
        assert run(capsys, "--config", str(cfg), "measure", "--poly", "Z1")[0] == 2

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = run(capsys, "height", "--matrix", "1;2", "--output", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["height"] == 2
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]

    def test_no_partial_file_on_error(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        assert run(capsys, "measure", "--poly", "0", "--output", str(path))[0] == 3
        assert list(tmp_path.iterdir()) == []

    def test_threads_env(self, capsys, monkeypatch):
        monkeypatch.setenv("MAHLER_THREADS", "zero")
        assert run(capsys, "height", "--matrix", "1;2")[0] == 2
        monkeypatch.setenv("MAHLER_THREADS", "1")
        assert run(capsys, "height", "--matrix", "1;2")[0] == 0

    def test_reals_have_12_digits(self):
        assert dumps({"x": 1 / 3, "y": float("nan"), "z": [2.0, 1e-20 / 3]}) == \
            '{"x":0.333333333333,"y":null,"z":[2.0,3.33333333333e-21]}'

    def test_byte_identical_subprocess(self):
        argv = [sys.executable, "-m", "mahlerlim", "measure", "--poly", "Z1+Z2+Z3+2", "--samples", "4096",
                "--shifts", "4", "--seed", "7"]
        a = subprocess.run(argv, capture_output=True, check=True).stdout
        b = subprocess.run(argv, capture_output=True, check=True).stdout
        assert a == b and json.loads(a)["method"] == "TorusQMC"
