import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from jsonschema import validate

from axialunif import cli
from axialunif.io import (
    REPORT_SCHEMA,
    DataFileSpec,
    load_dataset,
    report_to_dict,
    write_dataset,
)
from axialunif.models import SphericalSample, sample_uniform_sphere
from axialunif.numerics import NumericalError, RngStream
from axialunif.svg import emit_svg
from axialunif.teststats import bingham_q, t_plus


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoad:
    def test_basic(self, tmp_path):
        s = load_dataset(DataFileSpec(write(tmp_path, "1,0,0\n0,1,0")))
        assert s.n == 2 and s.p == 3

    def test_renormalize(self, tmp_path):
        path = write(tmp_path, "2,0,0\n")
        with pytest.raises(ValueError):
            load_dataset(DataFileSpec(path))
        s = load_dataset(DataFileSpec(path, renormalize=True))
        assert np.array_equal(s.points, [[1.0, 0.0, 0.0]])

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError, match="no observations"):
            load_dataset(DataFileSpec(write(tmp_path, "")))
        with pytest.raises(ValueError, match="no observations"):
            load_dataset(DataFileSpec(write(tmp_path, "# only a comment\n")))

    def test_ragged(self, tmp_path):
        with pytest.raises(ValueError, match="columns"):
            load_dataset(DataFileSpec(write(tmp_path, "1,0,0\n0,1\n")))

    def test_zero_row(self, tmp_path):
        with pytest.raises(ValueError, match="zero"):
            load_dataset(DataFileSpec(write(tmp_path, "0,0,0\n"), renormalize=True))

    def test_non_numeric(self, tmp_path):
        with pytest.raises(ValueError, match="non-numeric"):
            load_dataset(DataFileSpec(write(tmp_path, "1,a,0\n")))

    def test_one_column(self, tmp_path):
        with pytest.raises(ValueError):
            load_dataset(DataFileSpec(write(tmp_path, "1\n1\n")))

    def test_header_whitespace(self, tmp_path):
        path = write(tmp_path, "x y\n0 1\n1 0\n")
        s = load_dataset(DataFileSpec(path, "whitespace", has_header=True))
        assert s.n == 2 and s.p == 2

    def test_tolerance(self, tmp_path):
        load_dataset(DataFileSpec(write(tmp_path, "1.000000005,0\n")))
        with pytest.raises(ValueError):
            load_dataset(DataFileSpec(write(tmp_path, "1.00000002,0\n")))

    def test_round_trip(self, tmp_path):
        s = sample_uniform_sphere(5, 200, RngStream(3))
        for delim in (",", "whitespace"):
            path = tmp_path / "rt.csv"
            write_dataset(s, path, delim, comment="seed=3")
            back = load_dataset(DataFileSpec(str(path), delim))
            assert np.max(np.abs(back.points - s.points)) <= 1e-15


class TestReports:
    def test_schema_and_round_trip(self):
        s = sample_uniform_sphere(3, 100, RngStream(1))
        for rep in (bingham_q(s), t_plus(s)):
            d = report_to_dict(rep, seed=0)
            validate(d, REPORT_SCHEMA)
            assert json.loads(json.dumps(d)) == d
            assert d["reject"] == (d["p_value"] < d["alpha"])

    def test_mc_params(self):
        s = sample_uniform_sphere(5, 100, RngStream(1))
        d = report_to_dict(t_plus(s, m=2000, seed=4))
        validate(d, REPORT_SCHEMA)
        assert d["params"]["m"] == 2000 and d["params"]["seed"] == 4

    def test_schema_rejects_extra(self):
        from jsonschema import ValidationError
        s = sample_uniform_sphere(3, 20, RngStream(1))
        d = report_to_dict(bingham_q(s))
        d["extra"] = 1
        with pytest.raises(ValidationError):
            validate(d, REPORT_SCHEMA)


class TestSvg:
    def test_single(self, tmp_path):
        emit_svg([{"x": [0, 1, 2], "y": [0, 1, 0], "label": "a"}], tmp_path / "a.svg")
        root = ET.parse(tmp_path / "a.svg").getroot()
        assert root.tag.endswith("svg")

    def test_two_curves(self, tmp_path):
        emit_svg([{"x": [0, 1], "y": [0, 1], "label": "emp"},
                  {"x": [0, 1], "y": [1, 0], "label": "asym", "style": "dashed"}],
                 tmp_path / "b.svg")
        root = ET.parse(tmp_path / "b.svg").getroot()
        ns = "{http://www.w3.org/2000/svg}"
        paths = root.findall(f"{ns}path")
        assert len(paths) == 2 and paths[0].get("d") != paths[1].get("d")
        assert "stroke-dasharray" in paths[1].attrib and "stroke-dasharray" not in paths[0].attrib
        labels = [t.text for t in root.findall(f"{ns}text")]
        assert "emp" in labels and "asym" in labels

    def test_step(self, tmp_path):
        emit_svg([{"x": [0, 1, 2, 3], "y": [1, 2, 1], "style": "step", "label": "h"}],
                 tmp_path / "c.svg")
        ET.parse(tmp_path / "c.svg")

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_svg([], tmp_path / "d.svg")


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_crit(self, capsys):
        code, out, _ = run(["crit", "--test", "t_plus", "--p", "2", "--alpha", "0.05",
                            "--method", "analytic"], capsys)
        d = json.loads(out)
        assert code == 0 and abs(d["critical_value"] - math.sqrt(-math.log(0.05))) < 1e-9
        assert d["seed"] == 0

    def test_crit_mc_and_error(self, capsys):
        code, out, _ = run(["crit", "--test", "t_pm", "--p", "4", "--method", "mc",
                            "--m", "5000", "--seed", "3"], capsys)
        d = json.loads(out)
        assert code == 0 and d["m"] == 5000 and d["seed"] == 3
        code, _, err = run(["crit", "--test", "t_plus", "--p", "4", "--method", "analytic"], capsys)
        assert code == 2 and "p in (2, 3)" in err

    def test_sample_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert run(["sample", "--p", "3", "--n", "5", "--kappa", "0", "--seed", "7",
                        "--out", str(path)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().startswith("# seed=7")
        assert load_dataset(DataFileSpec(str(a))).n == 5

    def test_sample_bad_kappa(self, capsys):
        code, _, err = run(["sample", "--p", "3", "--n", "5", "--kappa", "-2", "--f", "linear"],
                           capsys)
        assert code == 2 and "positive" in err

    def test_test_all_e1(self, tmp_path, capsys):
        path = write(tmp_path, "1,0,0\n" * 100)
        code, out, _ = run(["test", path, "--tests", "bingham"], capsys)
        (rep,) = json.loads(out)
        assert code == 0
        assert abs(rep["statistic"] - 500) < 1e-9 and rep["p_value"] < 1e-12 and rep["reject"]
        validate(rep, REPORT_SCHEMA)

    def test_test_antipodal(self, tmp_path, capsys):
        path = write(tmp_path, "1,0,0\n-1,0,0\n" * 50)
        code, out, _ = run(["test", path, "--tests", "rayleigh,bingham"], capsys)
        ray, bing = json.loads(out)
        assert ray["statistic"] < 1e-12 and bing["reject"]

    def test_test_smoke_uniform(self, tmp_path, capsys):
        s = sample_uniform_sphere(3, 500, RngStream(2))
        path = tmp_path / "u.csv"
        write_dataset(s, path)
        code, out, _ = run(["test", str(path), "--tests",
                            "specified_right,specified_left,specified_two_sided,bingham,"
                            "t_plus,t_minus,t_pm,rayleigh", "--theta", "0,0,1"], capsys)
        reps = json.loads(out)
        assert code == 0 and len(reps) == 8
        for r in reps:
            validate(r, REPORT_SCHEMA)
            assert 0 <= r["p_value"] <= 1

    def test_test_theta_rules(self, tmp_path, capsys):
        path = write(tmp_path, "1,0,0\n0,1,0\n")
        assert run(["test", path, "--tests", "specified_right"], capsys)[0] == 2
        assert run(["test", path, "--tests", "bingham", "--theta", "1,0,0"], capsys)[0] == 2
        assert run(["test", path, "--tests", "specified_right", "--theta", "1,0"], capsys)[0] == 2
        assert run(["test", path, "--tests", "whatever"], capsys)[0] == 2

    def test_test_analytic_unsupported(self, tmp_path, capsys):
        s = sample_uniform_sphere(4, 50, RngStream(2))
        path = tmp_path / "u4.csv"
        write_dataset(s, path)
        code, _, err = run(["test", str(path), "--tests", "t_plus", "--crit-source", "analytic"],
                           capsys)
        assert code == 2 and "p=4" in err
        code, out, _ = run(["test", str(path), "--tests", "t_plus", "--m", "2000", "--seed", "5"],
                           capsys)
        rep = json.loads(out)[0]
        assert code == 0 and rep["params"]["m"] == 2000 and rep["params"]["seed"] == 5

    def test_test_bad_file(self, tmp_path, capsys):
        assert run(["test", str(tmp_path / "missing.csv")], capsys)[0] == 2
        assert run(["test", write(tmp_path, "")], capsys)[0] == 2

    def test_power_asymptotic(self, capsys):
        code, out, _ = run(["power", "--p", "3", "--tau", "0,1", "--tests",
                            "specified_right,bingham", "--seed", "4"], capsys)
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "# seed=4" and lines[1] == "test,tau,asym_power"
        assert abs(float(lines[3].split(",")[2]) - 0.2265) < 1e-3

    def test_power_mc(self, tmp_path, capsys):
        out = tmp_path / "pc.csv"
        code, _, _ = run(["power", "--p", "3", "--tau", "0,2", "--n", "100", "--replicates", "50",
                          "--tests", "t_plus", "--seed", "1", "--out", str(out)], capsys)
        assert code == 0 and out.read_text().startswith("# seed=1")

    def test_limlaw(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        code, stdout, _ = run(["limlaw", "--p", "3", "--tau", "1", "--m", "1000", "--seed", "2",
                               "--out", str(out)], capsys)
        assert code == 0 and json.loads(stdout)["seed"] == 2
        assert "seed=2" in out.read_text().splitlines()[1]
        assert run(["limlaw", "--p", "3", "--m", "10"], capsys)[0] == 2

    def test_figure(self, tmp_path, capsys):
        code, out, _ = run(["figure", "--id", "4", "--scale", "desk", "--replicates", "40",
                            "--out", str(tmp_path)], capsys)
        man = json.loads(out)
        kinds = {a["kind"] for a in man["artifacts"]}
        assert code == 0 and {"power_curve", "svg"} <= kinds and man["seed"] == 0

    def test_usage_errors(self, capsys):
        assert run([], capsys)[0] == 2
        assert run(["crit", "--p", "3"], capsys)[0] == 2
        assert run(["figure", "--id", "9"], capsys)[0] == 2
        assert run(["--help"], capsys)[0] == 0

    def test_numeric_failure_exit(self, tmp_path, capsys, monkeypatch):
        def boom(*a, **k):
            raise NumericalError("no convergence")
        monkeypatch.setattr(cli.teststats, "scatter_matrix", boom)
        path = write(tmp_path, "1,0,0\n0,1,0\n")
        code, _, err = run(["test", path, "--tests", "bingham"], capsys)
        assert code == 3 and "numerical" in err

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "axialunif", "crit", "--test", "t_plus",
                            "--p", "3"], capture_output=True, text=True)
        assert r.returncode == 0 and json.loads(r.stdout)["critical_value"] > 2.6
