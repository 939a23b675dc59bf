"""CLI integration tests: flags, config batches, report formats, exit codes."""

import json
import math
import re

import pytest

from ineq2d import cli

PI = math.pi


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timestamp(text: str) -> str:
    return re.sub(r'"timestamp": "[^"]*"', '"timestamp": "T"', text)


class TestCheck:
    def test_corner_bound_json(self, capsys):
        code, out, _ = run_cli(
            ["check", "--ineq", "wirtinger2d", "--f", "sin(pi*x/2)*sin(pi*y/2)",
             "--domain", "0,1,0,1"],
            capsys,
        )
        assert code == 0
        report = json.loads(out)
        bound = report["results"][0]["bound"]
        assert bound["lhs"] == pytest.approx(0.25, rel=1e-10)
        assert bound["rhs"] == pytest.approx(0.25, rel=1e-10)
        assert bound["status"] == "HOLDS"
        assert report["version"]
        assert report["config"]["jobs"][0]["inequality-id"] == "wirtinger2d"

    def test_mean_deviation_probe_exit_codes(self, capsys):
        args = ["check", "--ineq", "ostrowski2d", "--f", "x*y", "--point", "1,1",
                "--domain", "0,1,0,1"]
        code, out, _ = run_cli(args, capsys)
        assert code == 0
        bound = json.loads(out)["results"][0]["bound"]
        assert bound["status"] == "ASSUMPTIONS_UNMET"
        assert bound["ratio"] == pytest.approx(1.851, abs=1e-3)
        code, _, _ = run_cli(args + ["--strict-exit"], capsys)
        assert code == 3

    def test_violated_exit_code(self, capsys):
        code, out, _ = run_cli(
            ["check", "--ineq", "ostrowski2d", "--f", "sin(pi*x)*sin(pi*y)",
             "--point", "0.5,0.5", "--domain", "0,1,0,1"],
            capsys,
        )
        assert code == 2
        assert json.loads(out)["results"][0]["bound"]["status"] == "VIOLATED"

    def test_pair_bound_requires_g(self, capsys):
        code, _, err = run_cli(
            ["check", "--ineq", "chebyshev-l2", "--f", "x*y", "--domain", "0,1,0,1"],
            capsys,
        )
        assert code == 1
        assert "g-source" in err

    def test_parse_error_position(self, capsys):
        code, _, err = run_cli(
            ["check", "--ineq", "wirtinger2d", "--f", "sin(x", "--domain", "0,1,0,1"],
            capsys,
        )
        assert code == 1
        assert "position" in err

    def test_unknown_inequality(self, capsys):
        code, _, err = run_cli(
            ["check", "--ineq", "nope", "--f", "x", "--domain", "0,1,0,1"], capsys
        )
        assert code == 1
        assert "unknown inequality" in err

    def test_strict_hypothesis_flag(self, capsys):
        code, out, _ = run_cli(
            ["check", "--ineq", "wirtinger2d", "--f", "sin(pi*x/2)*sin(pi*y/2)",
             "--domain", "0,1,0,1", "--hypothesis", "strict"],
            capsys,
        )
        assert code == 0
        bound = json.loads(out)["results"][0]["bound"]
        assert bound["status"] == "ASSUMPTIONS_UNMET"  # witness fails strict-left
        assert bound["assumptions"]["strict_left"] is False


class TestIntegrate:
    def test_constant(self, capsys):
        code, out, _ = run_cli(
            ["integrate", "--f", "1", "--domain", "1,3,0,2"], capsys
        )
        assert code == 0
        q = json.loads(out)["results"][0]["quadrature"]
        assert q["value"] == pytest.approx(4.0, rel=1e-13)
        assert q["converged"] is True

    def test_nonconvergence_exit(self, capsys):
        code, out, _ = run_cli(
            ["integrate", "--f", "step(x-1/3)", "--domain", "0,1,0,1",
             "--max-panels", "32"],
            capsys,
        )
        assert code == 2
        assert json.loads(out)["results"][0]["quadrature"]["converged"] is False


class TestScanAndSharpness:
    def test_scan_csv(self, capsys):
        code, out, _ = run_cli(
            ["scan", "--ineq", "wirtinger2d", "--domain", "0,1,0,1", "--format", "csv"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "ineq,variant,a,b,c,d,fid,gid,lhs,rhs,ratio,eps,status"
        assert len(lines) == 1 + 19  # 18 family members + extremal
        assert all(line.split(",")[12] == "HOLDS" for line in lines[1:])

    def test_sharpness_command(self, capsys):
        code, out, _ = run_cli(
            ["sharpness", "--ineq", "pointwise2d", "--domain", "0,1,0,1",
             "--anchor", "0.3,0.5", "--strict-exit"],
            capsys,
        )
        assert code == 3  # witness is inadmissible under the attached hypotheses
        result = json.loads(out)["results"][0]
        assert result["ratio"] == pytest.approx(1.0, abs=1e-8)
        assert "step" in result["extremal-f"]


class TestBatch:
    def make_config(self, tmp_path, jobs):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"jobs": jobs}), encoding="utf-8")
        return str(path)

    def test_two_jobs(self, tmp_path, capsys):
        cfg = self.make_config(
            tmp_path,
            [
                {"command": "check", "inequality-id": "wirtinger2d",
                 "f-source": "sin(pi*x/2)*sin(pi*y/2)", "domain": [0, 1, 0, 1]},
                {"command": "integrate", "f-source": "x*y", "domain": [0, 1, 0, 1]},
            ],
        )
        code, out, _ = run_cli(["batch", cfg], capsys)
        assert code == 0
        report = json.loads(out)
        assert len(report["results"]) == 2
        assert report["results"][0]["type"] == "bound"
        assert report["results"][1]["quadrature"]["value"] == pytest.approx(0.25)

    def test_schema_error_names_field(self, tmp_path, capsys):
        cfg = self.make_config(
            tmp_path,
            [{"command": "check", "inequality-id": "bogus", "f-source": "x",
              "domain": [0, 1, 0, 1]}],
        )
        code, _, err = run_cli(["batch", cfg], capsys)
        assert code == 1
        assert "jobs[0].inequality-id" in err

    def test_bad_domain_schema(self, tmp_path, capsys):
        cfg = self.make_config(
            tmp_path,
            [{"command": "integrate", "f-source": "x", "domain": [0, 1, 0]}],
        )
        code, _, err = run_cli(["batch", cfg], capsys)
        assert code == 1
        assert "jobs[0].domain" in err

    def test_unknown_field(self, tmp_path, capsys):
        cfg = self.make_config(tmp_path, [{"command": "check", "frobnicate": 1}])
        code, _, err = run_cli(["batch", cfg], capsys)
        assert code == 1
        assert "jobs[0].frobnicate" in err

    def test_exit_aggregation(self, tmp_path, capsys):
        cfg = self.make_config(
            tmp_path,
            [
                {"command": "check", "inequality-id": "wirtinger2d",
                 "f-source": "x*y", "domain": [0, 1, 0, 1]},
                {"command": "check", "inequality-id": "ostrowski2d",
                 "f-source": "sin(pi*x)*sin(pi*y)", "point": [0.5, 0.5],
                 "domain": [0, 1, 0, 1]},
            ],
        )
        code, _, _ = run_cli(["batch", cfg], capsys)
        assert code == 2  # second job violates


class TestReports:
    def test_json_stable_modulo_timestamp(self, tmp_path, capsys):
        args = ["check", "--ineq", "lupas-1d", "--f", "cos(pi*x)", "--g", "cos(pi*x)",
                "--domain", "0,1,0,1"]
        _, out1, _ = run_cli(args, capsys)
        _, out2, _ = run_cli(args, capsys)
        assert strip_timestamp(out1) == strip_timestamp(out2)

    def test_thread_count_does_not_change_bytes(self, tmp_path, capsys, monkeypatch):
        outputs = []
        for workers in ("1", "2", "8"):
            monkeypatch.setenv("INEQ2D_THREADS", workers)
            _, out, _ = run_cli(
                ["check", "--ineq", "chebyshev-mixed", "--f", "cos(pi*x)*cos(pi*y)",
                 "--g", "sgn(x-1/2)*sgn(y-1/2)", "--domain", "0,1,0,1"],
                capsys,
            )
            outputs.append(strip_timestamp(out))
        assert outputs[0] == outputs[1] == outputs[2]

    def test_out_file(self, tmp_path, capsys):
        out_path = tmp_path / "report.json"
        code, out, _ = run_cli(
            ["integrate", "--f", "1", "--domain", "0,1,0,1", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["results"]

    def test_text_format(self, capsys):
        code, out, _ = run_cli(
            ["check", "--ineq", "wirtinger2d", "--f", "x*y", "--domain", "0,1,0,1",
             "--format", "text"],
            capsys,
        )
        assert code == 0
        assert "status=HOLDS" in out

    def test_float_serialization_17g(self, capsys):
        _, out, _ = run_cli(
            ["integrate", "--f", "1/(1+x+y)", "--domain", "0,1,0,1"], capsys
        )
        value = json.loads(out)["results"][0]["quadrature"]["value"]
        m = re.search(r'"value": ([-0-9.e+]+)', out)
        assert m is not None
        assert float(m.group(1)) == value  # round-trips bit-exactly
