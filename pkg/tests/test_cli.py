import json
import os

import numpy as np
import pytest

from strata_bounds.cli import main


def run(args):
    return main([str(a) for a in args])


@pytest.fixture
def sim_csv(tmp_path):
    out = tmp_path / "sample.csv"
    assert run(["simulate", "--preset", "table-t2", "--out", out,
                "--clusters", "40", "--cluster-size", "10", "--seed", "4"]) == 0
    return out


class TestSimulate:
    def test_writes_sample_and_truth(self, sim_csv):
        assert sim_csv.exists()
        truth = json.loads((sim_csv.parent / "sample.csv.truth.json").read_text())
        assert truth["schema_version"] == 1
        assert len(truth["finite_population"]["pi"]) == 5
        assert truth["super_population"]["late"] == pytest.approx(1.04)

    def test_check_passes(self, capsys):
        assert run(["simulate", "--check"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out

    def test_unknown_preset(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["simulate", "--preset", "nope", "--out", tmp_path / "x.csv"])
        assert exc.value.code == 2


class TestIngestEstimate:
    def test_ingest_summary(self, sim_csv, capsys):
        assert run(["ingest", "--input", sim_csv]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["units"] == 400
        assert 0 < summary["blocks"]["b0"]["propensity"] < 1

    def test_missing_file_exit_2(self, tmp_path):
        assert run(["ingest", "--input", tmp_path / "missing.csv"]) == 2

    def test_bad_domain_exit_2(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("z,d,y,cluster\n0,3,1.0,a\n1,0,1.0,a\n")
        assert run(["ingest", "--input", p]) == 2

    def test_estimate_json(self, sim_csv, tmp_path):
        out = tmp_path / "est.json"
        assert run(["estimate", "--input", sim_csv, "--json", out]) == 0
        payload = json.loads(out.read_text())
        names = [r["name"] for r in payload["estimates"]]
        assert names[:3] == ["itt", "first_stage", "late"]
        assert set(payload["shares"]) >= {"pi_00", "pi_02", "pi_12"}

    def test_estimation_error_exit_3(self, tmp_path):
        # tiny complier share against a high floor: WeakShare
        p = tmp_path / "weak.csv"
        rows = ["z,d,y,cluster"]
        for i in range(40):
            d = 2 if i == 1 else 0
            rows.append(f"{i % 2},{d},{i * 0.1},c{i // 4}")
        p.write_text("\n".join(rows) + "\n")
        assert run(["bounds", "--input", p, "--floor", "0.2",
                    "--out-json", tmp_path / "b.json"]) == 3


class TestBounds:
    def test_outputs(self, sim_csv, tmp_path):
        bj = tmp_path / "b.json"
        line = tmp_path / "line.csv"
        svg = tmp_path / "fig.svg"
        assert run(["bounds", "--input", sim_csv, "--out-json", bj,
                    "--out-line", line, "--out-svg", svg]) == 0
        payload = json.loads(bj.read_text())
        assert payload["complier"]["lower"] <= payload["complier"]["upper"]
        assert payload["substitutor"]["lower"] <= payload["substitutor"]["upper"]
        header = line.read_text().splitlines()[0]
        assert header == "tau_12,tau_02"
        assert svg.read_text().startswith("<svg")


class TestBootstrap:
    def test_trace_and_determinism(self, sim_csv, tmp_path, capsys):
        t1 = tmp_path / "t1.csv"
        assert run(["bootstrap", "--input", sim_csv, "--stat", "itt",
                    "--reps", "120", "--seed", "9", "--trace", t1]) == 0
        out1 = capsys.readouterr().out
        t2 = tmp_path / "t2.csv"
        assert run(["bootstrap", "--input", sim_csv, "--stat", "itt",
                    "--reps", "120", "--seed", "9", "--trace", t2]) == 0
        out2 = capsys.readouterr().out
        assert out1 == out2
        assert t1.read_text() == t2.read_text()
        assert len(t1.read_text().splitlines()) == 121


class TestReweight:
    def _csv(self, path, xs, seed=0):
        rows = ["z,d,y,cluster,x"]
        for i, x in enumerate(xs):
            rows.append(f"{i % 2},0,{i * 0.01},c{i},{x}")
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_round_trip(self, tmp_path):
        src = self._csv(tmp_path / "a.csv", [0.25, 0.25, 0.75, 0.75])
        tgt = self._csv(tmp_path / "b.csv", [0.25, 0.75, 0.75, 0.75])
        out = tmp_path / "w.csv"
        assert run(["reweight", "--source", src, "--target", tgt,
                    "--covariate", "x", "--col-aux", "x:x",
                    "--bin-edges", "0,0.5,1", "--out", out]) == 0
        model = json.loads((tmp_path / "w.csv.model.json").read_text())
        assert model["ratio"] == [0.5, 1.5]

    def test_unsupported_shift_exit_2(self, tmp_path):
        src = self._csv(tmp_path / "a.csv", [0.1, 0.2, 0.1, 0.2])
        tgt = self._csv(tmp_path / "b.csv", [0.9, 0.8, 0.9, 0.8])
        assert run(["reweight", "--source", src, "--target", tgt,
                    "--covariate", "x", "--col-aux", "x:x",
                    "--bin-edges", "0,0.5,1", "--out", tmp_path / "w.csv"]) == 2


class TestReport:
    def test_report_files(self, tmp_path):
        outdir = tmp_path / "rep"
        assert run(["report", "--preset", "table-t2", "--outdir", outdir,
                    "--reps", "120", "--clusters", "40",
                    "--cluster-size", "10"]) == 0
        for name in ("estimates.json", "takeup.csv", "shares.csv",
                     "bounds.json", "bounds_line.csv", "streaks.csv",
                     "figure.svg", "manifest.json", "sample.csv",
                     "truth.json"):
            assert (outdir / name).exists(), name
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["args"]["reps"] == 120
        assert "version" in manifest

    def test_manifest_reproduction_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert run(["report", "--preset", "table-t1", "--outdir", a,
                    "--reps", "120", "--clusters", "40",
                    "--cluster-size", "10"]) == 0
        assert run(["report", "--from-manifest", a / "manifest.json",
                    "--outdir", b]) == 0
        for name in ("estimates.json", "bounds.json", "shares.csv",
                     "bounds_line.csv", "streaks.csv", "figure.svg",
                     "sample.csv", "truth.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_two_sample_mode(self, tmp_path):
        a_csv = tmp_path / "a.csv"
        b_csv = tmp_path / "b.csv"
        assert run(["simulate", "--preset", "table-t1", "--out", a_csv,
                    "--clusters", "40", "--cluster-size", "10",
                    "--seed", "1"]) == 0
        assert run(["simulate", "--preset", "table-t2", "--out", b_csv,
                    "--clusters", "40", "--cluster-size", "10",
                    "--seed", "2"]) == 0
        outdir = tmp_path / "two"
        assert run(["report", "--sample-a", a_csv, "--sample-b", b_csv,
                    "--outdir", outdir, "--reps", "120"]) == 0
        assert (outdir / "a" / "bounds.json").exists()
        assert (outdir / "b" / "bounds.json").exists()
