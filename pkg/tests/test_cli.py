import json

import numpy as np
import pytest

from svcreject.cli import main

from conftest import BAND_B, BAND_T_MINUS, BAND_T_PLUS, BAND_W, BAND_X


def demo_reject_doc():
    """Hand-written reject-model file for the two-feature worked model."""
    return {
        "weights": [-0.8, 2.0],
        "bias": 0.05,
        "features": [
            {"name": "f1", "lower": 0.0, "upper": 1.0},
            {"name": "f2", "lower": 0.0, "upper": 1.0},
        ],
        "scaling": [{"min": 0.0, "max": 1.0}, {"min": 0.0, "max": 1.0}],
        "t_minus": 0.0,
        "t_plus": 0.0,
        "w_r": 0.24,
    }


def band_reject_doc():
    return {
        "weights": list(BAND_W),
        "bias": BAND_B,
        "features": [
            {"name": f"f{i}", "lower": 0.0, "upper": 1.0} for i in range(1, 7)
        ],
        "scaling": [{"min": 0.0, "max": 1.0} for _ in range(6)],
        "t_minus": BAND_T_MINUS,
        "t_plus": BAND_T_PLUS,
        "w_r": 0.24,
    }


def strip_times(jsonl_text):
    records = [json.loads(line) for line in jsonl_text.splitlines()]
    for r in records:
        r.pop("time_seconds")
    return records


class TestTrain:
    def test_iris_pipeline_reports_perfect_test_accuracy(self, tmp_path, iris_csv, capsys):
        model_path = tmp_path / "model.json"
        code = main([
            "train", "--input", str(iris_csv), "--label-column", "species",
            "--positive-label", "setosa", "--model", str(model_path), "--seed", "0",
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert model_path.exists()
        assert "test accuracy: 100.00%" in out
        doc = json.loads(model_path.read_text())
        assert set(doc) >= {"weights", "bias", "features", "scaling", "split"}
        assert len(doc["split"]["train_indices"]) == 105

    def test_missing_input_exits_2(self, tmp_path, capsys):
        code = main([
            "train", "--input", str(tmp_path / "ghost.csv"), "--label-column", "y",
            "--positive-label", "a", "--model", str(tmp_path / "m.json"),
        ])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_same_seed_writes_byte_identical_models(self, tmp_path, iris_csv, capsys):
        paths = [tmp_path / "m1.json", tmp_path / "m2.json"]
        for p in paths:
            assert main([
                "train", "--input", str(iris_csv), "--label-column", "species",
                "--positive-label", "setosa", "--model", str(p), "--seed", "7",
            ]) == 0
        capsys.readouterr()
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_optional_dataset_dump(self, tmp_path, iris_csv, capsys):
        out = tmp_path / "scaled.json"
        assert main([
            "train", "--input", str(iris_csv), "--label-column", "species",
            "--positive-label", "setosa", "--model", str(tmp_path / "m.json"),
            "--output", str(out),
        ]) == 0
        capsys.readouterr()
        doc = json.loads(out.read_text())
        assert set(doc) == {"features", "scaling", "rows", "labels"}
        assert len(doc["rows"]) == 150


class TestCalibrate:
    def test_separable_csv_rejects_nothing(self, tmp_path, capsys):
        csv_path = tmp_path / "toy.csv"
        rng = np.random.default_rng(0)
        lines = ["x1,x2,label"]
        for _ in range(20):
            lines.append(f"{rng.uniform(0.7, 1.0):.6f},{rng.uniform(0.7, 1.0):.6f},pos")
        for _ in range(20):
            lines.append(f"{rng.uniform(0.0, 0.3):.6f},{rng.uniform(0.0, 0.3):.6f},neg")
        csv_path.write_text("\n".join(lines) + "\n")

        model_path = tmp_path / "model.json"
        reject_path = tmp_path / "reject.json"
        assert main([
            "train", "--input", str(csv_path), "--label-column", "label",
            "--positive-label", "pos", "--model", str(model_path), "--C", "100",
        ]) == 0
        assert main([
            "calibrate", "--input", str(csv_path), "--model", str(model_path),
            "--output", str(reject_path), "--wr", "0.24",
        ]) == 0
        out = capsys.readouterr().out
        assert "grid index 1" in out
        doc = json.loads(reject_path.read_text())
        assert doc["risk_report"]["risk"] == 0.0
        assert doc["risk_report"]["rejection_ratio"] == 0.0
        assert doc["w_r"] == 0.24

    def test_missing_model_exits_2(self, tmp_path, iris_csv, capsys):
        code = main([
            "calibrate", "--input", str(iris_csv), "--model", str(tmp_path / "no.json"),
            "--output", str(tmp_path / "r.json"),
        ])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_byte_identical_reject_files_and_metrics_sidecar(self, tmp_path, iris_csv, capsys):
        model_path = tmp_path / "model.json"
        assert main([
            "train", "--input", str(iris_csv), "--label-column", "species",
            "--positive-label", "setosa", "--model", str(model_path),
        ]) == 0
        outs = [tmp_path / "r1.json", tmp_path / "r2.json"]
        for out in outs:
            assert main([
                "calibrate", "--input", str(iris_csv), "--model", str(model_path),
                "--output", str(out), "--scope", "all",
            ]) == 0
        capsys.readouterr()
        assert outs[0].read_bytes() == outs[1].read_bytes()
        metrics = json.loads((tmp_path / "r1.json.metrics.json").read_text())
        assert metrics["scope"] == "all"
        assert metrics["rejected"] == 0
        assert metrics["negative"] + metrics["positive"] == 150


class TestExplain:
    def test_worked_model_keeps_only_f1(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n0.0526,0.3\n")
        out_path = tmp_path / "expl.jsonl"
        assert main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(out_path),
        ]) == 0
        capsys.readouterr()
        records = [json.loads(line) for line in out_path.read_text().splitlines()]
        assert len(records) == 1
        rec = records[0]
        assert rec["class"] == 1
        assert [k["feature"] for k in rec["kept"]] == ["f1"]
        assert rec["removed"] == ["f2"]
        assert rec["witnesses"][0]["feature"] == "f1"
        assert rec["witnesses"][0]["class"] == -1
        assert rec["kept"][0]["raw_value"] == pytest.approx(0.0526)

    def test_band_model_removes_f3(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(band_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text(
            "f1,f2,f3,f4,f5,f6\n" + ",".join(repr(float(v)) for v in BAND_X) + "\n"
        )
        out_path = tmp_path / "expl.jsonl"
        assert main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(out_path),
        ]) == 0
        capsys.readouterr()
        rec = json.loads(out_path.read_text().splitlines()[0])
        assert rec["class"] == 0
        assert rec["removed"] == ["f3"]
        assert [k["feature"] for k in rec["kept"]] == ["f1", "f2", "f4", "f5", "f6"]

    def test_empty_instance_file(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n")
        out_path = tmp_path / "expl.jsonl"
        assert main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(out_path),
        ]) == 0
        out = capsys.readouterr().out
        assert out_path.read_text() == ""
        assert "explained 0 instance(s)" in out
        summary = json.loads((tmp_path / "expl.jsonl.summary.json").read_text())
        assert summary["patterns"] == 0

    def test_out_of_domain_rows_skipped_with_warning(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n1.5,0.3\n0.0526,0.3\n")
        out_path = tmp_path / "expl.jsonl"
        assert main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(out_path),
        ]) == 0
        captured = capsys.readouterr()
        assert "row 0" in captured.err and "skipped" in captured.err
        records = [json.loads(line) for line in out_path.read_text().splitlines()]
        assert [r["index"] for r in records] == [1]

    def test_plain_model_without_band_exits_2(self, tmp_path, capsys):
        doc = demo_reject_doc()
        for key in ("t_minus", "t_plus", "w_r"):
            del doc[key]
        model_path = tmp_path / "model.json"
        model_path.write_text(json.dumps(doc))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n0.5,0.5\n")
        code = main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(tmp_path / "e.jsonl"),
        ])
        assert code == 2
        assert "reject band" in capsys.readouterr().err

    def test_deterministic_apart_from_timing(self, tmp_path, iris_csv, capsys):
        model_path = tmp_path / "model.json"
        reject_path = tmp_path / "reject.json"
        assert main([
            "train", "--input", str(iris_csv), "--label-column", "species",
            "--positive-label", "setosa", "--model", str(model_path),
        ]) == 0
        assert main([
            "calibrate", "--input", str(iris_csv), "--model", str(model_path),
            "--output", str(reject_path),
        ]) == 0
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out_path = tmp_path / name
            assert main([
                "explain", "--model", str(reject_path), "--input", str(iris_csv),
                "--output", str(out_path),
            ]) == 0
            outs.append(strip_times(out_path.read_text()))
        capsys.readouterr()
        assert outs[0] == outs[1]

    def test_scope_requires_split_manifest(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n0.0526,0.3\n")
        code = main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(tmp_path / "e.jsonl"), "--scope", "train",
        ])
        assert code == 2
        assert "split manifest" in capsys.readouterr().err

    def test_scope_test_explains_only_held_out_rows(self, tmp_path, iris_csv, capsys):
        model_path = tmp_path / "model.json"
        reject_path = tmp_path / "reject.json"
        assert main([
            "train", "--input", str(iris_csv), "--label-column", "species",
            "--positive-label", "setosa", "--model", str(model_path),
        ]) == 0
        assert main([
            "calibrate", "--input", str(iris_csv), "--model", str(model_path),
            "--output", str(reject_path),
        ]) == 0
        out_path = tmp_path / "expl.jsonl"
        assert main([
            "explain", "--model", str(reject_path), "--input", str(iris_csv),
            "--output", str(out_path), "--scope", "test",
        ]) == 0
        capsys.readouterr()
        records = [json.loads(line) for line in out_path.read_text().splitlines()]
        test_indices = set(json.loads(model_path.read_text())["split"]["test_indices"])
        assert len(records) == 45
        assert {r["index"] for r in records} == test_indices

    def test_elimination_order_variants_all_verify(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(band_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text(
            "f1,f2,f3,f4,f5,f6\n" + ",".join(repr(float(v)) for v in BAND_X) + "\n"
        )
        kept_sets = {}
        for order in ("ascending", "descending-weight", "lex"):
            out_path = tmp_path / f"{order}.jsonl"
            assert main([
                "explain", "--model", str(model_path), "--input", str(instances),
                "--output", str(out_path), "--order", order,
            ]) == 0
            rec = json.loads(out_path.read_text().splitlines()[0])
            kept_sets[order] = tuple(k["feature"] for k in rec["kept"])
        capsys.readouterr()
        # lexicographic order coincides with ascending for f1..f6 names
        assert kept_sets["lex"] == kept_sets["ascending"] == ("f1", "f2", "f4", "f5", "f6")

    def test_failed_verification_is_a_bug_trap(self, tmp_path, monkeypatch, capsys):
        from svcreject import cli, explainer

        monkeypatch.setattr(
            cli.explainer, "verify_explanation",
            lambda *a, **k: explainer.VerificationReport(False, ("forced",)),
        )
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n0.0526,0.3\n")
        code = main([
            "explain", "--model", str(model_path), "--input", str(instances),
            "--output", str(tmp_path / "e.jsonl"),
        ])
        assert code == 1
        assert "verification" in capsys.readouterr().err


class TestBench:
    def test_single_instance_reports_zero_std(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n0.0526,0.3\n")
        report_path = tmp_path / "report.json"
        assert main([
            "bench", "--model", str(model_path), "--input", str(instances),
            "--output", str(report_path),
        ]) == 0
        capsys.readouterr()
        report = json.loads(report_path.read_text())
        assert report["instances"] == 1
        stats = report["classes"]["1"]
        assert stats["time_std"] == 0.0 and stats["size_std"] == 0.0
        assert report["max_queries_per_instance"] <= report["query_budget_per_instance"]

    def test_zero_instances_is_success(self, tmp_path, capsys):
        model_path = tmp_path / "reject.json"
        model_path.write_text(json.dumps(demo_reject_doc()))
        instances = tmp_path / "inst.csv"
        instances.write_text("f1,f2\n")
        assert main([
            "bench", "--model", str(model_path), "--input", str(instances),
        ]) == 0
        assert "benchmarked 0 instance(s)" in capsys.readouterr().out
