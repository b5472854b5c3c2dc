"""End-to-end CLI behavior, including byte-reproducibility of outputs."""

import json
from pathlib import Path

import pytest

from cfex.cli import main

from cli_matrix import SPEED, model_path, prepare_workdir, run_twice, seeded_commands


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return prepare_workdir(tmp_path_factory.mktemp("cli"))


def _model(workdir):
    return model_path(workdir)


class TestSubcommands:
    def test_ingest(self, workdir, tmp_path, capsys):
        assert main(["ingest", "--data", str(workdir / "cohort.csv"),
                     "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "ingest_summary.json").read_text())
        assert summary["records"] == 29
        assert summary["class_counts"]["MB"] == 8
        assert "ingested 29 records" in capsys.readouterr().out

    def test_train_outputs(self, workdir):
        out = workdir / "trained"
        assert (out / "model.json").exists()
        summary = json.loads((out / "train_summary.json").read_text())
        assert summary["train_metrics"]["macro_f1"] > 0.8

    def test_explain_single_target(self, workdir, tmp_path):
        assert main(["explain", "--model", _model(workdir),
                     "--data", str(workdir / "cohort.csv"), "--record-id", "mb000",
                     "--target", "EP", "--seed", "3", *SPEED,
                     "--out", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "counterfactuals_EP.json").read_text())
        assert payload["target"] == "EP"
        assert len(payload["members"]) == 2
        assert (tmp_path / "counterfactuals_EP.csv").exists()

    def test_classify_from_values_json(self, workdir, tmp_path):
        assert main(["classify", "--model", _model(workdir),
                     "--values-json", str(workdir / "query.json"),
                     "--seed", "3", *SPEED, "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "distance_report.json").read_text())
        assert report["predicted"] in ("MB", "EP", "PA", "BG")
        assert (tmp_path / "distance_report.csv").exists()

    def test_report_writes_figure_and_tables(self, workdir, tmp_path):
        assert main(["report", "--model", _model(workdir),
                     "--data", str(workdir / "cohort.csv"),
                     "--from", "MB", "--to", "EP", "--seed", "3", *SPEED,
                     "--out", str(tmp_path)]) == 0
        assert (tmp_path / "changes_MB_to_EP.csv").exists()
        assert (tmp_path / "changes_MB_to_EP.png").exists()
        payload = json.loads((tmp_path / "changes_MB_to_EP.json").read_text())
        assert payload["n_patients"] == 8
        assert payload["n_counterfactuals"] <= 8 * 2
        for feature, count in payload["counts"].items():
            if "Parenchyma" in feature:
                assert count == 0

    def test_stats_filtered_transitions(self, workdir, tmp_path):
        assert main(["stats", "--model", _model(workdir),
                     "--data", str(workdir / "cohort.csv"),
                     "--transitions", "MB:EP,EP:EP", "--seed", "3", *SPEED,
                     "--out", str(tmp_path)]) == 0
        rows = json.loads((tmp_path / "significance.json").read_text())
        assert rows, "filtered transitions still produce rows"
        assert {r["transition"] for r in rows} <= {"MB to EP", "EP to EP"}
        assert (tmp_path / "significance.csv").exists()

    def test_kde_outputs(self, workdir, tmp_path):
        assert main(["kde", "--data", str(workdir / "cohort.csv"),
                     "--feature", "T2_Ratio", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "kde_T2_Ratio.png").exists()
        for label in ("MB", "EP", "PA", "BG"):
            assert (tmp_path / f"kde_T2_Ratio_{label}.csv").exists()

    def test_augment_baseline(self, workdir, tmp_path):
        assert main(["augment", "--data", str(workdir / "cohort.csv"),
                     "--scenario", "baseline", "--seed", "5", *SPEED,
                     "--out", str(tmp_path)]) == 0
        comp = json.loads((tmp_path / "composition.json").read_text())
        assert comp["train"]["cf"] == 0
        assert comp["train"]["total"] + comp["test"]["total"] == 29

    def test_augment_scenario_a(self, workdir, tmp_path):
        assert main(["augment", "--data", str(workdir / "cohort.csv"),
                     "--model", _model(workdir),
                     "--scenario", "A", "--seed", "5", *SPEED,
                     "--out", str(tmp_path)]) == 0
        comp = json.loads((tmp_path / "composition.json").read_text())
        assert comp["train"]["cf"] + comp["test"]["cf"] == 2  # EP topped 6 -> 8
        train = (tmp_path / "train.csv").read_text()
        assert "counterfactual" in train or "counterfactual" in (tmp_path / "test.csv").read_text()

    def test_evaluate_runs(self, workdir, tmp_path):
        assert main(["evaluate", "--data", str(workdir / "cohort.csv"),
                     "--scenario", "baseline", "--runs", "2", "--seed", "5", *SPEED,
                     "--out", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "experiment_baseline.json").read_text())
        assert payload["n_runs"] == 2
        assert (tmp_path / "evaluation_table.csv").exists()
        assert (tmp_path / "evaluation_metrics.png").exists()

    def test_error_paths(self, workdir, tmp_path, capsys):
        code = main(["classify", "--model", _model(workdir),
                     "--seed", "1", "--out", str(tmp_path)])
        assert code == 2
        assert "error:" in capsys.readouterr().err
        code = main(["report", "--model", _model(workdir),
                     "--data", str(workdir / "cohort.csv"),
                     "--from", "XX", "--to", "EP", "--seed", "1",
                     "--out", str(tmp_path)])
        assert code == 2


class TestDeterminism:
    """Seeded subcommands must write byte-identical files across runs."""

    @pytest.mark.parametrize("name", sorted(seeded_commands(Path("."))))
    def test_byte_identical_outputs(self, name, workdir, tmp_path):
        argv = seeded_commands(workdir)[name]
        digest_a, digest_b = run_twice(argv, tmp_path)
        assert digest_a, f"{name} wrote no files"
        assert digest_a == digest_b
