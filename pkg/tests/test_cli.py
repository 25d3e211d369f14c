import json
from pathlib import Path

import pytest

from cogstate.cli import main


def run(args):
    return main(args)


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    """One full demo pipeline run shared by the read-only CLI tests."""
    out = tmp_path_factory.mktemp("run")
    base = [
        "--out", str(out), "--seed", "11", "--folds", "2", "--split", "epoch",
        "--train-epochs", "6",
    ]
    for command in ("synth", "preprocess", "connect", "select", "label",
                    "train", "evaluate", "report"):
        code = run([command, *base])
        assert code == 0, f"{command} failed"
    return out


class TestPipelineCommands:
    def test_synth_outputs(self, demo_run):
        cohort = demo_run / "cohort"
        assert sorted(p.name for p in cohort.glob("*.csv")) == [
            "S00.csv", "S01.csv", "S02.csv", "S03.csv",
        ]
        truth = json.loads((cohort / "ground_truth.json").read_text())
        assert truth["schema"] == "cogstate.ground_truth/v1"
        assert len(truth["informative_channels"]) == 8

    def test_preprocess_outputs(self, demo_run):
        pre = demo_run / "preprocessed"
        assert len(list(pre.glob("*.csv"))) == 4
        log = json.loads((pre / "preprocess_log.json").read_text())
        assert len(log["subjects"]) == 4
        psd = json.loads((pre / "psd.json").read_text())
        assert psd["schema"] == "cogstate.psd/v1"
        assert len(psd["channels"]) == 20

    def test_connect_outputs(self, demo_run):
        con = demo_run / "connect"
        matrix = json.loads((con / "overall_matrix.json").read_text())
        assert len(matrix["values"]) == 20
        edges = json.loads((con / "edges_top.json").read_text())
        assert len(edges["edges"]) == 20
        for name in ("matrix_male.json", "matrix_female.json",
                     "edges_positive.json", "edges_negative.json",
                     "embedding.json", "task_weights.json", "overall_matrix.csv"):
            assert (con / name).exists(), name

    def test_select_recovers_planted_channels(self, demo_run):
        selected = json.loads((demo_run / "select" / "selected.json").read_text())
        truth = json.loads((demo_run / "cohort" / "ground_truth.json").read_text())
        overlap = set(selected["channels"]) & set(truth["informative_channels"])
        assert len(selected["channels"]) == 8
        assert len(overlap) >= 7

    def test_label_output(self, demo_run):
        lines = (demo_run / "label" / "labels.csv").read_text().strip().split("\n")
        header = 2  # stamp comment + column header
        assert len(lines) == header + 4 * 9
        assert lines[1] == "subject_id,task,difficulty,performance,nasa_tlx,score,state"

    def test_train_outputs(self, demo_run):
        train_dir = demo_run / "train"
        spec = json.loads((train_dir / "model.json").read_text())
        assert spec["name"] == "mha-eegnet"
        curves = json.loads((train_dir / "curves.json").read_text())
        assert len(curves["curves"]) == 6
        assert (train_dir / "params.bin").exists()
        index = json.loads((train_dir / "params.index.json").read_text())
        assert index["schema"] == "cogstate.params/v1"

    def test_evaluate_outputs(self, demo_run):
        report = json.loads((demo_run / "evaluate" / "report.json").read_text())
        assert report["schema"] == "cogstate.report/v1"
        assert len(report["folds"]) == 2
        for fold in report["folds"]:
            assert len(fold["confusion"]) == 3
        assert 0.0 <= report["aggregate"]["accuracy_top1"] <= 1.0

    def test_report_bundle(self, demo_run):
        bundle = demo_run / "report"
        expected = {
            "psd.json", "overall_matrix.json", "edges_top.json",
            "edges_positive.json", "edges_negative.json", "ranking.json",
            "curves.json", "report.json", "montage.json",
        }
        assert expected <= {p.name for p in bundle.glob("*.json")}
        montage = json.loads((bundle / "montage.json").read_text())
        assert len(montage["channels"]) == 20

    def test_artifacts_stamped(self, demo_run):
        payload = json.loads((demo_run / "connect" / "edges_top.json").read_text())
        assert "stamp" in payload
        assert set(payload["stamp"]) == {"config_hash", "toolkit_version"}


def _run_all(out: Path, extra=()):
    base = ["--out", str(out), "--seed", "11", "--folds", "2", "--split", "epoch",
            "--train-epochs", "4", *extra]
    for command in ("synth", "preprocess", "connect", "select", "label",
                    "train", "evaluate", "report"):
        assert run([command, *base]) == 0


def _tree_bytes(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run_all(a)
    _run_all(b)
    ta, tb = _tree_bytes(a), _tree_bytes(b)
    assert set(ta) == set(tb)
    for name in ta:
        assert ta[name] == tb[name], f"{name} differs between identical runs"


def test_missing_upstream_artifact_names_producer(tmp_path, capsys):
    code = run(["connect", "--out", str(tmp_path / "empty")])
    assert code == 3
    err = capsys.readouterr().err
    assert "cogstate preprocess" in err


def test_train_without_labels_names_label_command(tmp_path, capsys):
    out = tmp_path / "r"
    assert run(["synth", "--out", str(out)]) == 0
    assert run(["preprocess", "--out", str(out)]) == 0
    code = run(["train", "--out", str(out)])
    assert code == 3
    assert "cogstate label" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path, capsys):
    code = run(["synth", "--out", str(tmp_path), "--electrodes", "everything"])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{\"cohort\": \"mars\"}")
    code = run(["synth", "--out", str(tmp_path), "--config", str(cfg)])
    assert code == 2


def test_config_file_plus_flag_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"demo_subjects": 4, "seed": 3}))
    out = tmp_path / "run"
    assert run(["synth", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    manifest = json.loads((out / "manifest-synth.json").read_text())
    assert manifest["config"]["seed"] == 5
    assert manifest["config"]["demo_subjects"] == 4


def test_no_stamp_flag(tmp_path):
    out = tmp_path / "r"
    assert run(["synth", "--out", str(out), "--no-stamp"]) == 0
    truth = json.loads((out / "cohort" / "ground_truth.json").read_text())
    assert "stamp" not in truth
