"""End-to-end CLI coverage: synth, run, eval, export, resume, print-config."""

import json

import pytest
import yaml

from smokescan.cli import main
from smokescan.export import load_schema

jsonschema = pytest.importorskip("jsonschema")

SCENE = {
    "width": 128,
    "height": 128,
    "frames": 36,
    "downsample": 4,
    "seed": 21,
    "texture_cell": 2,
    "events": [
        {
            "kind": "plume",
            "start": 12,
            "end": 30,
            "x": 0.5,
            "y": 0.6,
            "radius_x": 0.22,
            "radius_y": 0.16,
            "opacity": 0.5,
            "period": 10,
            "duty": 0.5,
            "billow": 0.14,
        }
    ],
}

CONFIG = {
    "roi": {"x": 0, "y": 0, "width": 128, "height": 128, "downsample": 4},
    "background_window": 8,
    "seed": 3,
    "clahe": {"tiles": [4, 4], "clip_fraction": 0.05, "nbins": 64},
    "smooth": {"closing_radius": 1, "median_radius": 1, "min_area": 12},
    "texture": {"clusters": 3, "min_area": 8, "median_radius": 1},
    "regions": {"area_min": 12, "change_min": 0.1},
    "events": {"min_height": 20, "min_prominence": 10, "merge_gap": 8},
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec_path = root / "scene.yaml"
    spec_path.write_text(yaml.safe_dump(SCENE))
    config_path = root / "config.yaml"
    config_path.write_text(yaml.safe_dump(CONFIG))
    day_dir = root / "day"
    assert main(["synth", "--spec", str(spec_path), "--output", str(day_dir)]) == 0
    run_dir = root / "run"
    assert main([
        "run", "--config", str(config_path),
        "--input", str(day_dir / "frames"), "--output", str(run_dir),
    ]) == 0
    return root


def test_synth_writes_frames_and_labels(workspace):
    frames = sorted((workspace / "day" / "frames").iterdir())
    assert len(frames) == 36
    labels = (workspace / "day" / "labels.csv").read_text().splitlines()
    assert len(labels) == 36
    assert labels[12] == "12,1"


def test_run_outputs(workspace):
    run_dir = workspace / "run"
    assert (run_dir / "responses.csv").exists()
    assert (run_dir / "events.json").exists()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["status"] == "complete"


def test_eval_outputs_metrics_csv(workspace, capsys):
    assert main([
        "eval", "--predictions", str(workspace / "run"),
        "--labels", str(workspace / "day" / "labels.csv"),
    ]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "date,TP,FP,FN,precision,recall,fscore"
    fields = out[1].split(",")
    assert len(fields) == 7


def test_export_writes_valid_artifacts(workspace):
    assert main([
        "export", "--run", str(workspace / "run"),
        "--frames", str(workspace / "day" / "frames"), "--stride", "4",
    ]) == 0
    timeline = json.loads((workspace / "run" / "timeline.json").read_text())
    jsonschema.validate(timeline, load_schema("timeline.schema.json"))
    collection = json.loads((workspace / "run" / "collection.json").read_text())
    jsonschema.validate(collection, load_schema("collection.schema.json"))
    events = json.loads((workspace / "run" / "events.json").read_text())
    assert len(collection["clips"]) + len(collection["warnings"]) == len(events)


def test_resume_cli_noop_on_complete(workspace, capsys):
    assert main(["resume", "--output", str(workspace / "run")]) == 0
    assert "complete" in capsys.readouterr().out


def test_print_config_is_loadable_yaml(capsys):
    assert main(["run", "--print-config"]) == 0
    parsed = yaml.safe_load(capsys.readouterr().out)
    assert parsed["background_window"] == 60
    assert parsed["roi"]["width"] == 496


def test_run_requires_io_paths(capsys):
    assert main(["run"]) == 2
