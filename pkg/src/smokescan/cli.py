"""Command-line interface: run, resume, eval, synth, export."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import yaml

from smokescan import __version__, export, pipeline
from smokescan.config import PipelineConfig, dump_config, load_config
from smokescan.evalharness import (
    LabelArray,
    SceneEvent,
    SceneSpec,
    load_labels,
    rasterize_events,
    score_day,
    synth_sequence,
)
from smokescan.events import EventSegment, ResponseSeries


def _add_run(subparsers):
    p = subparsers.add_parser("run", help="process one day of frames")
    p.add_argument("--config", type=Path, help="YAML config file (defaults otherwise)")
    p.add_argument("--input", type=Path, help="directory of frame images")
    p.add_argument("--output", type=Path, help="output directory")
    p.add_argument("--dump-stages", action="store_true", help="write per-stage debug images")
    p.add_argument("--workers", type=int, help="parallel frame workers")
    p.add_argument(
        "--print-config",
        action="store_true",
        help="print the fully resolved config and exit",
    )


def _add_resume(subparsers):
    p = subparsers.add_parser("resume", help="continue an interrupted run")
    p.add_argument("--output", type=Path, required=True, help="output directory of the run")
    p.add_argument("--input", type=Path, help="frame directory (defaults to the recorded one)")


def _add_eval(subparsers):
    p = subparsers.add_parser("eval", help="score a run against ground-truth labels")
    p.add_argument("--predictions", type=Path, required=True, help="run output directory")
    p.add_argument("--labels", type=Path, required=True, help="label file (frame_index,0|1)")
    p.add_argument("--overlap", type=float, default=0.3, help="segment overlap threshold")
    p.add_argument("--out", type=Path, help="write metrics CSV here (stdout otherwise)")


def _add_synth(subparsers):
    p = subparsers.add_parser("synth", help="generate a synthetic labeled day")
    p.add_argument("--spec", type=Path, required=True, help="scene spec YAML")
    p.add_argument("--output", type=Path, required=True, help="output directory")


def _add_export(subparsers):
    p = subparsers.add_parser("export", help="write timeline JSON and animated clips")
    p.add_argument("--run", type=Path, required=True, help="run output directory")
    p.add_argument("--frames", type=Path, required=True, help="frame directory")
    p.add_argument("--stride", type=int, default=6, help="frames between clip samples")
    p.add_argument("--max-dim", type=int, default=480, help="longest clip side in pixels")
    p.add_argument("--clip-format", choices=("gif", "png"), default="gif",
                   help="animated clip format (png = animated PNG)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smokescan",
        description="Batch smoke-emission detection for timelapse frame sequences",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run(subparsers)
    _add_resume(subparsers)
    _add_eval(subparsers)
    _add_synth(subparsers)
    _add_export(subparsers)
    return parser


def _resolved_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.dump_stages:
        overrides["dump_stages"] = True
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def cmd_run(args) -> int:
    config = _resolved_config(args)
    if args.print_config:
        sys.stdout.write(dump_config(config))
        return 0
    if not args.input or not args.output:
        print("run requires --input and --output", file=sys.stderr)
        return 2
    result = pipeline.run_day(config, args.input, args.output)
    n_frames = len(result.series.values)
    print(
        f"processed {n_frames} frames, {len(result.events)} event(s), "
        f"wall {result.manifest['wall_time_s']}s"
    )
    return 0


def cmd_resume(args) -> int:
    result = pipeline.resume(args.output, args.input)
    print(
        f"run {result.manifest.get('status')}: last frame "
        f"{result.manifest.get('last_completed_frame')}, {len(result.events)} event(s)"
    )
    return 0


def _predictions_from_run(run_dir: Path, length: int) -> LabelArray:
    events_payload = json.loads((run_dir / pipeline.EVENTS_FILE).read_text())
    intervals = [(e["start"], e["end"]) for e in events_payload]
    return rasterize_events(intervals, length)


def cmd_eval(args) -> int:
    truth = load_labels(args.labels)
    predictions = _predictions_from_run(args.predictions, truth.values.size)
    manifest = json.loads((args.predictions / pipeline.MANIFEST_FILE).read_text())
    report = score_day(predictions, truth, overlap=args.overlap)
    lines = [
        "date,TP,FP,FN,precision,recall,fscore",
        f"{manifest.get('day_id', '')},{report.tp},{report.fp},{report.fn},"
        f"{report.precision:.4f},{report.recall:.4f},{report.fscore:.4f}",
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def scene_spec_from_dict(data: dict) -> SceneSpec:
    events = tuple(SceneEvent(**e) for e in data.pop("events", []))
    return SceneSpec(events=events, **data)


def cmd_synth(args) -> int:
    data = yaml.safe_load(args.spec.read_text())
    spec = scene_spec_from_dict(data or {})
    labels = synth_sequence(spec, args.output)
    print(
        f"wrote {spec.frames} frames to {args.output / 'frames'} "
        f"({int(labels.values.sum())} plume-labeled)"
    )
    return 0


def cmd_export(args) -> int:
    responses = pipeline.read_responses(args.run / pipeline.RESPONSES_FILE)
    manifest = json.loads((args.run / pipeline.MANIFEST_FILE).read_text())
    day_id = manifest.get("day_id", "")
    series = ResponseSeries(
        values=[(r.frame_index, r.response) for r in responses], day_id=day_id
    )
    events_payload = json.loads((args.run / pipeline.EVENTS_FILE).read_text())
    events = [
        EventSegment(
            start=e["start"],
            end=e["end"],
            peak_index=e["peak_index"],
            peak_value=e["peak_value"],
        )
        for e in events_payload
    ]
    export.write_timeline(series, events, args.run)
    clips, warnings = export.export_clips(
        events,
        args.frames,
        args.run,
        day_id,
        stride=args.stride,
        max_dim=args.max_dim,
        fmt=args.clip_format,
    )
    print(f"wrote {len(clips)} clip(s), {len(warnings)} warning(s)")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "resume": cmd_resume,
        "eval": cmd_eval,
        "synth": cmd_synth,
        "export": cmd_export,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
