"""Per-day orchestration: ingest, change, texture, regions, events.

One sequential pass maintains the rolling background; the per-frame
detection work is a pure function of (frame, frame t-2, background, config)
and can be farmed to a process pool without changing results. Responses are
persisted incrementally so an interrupted run can resume and produce outputs
identical to an uninterrupted one.
"""

from __future__ import annotations

import csv
import json
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from PIL import Image

from smokescan import __version__, change, regions, texture
from smokescan.config import PipelineConfig, dump_config, load_config
from smokescan.events import EventSegment, ResponseSeries, detect_events
from smokescan.ingest import BackgroundModel, FrameBuffer, load_sequence

STAGE_NONE = "none"
STAGE_WARMUP = "warmup"
STAGE_NO_PAIR = "no-pair"
STAGE_AFTER_M_DOG = "after-m-dog"
STAGE_AFTER_M_CD = "after-m-cd"

RESPONSES_FILE = "responses.csv"
EVENTS_FILE = "events.json"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.yaml"

MANIFEST_FLUSH_EVERY = 25


class ResumeError(RuntimeError):
    pass


@dataclass
class FrameResult:
    frame_index: int
    response: Optional[int]
    early_stop_stage: str
    timings_ms: dict[str, float]

    def __post_init__(self):
        if self.early_stop_stage not in (STAGE_NONE,):
            if self.response not in (None, 0):
                raise ValueError("early-stopped frames must report response 0")


@dataclass
class FrameTask:
    """Everything a stateless worker needs to process one frame."""

    frame_index: int
    frame: np.ndarray
    frame_prev2: np.ndarray
    background: np.ndarray
    config: PipelineConfig
    seed: int
    force_full: bool = False
    dump_dir: Optional[str] = None


def _detect_frame(task: FrameTask) -> FrameResult:
    """Change detection, texture segmentation, and region filtering for one frame."""
    cfg = task.config
    stages: Optional[dict] = {} if task.dump_dir else None
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    mask_hf, stop_hf = change.detect_hf_change(
        task.frame, task.background, cfg.dog, cfg.change_thresholds, cfg.smooth, stages
    )
    timings["hf_change"] = (time.perf_counter() - t0) * 1e3
    if stop_hf and not task.force_full:
        _dump_stages(task, stages)
        return FrameResult(task.frame_index, 0, STAGE_AFTER_M_DOG, timings)

    t0 = time.perf_counter()
    mask_intensity = change.detect_intensity_change(
        task.frame,
        task.frame_prev2,
        task.background,
        cfg.clahe,
        cfg.change_thresholds,
        cfg.smooth,
        stages,
    )
    mask_change, stop_cd = change.combine_change(mask_hf, mask_intensity)
    timings["intensity_change"] = (time.perf_counter() - t0) * 1e3
    if stages is not None:
        stages["m_cd"] = mask_change
    if stop_cd and not task.force_full:
        _dump_stages(task, stages)
        return FrameResult(task.frame_index, 0, STAGE_AFTER_M_CD, timings)

    t0 = time.perf_counter()
    enhanced = change.clahe(task.frame, cfg.clahe)
    features = texture.compute_features(enhanced)
    rng = np.random.default_rng(task.seed)
    reduced = texture.pca_reduce(
        features, cfg.texture.pca_energy, rng=rng, max_fit_rows=cfg.texture.pca_fit_rows
    )
    labels, _ = texture.cluster_textons(
        reduced, cfg.texture.clusters, task.seed, cfg.texture.max_iter
    )
    smoothed = texture.smooth_segmentation(
        labels,
        cfg.texture.clusters,
        cfg.texture.min_area,
        cfg.texture.median_radius,
        cfg.texture.closing_radius,
    )
    timings["texture"] = (time.perf_counter() - t0) * 1e3
    if stages is not None:
        stages["r_t"] = labels
        stages["r_smooth"] = smoothed

    t0 = time.perf_counter()
    candidates = regions.extract_regions(smoothed, mask_change)
    residual = regions.scalar_residual(task.frame, task.background)
    survivors = regions.apply_region_filters(
        candidates, task.frame, mask_change, residual, cfg.regions, stages
    )
    mask_final, response = regions.finalize(survivors, mask_change.shape)
    timings["regions"] = (time.perf_counter() - t0) * 1e3
    if stages is not None:
        stages["m_t"] = mask_final
    _dump_stages(task, stages)

    if stop_hf or stop_cd:
        # force_full run on an early-stop frame: the stage label still
        # records where the normal path would have stopped.
        stage = STAGE_AFTER_M_DOG if stop_hf else STAGE_AFTER_M_CD
        return FrameResult(task.frame_index, response, STAGE_NONE if response else stage, timings)
    return FrameResult(task.frame_index, response, STAGE_NONE, timings)


def _dump_stages(task: FrameTask, stages: Optional[dict]) -> None:
    if not task.dump_dir or not stages:
        return
    out = Path(task.dump_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, value in stages.items():
        if name == "kde":
            for i, (_, estimate) in enumerate(value):
                rows = np.column_stack([estimate.grid, estimate.density])
                np.savetxt(
                    out / f"{task.frame_index:05d}_kde_{i:02d}.csv",
                    rows,
                    delimiter=",",
                    header="grid,density",
                    comments="",
                )
            continue
        arr = np.asarray(value)
        if arr.dtype == bool:
            img = (arr * 255).astype(np.uint8)
        elif np.issubdtype(arr.dtype, np.integer):
            peak = max(int(arr.max()), 1)
            img = (arr * (255 // peak)).astype(np.uint8)
        else:
            img = np.clip(arr * 255.0, 0, 255).astype(np.uint8)
        Image.fromarray(img).save(out / f"{task.frame_index:05d}_{name}.png")


def run_frame_task(task: FrameTask) -> FrameResult:
    return _detect_frame(task)


@dataclass
class RunResult:
    series: ResponseSeries
    events: list[EventSegment]
    manifest: dict


class _ResponsesWriter:
    """Appends one CSV row per frame; rewrites the prefix kept on resume."""

    def __init__(self, path: Path, keep_rows: Optional[list] = None):
        self.path = path
        mode = "w"
        self._fh = open(path, mode, newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(["frame_index", "response", "early_stop_stage"])
        for row in keep_rows or []:
            self._writer.writerow(row)
        self._fh.flush()

    def write(self, result: FrameResult) -> None:
        response = "" if result.response is None else result.response
        self._writer.writerow([result.frame_index, response, result.early_stop_stage])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def read_responses(path: Path) -> list[FrameResult]:
    results = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            response = None if row["response"] == "" else int(row["response"])
            results.append(
                FrameResult(
                    frame_index=int(row["frame_index"]),
                    response=response,
                    early_stop_stage=row["early_stop_stage"],
                    timings_ms={},
                )
            )
    return results


def _write_manifest(path: Path, manifest: dict) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _series_from_results(results: list[FrameResult], day_id: str) -> ResponseSeries:
    values = [(r.frame_index, r.response) for r in sorted(results, key=lambda r: r.frame_index)]
    return ResponseSeries(values=values, day_id=day_id)


def _frame_tasks(
    config: PipelineConfig,
    frames: Iterator[FrameBuffer],
    model: BackgroundModel,
    cache: dict[int, np.ndarray],
    force_full_frames: Optional[set[int]],
    dump_dir: Optional[str],
) -> Iterator[tuple[FrameBuffer, Optional[FrameTask], str]]:
    """Drive the sequential background pass; yield a task for eligible frames."""
    warmup_end = config.day_start + config.background_window
    pair_end = warmup_end + 2
    for frame in frames:
        model.update(frame)
        t = frame.index
        if t < warmup_end:
            yield frame, None, STAGE_WARMUP
        elif t < pair_end:
            yield frame, None, STAGE_NO_PAIR
        else:
            task = FrameTask(
                frame_index=t,
                frame=frame.pixels,
                frame_prev2=cache[t - 2],
                background=np.asarray(model.background()),
                config=config,
                seed=config.seed ^ t,
                force_full=bool(force_full_frames and t in force_full_frames),
                dump_dir=dump_dir,
            )
            yield frame, task, STAGE_NONE
        cache[t] = frame.pixels
        cache.pop(t - 2, None)


def _run_frames(
    config: PipelineConfig,
    input_dir: Path,
    output_dir: Path,
    start_frame: int,
    kept_results: list[FrameResult],
    stop_after_frame: Optional[int] = None,
    force_full_frames: Optional[set[int]] = None,
) -> RunResult:
    day_id = Path(input_dir).name
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    dump_dir = str(output_dir / "stages") if config.dump_stages else None

    day_end = config.day_end
    manifest = {
        "version": __version__,
        "day_id": day_id,
        "input_dir": str(Path(input_dir).resolve()),
        "config_hash": config.hash(),
        "seed": config.seed,
        "workers": config.workers,
        "day_start": config.day_start,
        "day_end": day_end,
        "status": "running",
        "last_completed_frame": kept_results[-1].frame_index if kept_results else None,
        "timings_ms": {},
        "wall_time_s": None,
    }
    _write_manifest(output_dir / MANIFEST_FILE, manifest)

    keep_rows = [
        [r.frame_index, "" if r.response is None else r.response, r.early_stop_stage]
        for r in kept_results
    ]
    writer = _ResponsesWriter(output_dir / RESPONSES_FILE, keep_rows)
    results: list[FrameResult] = list(kept_results)
    totals: dict[str, float] = {}
    wall_start = time.perf_counter()

    # Preload: frames before start_frame that the background window and the
    # t-2 cache still need. They produce no results.
    preload_from = max(config.day_start, start_frame - config.background_window + 1)

    model = BackgroundModel(config.background_window)
    cache: dict[int, np.ndarray] = {}
    for frame in load_sequence(
        input_dir, config.roi, preload_from, start_frame, config.downsample_method
    ):
        model.update(frame)
        cache[frame.index] = frame.pixels
        cache.pop(frame.index - 2, None)

    frames = load_sequence(
        input_dir, config.roi, start_frame, day_end, config.downsample_method
    )
    tasks = _frame_tasks(config, frames, model, cache, force_full_frames, dump_dir)

    def record(result: FrameResult) -> None:
        results.append(result)
        writer.write(result)
        for stage, ms in result.timings_ms.items():
            totals[stage] = totals.get(stage, 0.0) + ms
        manifest["last_completed_frame"] = result.frame_index
        if (result.frame_index - config.day_start) % MANIFEST_FLUSH_EVERY == 0:
            _write_manifest(output_dir / MANIFEST_FILE, manifest)

    stopped_early = False
    try:
        if config.workers <= 1:
            for frame, task, stage in tasks:
                if task is None:
                    record(FrameResult(frame.index, None if stage == STAGE_WARMUP else 0, stage, {}))
                else:
                    record(run_frame_task(task))
                if stop_after_frame is not None and frame.index >= stop_after_frame:
                    stopped_early = True
                    break
        else:
            inflight: deque = deque()
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for frame, task, stage in tasks:
                    if task is None:
                        while inflight:
                            record(inflight.popleft().result())
                        record(FrameResult(frame.index, None if stage == STAGE_WARMUP else 0, stage, {}))
                    else:
                        inflight.append(pool.submit(run_frame_task, task))
                        while len(inflight) > config.workers * 2:
                            record(inflight.popleft().result())
                    if stop_after_frame is not None and frame.index >= stop_after_frame:
                        stopped_early = True
                        break
                while inflight:
                    record(inflight.popleft().result())
    except BaseException:
        manifest["status"] = "aborted"
        manifest["timings_ms"] = {k: round(v, 3) for k, v in totals.items()}
        manifest["wall_time_s"] = round(time.perf_counter() - wall_start, 3)
        _write_manifest(output_dir / MANIFEST_FILE, manifest)
        writer.close()
        raise
    writer.close()

    if stopped_early:
        manifest["status"] = "aborted"
        manifest["timings_ms"] = {k: round(v, 3) for k, v in totals.items()}
        manifest["wall_time_s"] = round(time.perf_counter() - wall_start, 3)
        _write_manifest(output_dir / MANIFEST_FILE, manifest)
        series = _series_from_results(results, day_id)
        return RunResult(series=series, events=[], manifest=manifest)

    series = _series_from_results(results, day_id)
    event_list = detect_events(series, config.events)
    events_payload = [
        {
            "start": e.start,
            "end": e.end,
            "peak_index": e.peak_index,
            "peak_value": e.peak_value,
        }
        for e in event_list
    ]
    (output_dir / EVENTS_FILE).write_text(json.dumps(events_payload, indent=2) + "\n")

    manifest["status"] = "complete"
    manifest["timings_ms"] = {k: round(v, 3) for k, v in totals.items()}
    manifest["wall_time_s"] = round(time.perf_counter() - wall_start, 3)
    _write_manifest(output_dir / MANIFEST_FILE, manifest)
    return RunResult(series=series, events=event_list, manifest=manifest)


def run_day(
    config: PipelineConfig,
    input_dir: Path,
    output_dir: Path,
    stop_after_frame: Optional[int] = None,
    force_full_frames: Optional[set[int]] = None,
) -> RunResult:
    """Process one day of frames, writing responses, events, and a manifest.

    ``stop_after_frame`` aborts the run after that frame completes (the
    manifest marks it, mirroring an I/O failure); ``force_full_frames`` runs
    every stage on the listed frames even when early termination applies.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / CONFIG_FILE).write_text(dump_config(config))
    return _run_frames(
        config,
        Path(input_dir),
        output_dir,
        config.day_start,
        kept_results=[],
        stop_after_frame=stop_after_frame,
        force_full_frames=force_full_frames,
    )


def resume(output_dir: Path, input_dir: Optional[Path] = None) -> RunResult:
    """Continue an interrupted run; outputs match an uninterrupted run.

    The stored config must hash to the manifest's config hash; a completed
    run is a no-op. The background window is rebuilt from the frames
    preceding the checkpoint.
    """
    output_dir = Path(output_dir)
    manifest_path = output_dir / MANIFEST_FILE
    if not manifest_path.exists():
        raise ResumeError(f"no manifest in {output_dir}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ResumeError(f"corrupt manifest: {exc}") from exc

    config_path = output_dir / CONFIG_FILE
    if not config_path.exists():
        raise ResumeError(f"missing {CONFIG_FILE} in {output_dir}")
    config = load_config(config_path)
    if config.hash() != manifest.get("config_hash"):
        raise ResumeError(
            "config mismatch: stored config hashes to "
            f"{config.hash()} but manifest records {manifest.get('config_hash')}"
        )

    if manifest.get("status") == "complete":
        results = read_responses(output_dir / RESPONSES_FILE)
        series = _series_from_results(results, manifest.get("day_id", ""))
        events_payload = json.loads((output_dir / EVENTS_FILE).read_text())
        event_list = [
            EventSegment(
                start=e["start"],
                end=e["end"],
                peak_index=e["peak_index"],
                peak_value=e["peak_value"],
            )
            for e in events_payload
        ]
        return RunResult(series=series, events=event_list, manifest=manifest)

    if input_dir is None:
        input_dir = manifest.get("input_dir")
        if input_dir is None:
            raise ResumeError("input directory unknown; pass input_dir")
    last = manifest.get("last_completed_frame")
    kept: list[FrameResult] = []
    responses_path = output_dir / RESPONSES_FILE
    if last is not None and responses_path.exists():
        kept = [r for r in read_responses(responses_path) if r.frame_index <= last]
    start_frame = config.day_start if last is None else last + 1
    return _run_frames(
        config,
        Path(input_dir),
        output_dir,
        start_frame,
        kept_results=kept,
    )


def process_single_frame(
    config: PipelineConfig,
    input_dir: Path,
    frame_index: int,
    force_full: bool = True,
) -> FrameResult:
    """Rebuild the state for one frame and run detection on it alone.

    Requires the frame to be past warm-up and the t-2 pair window.
    """
    warmup_end = config.day_start + config.background_window
    if frame_index < warmup_end + 2:
        raise ValueError(f"frame {frame_index} is inside warm-up; nothing to run")
    start = max(config.day_start, frame_index - config.background_window + 1)
    model = BackgroundModel(config.background_window)
    prev2: Optional[np.ndarray] = None
    current: Optional[FrameBuffer] = None
    for frame in load_sequence(
        input_dir, config.roi, start, frame_index + 1, config.downsample_method
    ):
        model.update(frame)
        if frame.index == frame_index - 2:
            prev2 = frame.pixels
        if frame.index == frame_index:
            current = frame
    if current is None or prev2 is None:
        raise ValueError(f"frames missing around index {frame_index}")
    task = FrameTask(
        frame_index=frame_index,
        frame=current.pixels,
        frame_prev2=prev2,
        background=np.asarray(model.background()),
        config=config,
        seed=config.seed ^ frame_index,
        force_full=force_full,
    )
    return run_frame_task(task)
