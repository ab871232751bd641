"""Evidence artifacts: timeline JSON, animated event clips, and deep links.

The timeline carries a max-pooled response polyline, the event intervals,
and the warm-up span for the review UI. Each event becomes one looping GIF
sampled every ``stride`` frames with a deep link back to the viewer
(``#day=<id>&frame=<n>``). Schemas for both JSON files ship in-repo.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from PIL import Image

from smokescan.events import EventSegment, ResponseSeries
from smokescan.ingest import list_frame_files

TIMELINE_FILE = "timeline.json"
COLLECTION_FILE = "collection.json"
CLIPS_DIR = "clips"
MAX_POLYLINE_POINTS = 2000

_LINK_RE = re.compile(r"#day=(?P<day>[^&]*)&frame=(?P<frame>\d+)$")


@dataclass(frozen=True)
class EvidenceClip:
    event: EventSegment
    file: str
    frame_stride: int
    link: str


def viewer_link(day_id: str, frame: int) -> str:
    """URL fragment seeking the viewer to (day, frame)."""
    return f"#day={day_id}&frame={frame}"


def parse_viewer_link(link: str) -> tuple[str, int]:
    m = _LINK_RE.search(link)
    if not m:
        raise ValueError(f"not a viewer link: {link!r}")
    return m.group("day"), int(m.group("frame"))


def export_timeline(
    series: ResponseSeries,
    events: Sequence[EventSegment],
    max_points: int = MAX_POLYLINE_POINTS,
) -> dict:
    """Timeline JSON: pooled response polyline, events, and warm-up span.

    The polyline is max-pooled into at most ``max_points`` buckets; each
    point reports the bucket's first frame index and its maximum response.
    """
    values = series.values
    warmup = [i for i, v in values if v is None]
    polyline = []
    present = [(i, v) for i, v in values]
    if present:
        bucket = max(1, math.ceil(len(present) / max_points))
        for pos in range(0, len(present), bucket):
            chunk = present[pos : pos + bucket]
            peak = max((v if v is not None else 0) for _, v in chunk)
            polyline.append([chunk[0][0], peak])
    return {
        "day_id": series.day_id,
        "frame_range": [values[0][0], values[-1][0] + 1] if values else [0, 0],
        "warmup_span": [warmup[0], warmup[-1] + 1] if warmup else None,
        "polyline": polyline,
        "events": [
            {
                "start": e.start,
                "end": e.end,
                "peak_index": e.peak_index,
                "peak_value": e.peak_value,
            }
            for e in events
        ],
    }


def write_timeline(
    series: ResponseSeries,
    events: Sequence[EventSegment],
    output_dir: Path,
) -> Path:
    payload = export_timeline(series, events)
    path = Path(output_dir) / TIMELINE_FILE
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def _clip_frames(event: EventSegment, stride: int) -> tuple[list[int], int]:
    """Frame indices sampled for the clip; stride shrinks to keep >= 2 frames."""
    length = event.end - event.start
    stride = max(1, stride)
    if length > 1 and math.ceil(length / stride) < 2:
        stride = max(1, length // 2)
    indices = list(range(event.start, event.end, stride))
    if len(indices) < 2:
        # single-frame event: add the following frame for visible motion
        # (GIF encoders merge bit-identical frames)
        indices.append(indices[-1] + 1)
    return indices, stride


def export_clips(
    events: Sequence[EventSegment],
    frames_dir: Path,
    output_dir: Path,
    day_id: str,
    stride: int = 6,
    max_dim: int = 480,
    playback_fps: float = 12.0,
    fmt: str = "gif",
) -> tuple[list[EvidenceClip], list[dict]]:
    """One looping animated image per event plus the collection index.

    ``fmt`` selects GIF (drag-into-documents friendly) or animated PNG. A
    missing frame skips the clip with a warning entry in the index; every
    event yields exactly one clip or one warning.
    """
    if fmt not in ("gif", "png"):
        raise ValueError("fmt must be 'gif' or 'png'")
    frames_dir = Path(frames_dir)
    output_dir = Path(output_dir)
    clips_dir = output_dir / CLIPS_DIR
    clips_dir.mkdir(parents=True, exist_ok=True)
    files = list_frame_files(frames_dir)

    clips: list[EvidenceClip] = []
    warnings: list[dict] = []
    for event_id, event in enumerate(events):
        indices, used_stride = _clip_frames(event, stride)
        if any(i >= len(files) for i in indices):
            warnings.append(
                {
                    "event_id": event_id,
                    "reason": f"frames missing for interval [{event.start}, {event.end})",
                }
            )
            continue
        images = []
        for i in indices:
            with Image.open(files[i]) as im:
                im = im.convert("RGB")
                im.thumbnail((max_dim, max_dim), Image.LANCZOS)
                images.append(im.copy())
        clip_path = clips_dir / f"event-{event_id:03d}.{fmt}"
        duration_ms = max(int(round(1000.0 / playback_fps)), 20)
        images[0].save(
            clip_path,
            save_all=True,
            append_images=images[1:],
            loop=0,
            duration=duration_ms,
        )
        clips.append(
            EvidenceClip(
                event=event,
                file=str(clip_path.relative_to(output_dir)),
                frame_stride=used_stride,
                link=viewer_link(day_id, event.peak_index),
            )
        )

    collection = {
        "day_id": day_id,
        "clips": [
            {
                "event": {
                    "start": c.event.start,
                    "end": c.event.end,
                    "peak_index": c.event.peak_index,
                    "peak_value": c.event.peak_value,
                },
                "file": c.file,
                "frame_stride": c.frame_stride,
                "link": c.link,
            }
            for c in clips
        ],
        "warnings": warnings,
    }
    (output_dir / COLLECTION_FILE).write_text(json.dumps(collection, indent=2) + "\n")
    return clips, warnings


def schema_path(name: str) -> Path:
    return Path(__file__).parent / "schemas" / name


def load_schema(name: str) -> dict:
    return json.loads(schema_path(name).read_text())
