"""Timeline export, clip encoding, and deep-link round trips."""

import json

import numpy as np
import pytest
from PIL import Image

jsonschema = pytest.importorskip("jsonschema")

from smokescan.events import EventSegment, ResponseSeries
from smokescan.export import (
    export_clips,
    export_timeline,
    load_schema,
    parse_viewer_link,
    viewer_link,
    write_timeline,
)


def make_series(values, day_id="2015-05-02"):
    return ResponseSeries(values=[(i, v) for i, v in enumerate(values)], day_id=day_id)


def make_frames(directory, count, size=(64, 48)):
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(1)
    for i in range(count):
        arr = rng.integers(0, 256, (size[1], size[0], 3), dtype=np.uint8)
        Image.fromarray(arr, "RGB").save(directory / f"{i:05d}.png")


EVENT = EventSegment(start=10, end=40, peak_index=20, peak_value=500)


class TestTimeline:
    def test_empty_day(self):
        payload = export_timeline(make_series([0] * 100), [])
        assert payload["events"] == []
        assert all(point[1] == 0 for point in payload["polyline"])

    def test_long_series_max_pooled(self):
        values = [0] * 16838
        values[5000] = 700
        payload = export_timeline(make_series(values), [])
        assert len(payload["polyline"]) <= 2000
        assert max(point[1] for point in payload["polyline"]) == 700

    def test_event_order_preserved(self):
        second = EventSegment(start=50, end=60, peak_index=55, peak_value=100)
        payload = export_timeline(make_series([0] * 100), [EVENT, second])
        starts = [e["start"] for e in payload["events"]]
        assert starts == [10, 50]

    def test_warmup_span_recorded(self):
        series = make_series([None] * 10 + [0] * 30)
        payload = export_timeline(series, [])
        assert payload["warmup_span"] == [0, 10]

    def test_validates_against_schema(self, tmp_path):
        series = make_series([None] * 5 + [int(v) for v in range(40)])
        path = write_timeline(series, [EVENT], tmp_path)
        payload = json.loads(path.read_text())
        jsonschema.validate(payload, load_schema("timeline.schema.json"))


class TestClips:
    def test_stride_arithmetic(self, tmp_path):
        make_frames(tmp_path / "frames", 60)
        event = EventSegment(start=0, end=60, peak_index=30, peak_value=10)
        clips, warnings = export_clips(
            [event], tmp_path / "frames", tmp_path / "out", "day", stride=6
        )
        assert not warnings
        assert len(clips) == 1
        with Image.open(tmp_path / "out" / clips[0].file) as im:
            assert getattr(im, "n_frames", 1) == 10

    def test_zero_events_empty_collection(self, tmp_path):
        make_frames(tmp_path / "frames", 5)
        clips, warnings = export_clips([], tmp_path / "frames", tmp_path / "out", "day")
        collection = json.loads((tmp_path / "out" / "collection.json").read_text())
        assert collection["clips"] == [] and collection["warnings"] == []
        jsonschema.validate(collection, load_schema("collection.schema.json"))

    def test_decoded_clip_dimensions_and_count(self, tmp_path):
        make_frames(tmp_path / "frames", 30, size=(128, 96))
        event = EventSegment(start=0, end=30, peak_index=5, peak_value=9)
        clips, _ = export_clips(
            [event], tmp_path / "frames", tmp_path / "out", "day", stride=5, max_dim=64
        )
        with Image.open(tmp_path / "out" / clips[0].file) as im:
            assert im.n_frames == 6
            assert max(im.size) <= 64

    def test_missing_frames_warn_not_drop(self, tmp_path):
        make_frames(tmp_path / "frames", 10)
        good = EventSegment(start=0, end=8, peak_index=4, peak_value=5)
        bad = EventSegment(start=5, end=50, peak_index=6, peak_value=5)
        clips, warnings = export_clips(
            [good, bad], tmp_path / "frames", tmp_path / "out", "day", stride=2
        )
        assert len(clips) == 1 and len(warnings) == 1
        assert warnings[0]["event_id"] == 1
        collection = json.loads((tmp_path / "out" / "collection.json").read_text())
        jsonschema.validate(collection, load_schema("collection.schema.json"))
        assert len(collection["clips"]) + len(collection["warnings"]) == 2

    def test_short_event_still_two_frames(self, tmp_path):
        make_frames(tmp_path / "frames", 10)
        event = EventSegment(start=3, end=4, peak_index=3, peak_value=5)
        clips, _ = export_clips(
            [event], tmp_path / "frames", tmp_path / "out", "day", stride=6
        )
        with Image.open(tmp_path / "out" / clips[0].file) as im:
            assert im.n_frames >= 2

    def test_animated_png_alternative(self, tmp_path):
        make_frames(tmp_path / "frames", 12)
        event = EventSegment(start=0, end=12, peak_index=5, peak_value=9)
        clips, _ = export_clips(
            [event], tmp_path / "frames", tmp_path / "out", "day", stride=3, fmt="png"
        )
        assert clips[0].file.endswith(".png")
        with Image.open(tmp_path / "out" / clips[0].file) as im:
            assert im.format == "PNG"
            assert im.n_frames == 4


class TestLinks:
    def test_round_trip(self):
        link = viewer_link("2015-05-02", 4321)
        assert parse_viewer_link(link) == ("2015-05-02", 4321)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_viewer_link("#nothing")
