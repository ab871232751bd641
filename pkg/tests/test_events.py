"""Peak finding, interval merging, and event detection tests."""

import numpy as np
import pytest

import oracles
from smokescan.events import (
    EventParams,
    EventSegment,
    ResponseSeries,
    detect_events,
    find_peaks,
    merge_segments,
)


def series_of(values, start=0):
    return ResponseSeries(values=[(start + i, v) for i, v in enumerate(values)])


class TestFindPeaks:
    def test_flat_zero_series(self):
        assert find_peaks(series_of([0] * 50), 5, 1) == []

    def test_triangle_single_peak(self):
        values = list(range(11)) + list(range(9, -1, -1))
        peaks = find_peaks(series_of(values), min_height=5, min_prominence=1)
        assert len(peaks) == 1
        assert peaks[0][0] == 10

    def test_two_triangles_disjoint_widths(self, rng):
        tri = list(range(8)) + list(range(6, -1, -1))
        values = tri + [0] * 5 + tri
        peaks = find_peaks(series_of(values), min_height=3, min_prominence=2)
        expected = oracles.peaks_naive(values, 3, 2)
        assert [(p, w) for p, w in peaks] == expected
        assert len(peaks) == 2
        (_, (l0, r0)), (_, (l1, r1)) = peaks
        assert r0 <= l1

    @pytest.mark.parametrize("trial", range(20))
    def test_matches_exhaustive_oracle(self, trial):
        r = np.random.default_rng(500 + trial)
        values = [int(v) for v in r.integers(0, 40, size=int(r.integers(5, 100)))]
        min_height = float(r.integers(0, 30))
        min_prom = float(r.integers(0, 20))
        got = find_peaks(series_of(values), min_height, min_prom)
        assert got == oracles.peaks_naive(values, min_height, min_prom)

    def test_plateau_reports_leftmost(self):
        values = [0, 5, 5, 5, 0]
        peaks = find_peaks(series_of(values), 1, 1)
        assert peaks[0][0] == 1

    def test_absent_treated_as_zero(self):
        series = ResponseSeries(values=[(0, None), (1, None), (2, 10), (3, 30), (4, 5)])
        peaks = find_peaks(series, min_height=20, min_prominence=10)
        assert peaks and peaks[0][0] == 3


class TestMergeSegments:
    def test_close_pair_merges(self):
        assert merge_segments([(10, 20), (25, 40)], gap=10) == [(10, 40)]

    def test_distant_pair_unchanged(self):
        assert merge_segments([(10, 20), (35, 40)], gap=10) == [(10, 20), (35, 40)]

    @pytest.mark.parametrize("trial", range(20))
    def test_matches_closure_oracle(self, trial):
        r = np.random.default_rng(900 + trial)
        intervals = []
        for _ in range(int(r.integers(0, 12))):
            start = int(r.integers(0, 200))
            intervals.append((start, start + int(r.integers(1, 30))))
        intervals.sort()
        gap = int(r.integers(1, 25))
        assert merge_segments(intervals, gap) == oracles.merge_intervals_naive(
            intervals, gap
        )

    def test_separation_invariant(self, rng):
        intervals = sorted(
            (int(s), int(s) + int(w))
            for s, w in zip(rng.integers(0, 300, 15), rng.integers(1, 40, 15))
        )
        merged = merge_segments(intervals, gap=12)
        for (_, end), (start, _) in zip(merged, merged[1:]):
            assert start - end >= 12


class TestDetectEvents:
    PARAMS = EventParams(min_height=100, min_prominence=50, merge_gap=20)

    def test_flat_day_no_events(self):
        assert detect_events(series_of([0] * 300), self.PARAMS) == []

    def test_sustained_plume_single_event(self):
        values = [0] * 100 + [300] * 60 + [0] * 100
        events = detect_events(series_of(values), self.PARAMS)
        assert len(events) == 1
        event = events[0]
        assert event.start <= 110 and event.end >= 150
        assert event.peak_value == 300
        assert event.peak_index == 100  # leftmost maximum

    def test_nearby_plumes_merge(self):
        bump = [0] * 3 + [200] * 10 + [0] * 3
        values = [0] * 50 + bump + [0] * 5 + bump + [0] * 50
        events = detect_events(series_of(values), self.PARAMS)
        assert len(events) == 1

    def test_events_disjoint_and_sorted(self, rng):
        values = [int(v) for v in rng.integers(0, 400, 500)]
        events = detect_events(series_of(values), EventParams(50, 20, 10))
        for a, b in zip(events, events[1:]):
            assert a.end <= b.start

    def test_gap_monotonicity(self, rng):
        values = [int(v) for v in rng.integers(0, 400, 500)]
        counts = [
            len(detect_events(series_of(values), EventParams(50, 20, gap)))
            for gap in (1, 5, 20, 60)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_warmup_never_inside_event(self):
        values = [None] * 60 + [300] * 30 + [0] * 60
        series = ResponseSeries(values=[(i, v) for i, v in enumerate(values)])
        events = detect_events(series, self.PARAMS)
        assert events and events[0].start >= 60

    def test_deterministic(self, rng):
        values = [int(v) for v in rng.integers(0, 300, 400)]
        a = detect_events(series_of(values), self.PARAMS)
        b = detect_events(series_of(values), self.PARAMS)
        assert a == b


class TestTypes:
    def test_response_series_validates_order(self):
        with pytest.raises(ValueError):
            ResponseSeries(values=[(3, 0), (2, 0)])

    def test_event_segment_validates_interval(self):
        with pytest.raises(ValueError):
            EventSegment(start=5, end=5, peak_index=5, peak_value=0)
        with pytest.raises(ValueError):
            EventSegment(start=5, end=8, peak_index=9, peak_value=0)
