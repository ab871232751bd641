"""Event detection: turn the per-frame response series into timed segments.

Peaks are local maxima with a minimum height and topographic prominence;
each peak gets a width interval evaluated at half its prominence. Nearby
intervals merge into events. Warm-up frames (absent responses) count as
zero for peak finding, but events never start inside the warm-up span.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class EventParams:
    min_height: float = 100.0
    min_prominence: float = 50.0
    merge_gap: int = 60  # frames; 5 min at 5 s/frame


@dataclass
class ResponseSeries:
    """Per-frame smoke-pixel counts for one day; None marks warm-up frames."""

    values: list[tuple[int, Optional[int]]]
    day_id: str = ""

    def __post_init__(self):
        indices = [i for i, _ in self.values]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame indices must be strictly increasing")
        if any(v is not None and v < 0 for _, v in self.values):
            raise ValueError("responses must be nonnegative")

    def first_present_index(self) -> Optional[int]:
        for index, value in self.values:
            if value is not None:
                return index
        return None


@dataclass(frozen=True)
class EventSegment:
    """Half-open frame interval [start, end) with its peak annotation."""

    start: int
    end: int
    peak_index: int
    peak_value: int

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError("event must have start < end")
        if not self.start <= self.peak_index < self.end:
            raise ValueError("peak must lie inside the event")


def _prominence(values: Sequence[float], peak: int) -> float:
    """Topographic prominence: height above the higher of the two key saddles."""
    height = values[peak]
    left_min = height
    for i in range(peak - 1, -1, -1):
        if values[i] > height:
            break
        left_min = min(left_min, values[i])
    right_min = height
    for i in range(peak + 1, len(values)):
        if values[i] > height:
            break
        right_min = min(right_min, values[i])
    return height - max(left_min, right_min)


def find_peaks(
    series: ResponseSeries, min_height: float, min_prominence: float
) -> list[tuple[int, tuple[int, int]]]:
    """Peaks and their half-open width intervals, in frame-index space.

    A peak is a local maximum (plateaus report their leftmost frame) with
    value >= min_height and prominence >= min_prominence. Its width interval
    covers the contiguous run around the peak where the series stays at or
    above ``peak_value - prominence / 2``.
    """
    indices = [i for i, _ in series.values]
    values = [0 if v is None else v for _, v in series.values]
    n = len(values)
    results = []
    i = 1
    while i < n - 1:
        if values[i] > values[i - 1]:
            j = i
            while j + 1 < n and values[j + 1] == values[i]:
                j += 1
            if j + 1 < n and values[j + 1] < values[i]:
                if values[i] >= min_height:
                    prom = _prominence(values, i)
                    if prom >= min_prominence:
                        eval_height = values[i] - prom / 2.0
                        left = i
                        while left > 0 and values[left - 1] >= eval_height:
                            left -= 1
                        right = j
                        while right + 1 < n and values[right + 1] >= eval_height:
                            right += 1
                        results.append((indices[i], (indices[left], indices[right] + 1)))
            i = j + 1
        else:
            i += 1
    return results


def merge_segments(intervals: Sequence[tuple[int, int]], gap: int) -> list[tuple[int, int]]:
    """Union intervals that overlap or are separated by fewer than ``gap`` frames.

    Input must be sorted by start; the output is sorted and pairwise
    separated by at least ``gap``.
    """
    merged: list[list[int]] = []
    for start, end in intervals:
        if merged and start - merged[-1][1] < gap:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged]


def detect_events(series: ResponseSeries, params: EventParams) -> list[EventSegment]:
    """Find peaks, merge their width intervals, and annotate each event."""
    peaks = find_peaks(series, params.min_height, params.min_prominence)
    intervals = sorted(w for _, w in peaks)
    merged = merge_segments(intervals, params.merge_gap)

    first_present = series.first_present_index()
    by_index = {i: (0 if v is None else v) for i, v in series.values}
    events = []
    for start, end in merged:
        if first_present is not None:
            start = max(start, first_present)
        if start >= end:
            continue
        peak_index = start
        peak_value = -1
        for frame in range(start, end):
            value = by_index.get(frame, 0)
            if value > peak_value:
                peak_value = value
                peak_index = frame
        events.append(
            EventSegment(start=start, end=end, peak_index=peak_index, peak_value=peak_value)
        )
    return events
