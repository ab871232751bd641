"""Region filtering: prune texture regions down to smoke candidates.

Candidate regions (connected components of the smoothed texture labels) are
filtered in order by shape, black/white regrouping, color, size, change
energy, and shadow statistics. The surviving pixels form the frame's smoke
mask; the response is its pixel count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from smokescan.change import EIGHT_CONNECTED, bg_sub


@dataclass(frozen=True)
class RegionThresholds:
    """All region-filter settings.

    ``change_min`` is interpreted as a fraction of the region area by
    default (scale-invariant across ROI sizes); set ``change_min_mode`` to
    "absolute" for a raw pixel count. ``area_max_frac`` scales with the
    frame; shadow settings control the density-peak test on the background
    subtraction values.
    """

    gray_diff: tuple[float, float, float] = (0.15, 0.15, 0.15)
    white_min: tuple[float, float, float] = (0.85, 0.85, 0.85)
    change_min: float = 0.3
    change_min_mode: str = "fraction"  # or "absolute"
    shadow_peak_pos: float = 0.3
    shadow_peak_height: float = 1.0
    shadow_peak_count: int = 2
    aspect_max: float = 8.0
    fill_min: float = 0.15
    area_min: int = 64
    area_max_frac: float = 0.25
    kde_bandwidth: float = 0.05
    kde_grid: int = 256
    merge_distance: int = 8
    white_cutoff: float = 0.7
    black_cutoff: float = 0.3

    def __post_init__(self):
        if self.change_min_mode not in ("fraction", "absolute"):
            raise ValueError("change_min_mode must be 'fraction' or 'absolute'")
        if self.area_min <= 0 or self.area_max_frac <= 0:
            raise ValueError("area bounds must be positive")


@dataclass(frozen=True)
class Region:
    """A connected pixel set with bbox, area, and optional color medians."""

    ys: np.ndarray
    xs: np.ndarray
    bbox: tuple[int, int, int, int]  # (x, y, width, height)
    area: int
    color_medians: Optional[tuple[float, float, float]] = None

    @staticmethod
    def from_coords(ys: np.ndarray, xs: np.ndarray) -> "Region":
        if ys.size == 0:
            raise ValueError("region must contain at least one pixel")
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        return Region(
            ys=ys,
            xs=xs,
            bbox=(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
            area=int(ys.size),
        )

    def with_medians(self, image: np.ndarray) -> "Region":
        vals = image[self.ys, self.xs]
        med = tuple(float(np.median(vals[:, ch])) for ch in range(3))
        return replace(self, color_medians=med)


@dataclass(frozen=True)
class DensityEstimate:
    """Gaussian-kernel density evaluated on a uniform grid over [0, 1]."""

    grid: np.ndarray
    density: np.ndarray


def extract_regions(labels: np.ndarray, mask_area: np.ndarray | None = None) -> list[Region]:
    """8-connected components of each label value, in label order.

    ``mask_area`` is accepted for interface symmetry; components are always
    extracted from the full frame (regions without change energy are removed
    by the change filter downstream).
    """
    labels = np.asarray(labels)
    regions: list[Region] = []
    for value in np.unique(labels):
        comps, n = ndimage.label(labels == value, structure=EIGHT_CONNECTED)
        for comp_id in range(1, n + 1):
            ys, xs = np.nonzero(comps == comp_id)
            regions.append(Region.from_coords(ys, xs))
    return regions


def filter_shape(
    regions: Sequence[Region], aspect_max: float, fill_min: float
) -> list[Region]:
    """Drop thin/narrow regions and sparse bounding-box fills."""
    kept = []
    for region in regions:
        _, _, w, h = region.bbox
        aspect = max(w / h, h / w)
        fill = region.area / (w * h)
        if aspect <= aspect_max and fill >= fill_min:
            kept.append(region)
    return kept


def contrast_stretch(image: np.ndarray, saturate: float = 0.01) -> np.ndarray:
    """Stretch each channel so ``saturate`` of the data clips at 0 and 1.

    A constant channel (degenerate percentiles) maps to 0.5.
    """
    if not 0.0 <= saturate < 0.5:
        raise ValueError("saturate must be in [0, 0.5)")
    img = np.asarray(image, dtype=np.float64)
    single = img.ndim == 2
    if single:
        img = img[:, :, None]
    out = np.empty_like(img)
    for ch in range(img.shape[2]):
        channel = img[:, :, ch]
        lo = np.quantile(channel, saturate)
        hi = np.quantile(channel, 1.0 - saturate)
        if hi <= lo:
            out[:, :, ch] = 0.5
        else:
            out[:, :, ch] = np.clip((channel - lo) / (hi - lo), 0.0, 1.0)
    return out[:, :, 0] if single else out


def _bbox_gap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> int:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    gap_x = max(bx - (ax + aw), ax - (bx + bw), 0)
    gap_y = max(by - (ay + ah), ay - (by + bh), 0)
    return max(gap_x, gap_y)


def merge_bw_regions(
    regions: Sequence[Region],
    adjusted: np.ndarray,
    distance: int,
    white_cutoff: float = 0.7,
    black_cutoff: float = 0.3,
) -> list[Region]:
    """Union nearby same-class white regions and black regions.

    Classes come from the stretched-image color medians (white: every
    channel >= cutoff; black: every channel <= cutoff). Merging is the
    transitive closure of bbox distance <= ``distance``; merged regions get
    recomputed bboxes and medians. Other regions pass through untouched.
    """
    withmed = [
        r if r.color_medians is not None else r.with_medians(adjusted)
        for r in regions
    ]

    def classify(region: Region) -> Optional[str]:
        c = region.color_medians
        if all(v >= white_cutoff for v in c):
            return "white"
        if all(v <= black_cutoff for v in c):
            return "black"
        return None

    classes = [classify(r) for r in withmed]
    parent = list(range(len(withmed)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(withmed)):
        if classes[i] is None:
            continue
        for j in range(i + 1, len(withmed)):
            if classes[j] != classes[i]:
                continue
            if _bbox_gap(withmed[i].bbox, withmed[j].bbox) <= distance:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for i in range(len(withmed)):
        groups.setdefault(find(i), []).append(i)

    merged = []
    for root in sorted(groups):
        members = groups[root]
        if len(members) == 1:
            merged.append(withmed[members[0]])
            continue
        ys = np.concatenate([withmed[i].ys for i in members])
        xs = np.concatenate([withmed[i].xs for i in members])
        merged.append(Region.from_coords(ys, xs).with_medians(adjusted))
    return merged


def filter_color(
    regions: Sequence[Region],
    adjusted: np.ndarray,
    gray_diff: tuple[float, float, float],
    white_min: tuple[float, float, float],
) -> list[Region]:
    """Keep grayish/bluish regions; drop colorful ones and white (steam) ones.

    A region is dropped when any channel-median pair differs by at least its
    threshold, or when every channel median reaches the white minimum.
    """
    kept = []
    for region in regions:
        r = region if region.color_medians is not None else region.with_medians(adjusted)
        c1, c2, c3 = r.color_medians
        t1, t2, t3 = gray_diff
        colorful = abs(c1 - c2) >= t1 or abs(c2 - c3) >= t2 or abs(c1 - c3) >= t3
        w1, w2, w3 = white_min
        white = c1 >= w1 and c2 >= w2 and c3 >= w3
        if not colorful and not white:
            kept.append(r)
    return kept


def filter_size(regions: Sequence[Region], area_min: int, area_max: int) -> list[Region]:
    """Keep regions with area_min <= area <= area_max (inclusive bounds)."""
    return [r for r in regions if area_min <= r.area <= area_max]


def filter_change(
    regions: Sequence[Region], change_mask: np.ndarray, min_change: float
) -> list[Region]:
    """Drop regions whose change-mask pixel sum is <= ``min_change``."""
    mask = np.asarray(change_mask)
    kept = []
    for region in regions:
        if float(mask[region.ys, region.xs].sum()) > min_change:
            kept.append(region)
    return kept


def kde_pdf(samples: Sequence[float], bandwidth: float, grid_points: int = 256) -> DensityEstimate:
    """Gaussian kernel density estimate on a uniform grid over [0, 1]."""
    data = np.asarray(samples, dtype=np.float64)
    if data.size == 0:
        raise ValueError("kde_pdf requires at least one sample")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    grid = np.linspace(0.0, 1.0, grid_points)
    z = (grid[:, None] - data[None, :]) / bandwidth
    kernel = np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi)
    density = kernel.sum(axis=1) / (data.size * bandwidth)
    return DensityEstimate(grid=grid, density=density)


def density_peaks(density: np.ndarray) -> list[int]:
    """Indices of strict local maxima; plateaus report their leftmost point.

    Endpoints are not peaks (both flanks are required).
    """
    d = np.asarray(density, dtype=np.float64)
    peaks = []
    n = d.size
    i = 1
    while i < n - 1:
        if d[i] > d[i - 1]:
            j = i
            while j + 1 < n and d[j + 1] == d[i]:
                j += 1
            if j + 1 < n and d[j + 1] < d[i]:
                peaks.append(i)
            i = j + 1
        else:
            i += 1
    return peaks


def filter_shadow(
    regions: Sequence[Region],
    residual: np.ndarray,
    bandwidth: float,
    peak_pos: float,
    peak_height: float,
    peak_count: int,
    grid_points: int = 256,
    dumps: list | None = None,
) -> list[Region]:
    """Drop shadow-like regions via the density of their residual values.

    ``residual`` is the scalar (channel-mean) background subtraction image.
    A region is shadow when the location of its density maximum exceeds
    ``peak_pos`` while fewer than ``peak_count`` peaks rise above
    ``peak_height`` (one tight, dominant mode: uniform dimming).
    """
    res = np.asarray(residual, dtype=np.float64)
    kept = []
    for region in regions:
        estimate = kde_pdf(res[region.ys, region.xs], bandwidth, grid_points)
        if dumps is not None:
            dumps.append((region, estimate))
        argmax_pos = float(estimate.grid[int(np.argmax(estimate.density))])
        peaks = density_peaks(estimate.density)
        high_peaks = sum(1 for p in peaks if estimate.density[p] > peak_height)
        if argmax_pos > peak_pos and high_peaks < peak_count:
            continue
        kept.append(region)
    return kept


def finalize(regions: Sequence[Region], shape: tuple[int, int]) -> tuple[np.ndarray, int]:
    """Binary mask of the surviving regions and its pixel-count response."""
    mask = np.zeros(shape, dtype=bool)
    for region in regions:
        mask[region.ys, region.xs] = True
    return mask, int(mask.sum())


def scalar_residual(frame: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Channel-mean background subtraction used by the shadow filter."""
    return bg_sub(frame, background).mean(axis=2)


def apply_region_filters(
    regions: Sequence[Region],
    frame: np.ndarray,
    change_mask: np.ndarray,
    residual: np.ndarray,
    thresholds: RegionThresholds,
    stages: dict | None = None,
) -> list[Region]:
    """Run the full filter sequence: shape, merge, color, size, change, shadow."""
    adjusted = contrast_stretch(frame)
    h, w = change_mask.shape
    survivors = filter_shape(regions, thresholds.aspect_max, thresholds.fill_min)
    survivors = merge_bw_regions(
        survivors,
        adjusted,
        thresholds.merge_distance,
        thresholds.white_cutoff,
        thresholds.black_cutoff,
    )
    survivors = filter_color(
        survivors, adjusted, thresholds.gray_diff, thresholds.white_min
    )
    area_max = int(thresholds.area_max_frac * h * w)
    survivors = filter_size(survivors, thresholds.area_min, area_max)
    change_floor = thresholds.change_min
    kept = []
    for region in survivors:
        floor = (
            change_floor * region.area
            if thresholds.change_min_mode == "fraction"
            else change_floor
        )
        kept.extend(filter_change([region], change_mask, floor))
    survivors = kept
    kde_dumps: list | None = [] if stages is not None else None
    survivors = filter_shadow(
        survivors,
        residual,
        thresholds.kde_bandwidth,
        thresholds.shadow_peak_pos,
        thresholds.shadow_peak_height,
        thresholds.shadow_peak_count,
        thresholds.kde_grid,
        dumps=kde_dumps,
    )
    if stages is not None:
        stages.update(adjusted=adjusted, residual=residual, kde=kde_dumps)
    return survivors
