"""Texture segmentation: filter-energy features, PCA, and texton clustering.

Each pixel of the contrast-enhanced frame gets a feature vector of 5x5
texture-filter responses (25 masks x 3 channels = 75 dims), reduced by PCA
to the leading components holding 98% of the variance, then clustered with
seeded k-means++ plus distance-bound-accelerated Lloyd iterations. The
label map is smoothed into texture-coherent regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from smokescan import kernels
from smokescan.change import EIGHT_CONNECTED, binary_close

TEXTURE_VECTORS = {
    "level": np.array([1.0, 2.0, 3.0, 2.0, 1.0]),
    "edge": np.array([-1.0, -2.0, 0.0, 2.0, 1.0]),
    "spot": np.array([-1.0, 0.0, 2.0, 0.0, -1.0]),
    "wave": np.array([-1.0, 2.0, 0.0, -2.0, 1.0]),
    "ripple": np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}
GENERATOR_ORDER = ("level", "edge", "spot", "wave", "ripple")


@dataclass(frozen=True)
class TextureParams:
    """Texton count, PCA energy target, and label-map smoothing settings."""

    clusters: int = 6
    pca_energy: float = 0.98
    max_iter: int = 100
    pca_fit_rows: int = 50_000  # subsample cap for the covariance fit
    min_area: int = 64
    median_radius: int = 2
    closing_radius: int = 1


@dataclass
class FeatureMatrix:
    """Per-pixel feature rows plus the column-centering flag."""

    data: np.ndarray  # (rows, dims) float64
    centered: bool = False
    shape: tuple[int, int] | None = None  # (H, W) of the source frame

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]

    def center(self) -> "FeatureMatrix":
        if self.centered:
            return self
        centered = self.data - self.data.mean(axis=0, keepdims=True)
        return FeatureMatrix(data=centered, centered=True, shape=self.shape)


def build_filter_bank() -> np.ndarray:
    """The 25 5x5 masks: outer products of the texture vectors.

    Row-major generator order, so mask[i*5+j] = outer(vector_i, vector_j).
    """
    vectors = [TEXTURE_VECTORS[name] for name in GENERATOR_ORDER]
    masks = [np.outer(a, b) for a in vectors for b in vectors]
    return np.stack(masks, axis=0)


def compute_features(enhanced: np.ndarray, bank: np.ndarray | None = None) -> FeatureMatrix:
    """Filter-response features of the contrast-enhanced frame.

    Subtracts each channel's global mean, convolves with every mask
    (symmetric-reflection boundary), and stacks responses per pixel in
    channel-major order: row = [ch0 x mask0..24, ch1 x ..., ch2 x ...].
    """
    if bank is None:
        bank = build_filter_bank()
    img = np.asarray(enhanced, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w, n_ch = img.shape
    n_masks = bank.shape[0]
    features = np.empty((h * w, n_ch * n_masks), dtype=np.float64)
    for ch in range(n_ch):
        channel = img[:, :, ch]
        responses = kernels.conv2d_bank(channel - channel.mean(), bank)
        features[:, ch * n_masks : (ch + 1) * n_masks] = responses.reshape(
            n_masks, h * w
        ).T
    return FeatureMatrix(data=features, centered=False, shape=(h, w))


def pca_reduce(
    features: FeatureMatrix,
    energy: float = 0.98,
    rng: np.random.Generator | None = None,
    max_fit_rows: int | None = None,
) -> FeatureMatrix:
    """Project onto the fewest leading principal components holding ``energy``.

    The covariance may be fitted on a uniform row subsample (seeded) when the
    matrix exceeds ``max_fit_rows``; the projection is applied to every row.
    """
    if not 0.0 < energy <= 1.0:
        raise ValueError("energy must be in (0, 1]")
    mat = features.center()
    data = mat.data
    if data.shape[0] < 2:
        raise ValueError("need at least 2 rows for PCA")
    fit = data
    if max_fit_rows is not None and data.shape[0] > max_fit_rows:
        if rng is None:
            rng = np.random.default_rng(0)
        idx = rng.choice(data.shape[0], size=max_fit_rows, replace=False)
        fit = data[np.sort(idx)]
    cov = fit.T @ fit / (fit.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total <= 0.0:
        n_keep = 1
    else:
        fractions = np.cumsum(eigvals) / total
        n_keep = int(np.searchsorted(fractions, energy - 1e-12) + 1)
        n_keep = min(n_keep, data.shape[1])
    return FeatureMatrix(
        data=data @ eigvecs[:, :n_keep], centered=True, shape=mat.shape
    )


def kmeans_pp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Squared-distance-weighted seeding (k-means++)."""
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]), dtype=np.float64)
    centers[0] = data[rng.integers(n)]
    closest = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)  # all points coincide with a chosen center
        centers[j] = data[idx]
        np.minimum(closest, np.sum((data - centers[j]) ** 2, axis=1), out=closest)
    return centers


def _exact_assign(data: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full distance matrix; ties go to the lowest cluster index."""
    dists = np.sqrt(
        np.maximum(
            np.sum(data**2, axis=1)[:, None]
            - 2.0 * data @ centers.T
            + np.sum(centers**2, axis=1)[None, :],
            0.0,
        )
    )
    return np.argmin(dists, axis=1), dists


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    n_iter: int
    sse_history: list[float] = field(default_factory=list)


def lloyd_accelerated(
    data: np.ndarray, centers: np.ndarray, max_iter: int = 100
) -> KMeansResult:
    """Lloyd iterations with triangle-inequality distance bounds.

    Cached per-point distances become bounds after each center move
    (upper += move, lower -= move, loosened by a safety margin); only points
    whose bounds cannot prove their assignment recompute exact distances.
    Produces exactly the plain-Lloyd assignment sequence: ambiguous points
    always fall back to the exact rule (argmin, lowest index on ties), and
    the margins make skipped points provably stable even under rounding.
    Empty clusters keep their previous center.
    """
    data = np.asarray(data, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    n, k = data.shape[0], centers.shape[0]
    rows = np.arange(n)
    labels, dists = _exact_assign(data, centers)
    upper = dists[rows, labels]
    lower = dists
    sse_history = [float(np.sum(upper**2))]

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = data[members].mean(axis=0)
        moves = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1))
        centers = new_centers

        margin = 1e-9
        upper = (upper + moves[labels]) * (1.0 + margin) + 1e-30
        lower = (lower - moves[None, :]) * (1.0 - margin) - 1e-30

        nearest_other = lower.copy()
        nearest_other[rows, labels] = np.inf
        unstable = upper > nearest_other.min(axis=1)

        changed = False
        if unstable.any():
            exact_labels, exact_dists = _exact_assign(data[unstable], centers)
            changed = bool(np.any(exact_labels != labels[unstable]))
            labels[unstable] = exact_labels
            lower[unstable] = exact_dists
            upper[unstable] = exact_dists[
                np.arange(exact_dists.shape[0]), exact_labels
            ]

        sse_history.append(
            float(np.sum(np.sum((data - centers[labels]) ** 2, axis=1)))
        )
        if not changed:
            break
    return KMeansResult(
        labels=labels, centers=centers, n_iter=n_iter, sse_history=sse_history
    )


def cluster_textons(
    features: FeatureMatrix,
    k: int,
    seed: int,
    max_iter: int = 100,
) -> tuple[np.ndarray, KMeansResult]:
    """Cluster feature rows into k textons; labels reshaped to the frame.

    Deterministic for a given seed: seeded k-means++ initialization followed
    by accelerated Lloyd iterations.
    """
    data = np.asarray(features.data, dtype=np.float64)
    if k > data.shape[0]:
        raise ValueError(f"k={k} exceeds {data.shape[0]} rows")
    rng = np.random.default_rng(seed)
    centers = kmeans_pp_init(data, k, rng)
    result = lloyd_accelerated(data, centers, max_iter=max_iter)
    if features.shape is None:
        return result.labels, result
    return result.labels.reshape(features.shape).astype(np.int32), result


def _majority_border_label(labels: np.ndarray, component: np.ndarray) -> int:
    """Most frequent label among the component's 8-neighbors outside it."""
    border = binary_dilate_bool(component) & ~component
    if not border.any():
        return -1
    counts = np.bincount(labels[border])
    return int(np.argmax(counts))


def binary_dilate_bool(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=EIGHT_CONNECTED)


def _absorb_small_components(labels: np.ndarray, min_area: int) -> np.ndarray:
    """Reassign sub-min-area label components to their border majority label.

    Components are processed in (label, component) order on a working map,
    so the pass is deterministic.
    """
    out = labels.copy()
    if min_area <= 1:
        return out
    for value in np.unique(labels):
        comps, n = ndimage.label(out == value, structure=EIGHT_CONNECTED)
        if n == 0:
            continue
        sizes = np.bincount(comps.ravel())
        for comp_id in range(1, n + 1):
            if sizes[comp_id] >= min_area:
                continue
            component = comps == comp_id
            majority = _majority_border_label(out, component)
            if majority >= 0:
                out[component] = majority
    return out


def _label_median_vote(labels: np.ndarray, k: int, radius: int) -> np.ndarray:
    """Per-pixel most-frequent label in the window; ties to the lowest label."""
    if radius == 0:
        return labels.copy()
    counts = np.stack(
        [kernels.box_count((labels == j).astype(np.uint8), radius) for j in range(k)],
        axis=0,
    )
    return np.argmax(counts, axis=0).astype(labels.dtype)


def _closing_pass(labels: np.ndarray, k: int, radius: int) -> np.ndarray:
    """Morphological closing per label; overlaps go to the last writer."""
    if radius == 0:
        return labels.copy()
    out = labels.copy()
    for j in range(k):
        mask = labels == j
        if not mask.any():
            continue
        out[binary_close(mask, radius)] = j
    return out


def smooth_segmentation(
    labels: np.ndarray,
    k: int,
    min_area: int = 64,
    median_radius: int = 2,
    closing_radius: int = 1,
) -> np.ndarray:
    """Clean the texton label map into coherent regions.

    Stages: absorb small components into their border majority, label-domain
    median vote, per-label closing (last writer wins), then a final
    small-component sweep so no component below ``min_area`` survives.
    """
    out = _absorb_small_components(np.asarray(labels), min_area)
    out = _label_median_vote(out, k, median_radius)
    out = _closing_pass(out, k, closing_radius)
    return _absorb_small_components(out, min_area)
