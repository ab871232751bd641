"""Change detection: high-frequency (band-pass) and intensity change masks.

The high-frequency path band-passes the frame and background, normalizes
their absolute difference, and turns speckled change into solid blobs with
a local-entropy filter. The intensity path compares the contrast-enhanced
frame against both the enhanced background and the enhanced frame two steps
back; ANDing the two suppresses slow-moving steam. Masks are boolean arrays;
all filters use symmetric-reflection boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from smokescan import kernels

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DogParams:
    """Difference-of-Gaussians band: two std-devs (pixels) and kernel radius."""

    sigma1: float = 1.0
    sigma2: float = 2.0
    kernel_radius: int = 6

    def __post_init__(self):
        if not 0 < self.sigma1 < self.sigma2:
            raise ValueError("need 0 < sigma1 < sigma2")
        if self.kernel_radius < math.ceil(3 * self.sigma2):
            raise ValueError("kernel_radius must be >= ceil(3 * sigma2)")


@dataclass(frozen=True)
class ChangeThresholds:
    """Binarization thresholds for the four change maps, all in [0, 1]."""

    hf_residual: float = 0.3  # on normalized band-pass difference
    entropy: float = 0.6  # on local entropy of the binarized residual
    bg_intensity: float = 0.3  # on enhanced frame vs enhanced background
    frame_intensity: float = 0.3  # on enhanced frame vs enhanced frame t-2

    def __post_init__(self):
        for name in ("hf_residual", "entropy", "bg_intensity", "frame_intensity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class SmoothParams:
    """Mask cleanup: closing, binary median filter, small-component removal."""

    closing_radius: int = 1
    median_radius: int = 2
    min_area: int = 64


@dataclass(frozen=True)
class ClaheParams:
    """Tile grid, clip fraction of tile pixels, and histogram bin count."""

    tiles: tuple[int, int] = (8, 8)  # (rows, cols)
    clip_fraction: float = 0.01
    nbins: int = 256


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Discrete 2-d Gaussian on [-radius, radius]^2, normalized to sum 1."""
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    g = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    return g / g.sum()


def dog_kernel(params: DogParams) -> np.ndarray:
    return gaussian_kernel(params.sigma1, params.kernel_radius) - gaussian_kernel(
        params.sigma2, params.kernel_radius
    )


def dog_filter(image: np.ndarray, params: DogParams) -> np.ndarray:
    """Band-pass each channel with the difference-of-Gaussians kernel."""
    img = np.asarray(image, dtype=np.float64)
    kernel = dog_kernel(params)[None, :, :]
    if img.ndim == 2:
        return kernels.conv2d_bank(img, kernel)[0]
    out = np.empty_like(img)
    for ch in range(img.shape[2]):
        out[:, :, ch] = kernels.conv2d_bank(img[:, :, ch], kernel)[0]
    return out


def bg_sub(current: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Normalized absolute difference |I-B| / max(I+B, 0.1).

    The denominator clamp keeps the quotient bounded; for nonnegative inputs
    the output lies in [0, 1] and is symmetric in its arguments.
    """
    a = np.asarray(current, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.abs(a - b) / np.maximum(a + b, 0.1)


def _entropy_lut(window_count: int) -> np.ndarray:
    # computed for counts <= n/2 and mirrored, so a global bit-flip of the
    # input (count -> n - count) maps to the bit-identical entropy
    lut = np.zeros(window_count + 1, dtype=np.float64)
    for count in range(1, window_count // 2 + 1):
        p = count / window_count
        q = (window_count - count) / window_count
        lut[count] = -p * np.log2(p) - q * np.log2(q)
        lut[window_count - count] = lut[count]
    return lut


def entropy_filter(mask: np.ndarray, radius: int = 4) -> np.ndarray:
    """Shannon entropy (base 2) of the 0/1 histogram in each local window.

    Default radius 4 gives the 9x9 neighborhood; output is in [0, 1].
    """
    m = _as_binary(mask)
    counts = kernels.box_count(m.astype(np.uint8), radius)
    lut = _entropy_lut((2 * radius + 1) ** 2)
    return lut[counts]


def _as_binary(mask: np.ndarray) -> np.ndarray:
    m = np.asarray(mask)
    if m.dtype != np.bool_:
        vals = np.unique(m)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("mask must be strictly binary")
        m = m.astype(bool)
    return m


def binary_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return _as_binary(mask).copy()
    return kernels.box_count(_as_binary(mask).astype(np.uint8), radius) > 0


def binary_erode(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return _as_binary(mask).copy()
    full = (2 * radius + 1) ** 2
    return kernels.box_count(_as_binary(mask).astype(np.uint8), radius) == full


def binary_close(mask: np.ndarray, radius: int) -> np.ndarray:
    return binary_erode(binary_dilate(mask, radius), radius)


def binary_median(mask: np.ndarray, radius: int) -> np.ndarray:
    """Majority vote over the (2r+1)^2 window (window size is odd, no ties)."""
    if radius == 0:
        return _as_binary(mask).copy()
    counts = kernels.box_count(_as_binary(mask).astype(np.uint8), radius)
    return 2 * counts > (2 * radius + 1) ** 2


def remove_small_components(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Drop 8-connected components with fewer than ``min_area`` pixels."""
    m = _as_binary(mask)
    if min_area <= 1 or not m.any():
        return m.copy()
    labels, n = ndimage.label(m, structure=EIGHT_CONNECTED)
    if n == 0:
        return m.copy()
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]


def smooth_mask(mask: np.ndarray, params: SmoothParams) -> np.ndarray:
    """Closing, then binary median filter, then small-component removal."""
    m = binary_close(mask, params.closing_radius)
    m = binary_median(m, params.median_radius)
    return remove_small_components(m, params.min_area)


def clahe(image: np.ndarray, params: ClaheParams) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization, per channel."""
    img = np.asarray(image, dtype=np.float64)
    ty, tx = params.tiles
    if img.ndim == 2:
        return kernels.clahe_channel(img, ty, tx, params.clip_fraction, params.nbins)
    out = np.empty_like(img)
    for ch in range(img.shape[2]):
        out[:, :, ch] = kernels.clahe_channel(
            img[:, :, ch], ty, tx, params.clip_fraction, params.nbins
        )
    return out


def _threshold_channels(values: np.ndarray, threshold: float) -> np.ndarray:
    """OR across channels: a pixel changed if any channel crossed."""
    binary = values > threshold
    if binary.ndim == 3:
        binary = binary.any(axis=2)
    return binary


def detect_hf_change(
    frame: np.ndarray,
    background: np.ndarray,
    dog: DogParams,
    thresholds: ChangeThresholds,
    smooth: SmoothParams,
    stages: dict | None = None,
) -> tuple[np.ndarray, bool]:
    """High-frequency change mask and the all-zero early-stop flag.

    Band-pass both images, normalize the absolute difference per channel
    (band-pass outputs are signed, so magnitudes go in), binarize, grow
    speckle into regions via local entropy, binarize again and clean up.
    """
    frame_hp = np.abs(dog_filter(frame, dog))
    background_hp = np.abs(dog_filter(background, dog))
    residual = bg_sub(frame_hp, background_hp)
    binary = _threshold_channels(residual, thresholds.hf_residual)
    entropy = entropy_filter(binary)
    mask = smooth_mask(entropy > thresholds.entropy, smooth)
    if stages is not None:
        stages.update(
            hf_residual=residual, hf_binary=binary, hf_entropy=entropy, m_dog=mask
        )
    return mask, not mask.any()


def detect_intensity_change(
    frame: np.ndarray,
    frame_prev2: np.ndarray,
    background: np.ndarray,
    clahe_params: ClaheParams,
    thresholds: ChangeThresholds,
    smooth: SmoothParams,
    stages: dict | None = None,
) -> np.ndarray:
    """Intensity change mask: (enhanced vs background) AND (enhanced vs t-2).

    The second term is frame differencing: anything present identically two
    frames back (stalled steam) produces an empty mask and is suppressed.
    """
    enhanced = clahe(frame, clahe_params)
    enhanced_prev = clahe(frame_prev2, clahe_params)
    enhanced_bg = clahe(background, clahe_params)
    vs_background = bg_sub(enhanced, enhanced_bg)
    vs_prev = bg_sub(enhanced, enhanced_prev)
    mask_bg = smooth_mask(
        _threshold_channels(vs_background, thresholds.bg_intensity), smooth
    )
    mask_prev = smooth_mask(
        _threshold_channels(vs_prev, thresholds.frame_intensity), smooth
    )
    mask = mask_bg & mask_prev
    if stages is not None:
        stages.update(
            enhanced=enhanced, m_heq1=mask_bg, m_heq2=mask_prev, m_heq=mask
        )
    return mask


def combine_change(mask_hf: np.ndarray, mask_intensity: np.ndarray) -> tuple[np.ndarray, bool]:
    """Pixel-wise AND of the two change masks plus the early-stop flag."""
    a = _as_binary(mask_hf)
    b = _as_binary(mask_intensity)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    combined = a & b
    return combined, not combined.any()
