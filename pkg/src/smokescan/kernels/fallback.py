"""Pure numpy/scipy implementations of the per-pixel kernels.

These mirror the compiled extension in ``_core.pyx`` and are selected at
import time when the extension is unavailable (or when SMOKESCAN_PURE is
set). Boundary handling is symmetric reflection everywhere, i.e.
``np.pad(..., mode="symmetric")`` / ``scipy.ndimage`` mode ``"reflect"``.
"""

import numpy as np
from scipy import ndimage


def median_stack(stack):
    """Per-element median over axis 0 of a (N, ...) float64 stack.

    Even N yields the mean of the two central order statistics.
    """
    return np.median(np.asarray(stack, dtype=np.float64), axis=0)


def box_count(mask, radius):
    """Count of ones in the (2*radius+1)^2 window around each pixel.

    The mask is binary (0/1); edges are symmetric-reflection padded.
    Returns int64 counts with the same shape as the input.
    """
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError("box_count expects a 2-d mask")
    w = 2 * int(radius) + 1
    padded = np.pad(m.astype(np.int64), radius, mode="symmetric")
    ii = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(padded, axis=0, out=ii[1:, 1:])
    np.cumsum(ii[1:, 1:], axis=1, out=ii[1:, 1:])
    h, wd = m.shape
    return (
        ii[w : w + h, w : w + wd]
        - ii[0:h, w : w + wd]
        - ii[w : w + h, 0:wd]
        + ii[0:h, 0:wd]
    )


def conv2d_bank(image, kernels):
    """Convolve one 2-d image with a bank of odd-sized 2-d kernels.

    True convolution (kernel flipped), symmetric-reflection boundary.
    Returns an array of shape (n_kernels, H, W).
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    bank = np.asarray(kernels, dtype=np.float64)
    if bank.ndim != 3 or bank.shape[1] % 2 == 0 or bank.shape[2] % 2 == 0:
        raise ValueError("kernel bank must be (K, odd, odd)")
    if bank.shape[1] > img.shape[0] or bank.shape[2] > img.shape[1]:
        raise ValueError("kernel larger than image")
    out = np.empty((bank.shape[0],) + img.shape, dtype=np.float64)
    for i in range(bank.shape[0]):
        ndimage.convolve(img, bank[i], output=out[i], mode="reflect")
    return out


def clahe_channel(channel, tiles_y, tiles_x, clip_fraction, nbins):
    """Contrast-limited adaptive histogram equalization of one channel.

    ``channel`` holds values in [0, 1]. Per-tile histograms are clipped at
    ``clip_fraction * pixels_per_tile`` with the excess redistributed
    uniformly over all bins; tile mappings are the clipped CDFs, blended
    per pixel by bilinear interpolation between the four nearest tile
    centers. Output stays in [0, 1].
    """
    img = np.asarray(channel, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("clahe_channel expects a 2-d channel")
    h, w = img.shape
    pad_y = (-h) % tiles_y
    pad_x = (-w) % tiles_x
    if pad_y or pad_x:
        img = np.pad(img, ((0, pad_y), (0, pad_x)), mode="symmetric")
    ph, pw = img.shape
    th, tw = ph // tiles_y, pw // tiles_x

    bins = np.minimum((img * nbins).astype(np.int64), nbins - 1)
    clip = clip_fraction * (th * tw)

    mappings = np.empty((tiles_y, tiles_x, nbins), dtype=np.float64)
    for r in range(tiles_y):
        for c in range(tiles_x):
            tile = bins[r * th : (r + 1) * th, c * tw : (c + 1) * tw]
            hist = np.bincount(tile.ravel(), minlength=nbins).astype(np.float64)
            excess = np.sum(np.maximum(hist - clip, 0.0))
            np.minimum(hist, clip, out=hist)
            hist += excess / nbins
            mappings[r, c] = np.cumsum(hist) / (th * tw)

    ys = np.arange(ph, dtype=np.float64)
    xs = np.arange(pw, dtype=np.float64)
    rf = np.clip((ys + 0.5) / th - 0.5, 0.0, tiles_y - 1.0)
    cf = np.clip((xs + 0.5) / tw - 0.5, 0.0, tiles_x - 1.0)
    r0 = np.floor(rf).astype(np.intp)
    c0 = np.floor(cf).astype(np.intp)
    r1 = np.minimum(r0 + 1, tiles_y - 1)
    c1 = np.minimum(c0 + 1, tiles_x - 1)
    wy = (rf - r0)[:, None]
    wx = (cf - c0)[None, :]

    b = bins
    r0g = r0[:, None]
    r1g = r1[:, None]
    c0g = c0[None, :]
    c1g = c1[None, :]
    out = (
        (1.0 - wy) * (1.0 - wx) * mappings[r0g, c0g, b]
        + (1.0 - wy) * wx * mappings[r0g, c1g, b]
        + wy * (1.0 - wx) * mappings[r1g, c0g, b]
        + wy * wx * mappings[r1g, c1g, b]
    )
    return out[:h, :w]
