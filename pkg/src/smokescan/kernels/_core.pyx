# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels (hot loops of the detection pipeline).

Semantics match ``smokescan.kernels.fallback`` exactly: symmetric-reflection
boundaries, same clip/CDF arithmetic for CLAHE, even-count medians as the
mean of the two central order statistics.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef inline void _swap(double* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double tmp = a[i]
    a[i] = a[j]
    a[j] = tmp


cdef double _quickselect(double* a, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    """k-th smallest (0-based); partially partitions a in place."""
    cdef Py_ssize_t lo = 0, hi = n - 1
    cdef Py_ssize_t mid, i, j
    cdef double pivot
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median-of-three pivot to dodge sorted-input worst cases
        if a[mid] < a[lo]:
            _swap(a, mid, lo)
        if a[hi] < a[lo]:
            _swap(a, hi, lo)
        if a[hi] < a[mid]:
            _swap(a, hi, mid)
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                _swap(a, i, j)
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            break
    return a[k]


def median_stack(stack):
    """Per-element median over axis 0 of a (N, ...) float64 stack."""
    a = np.ascontiguousarray(stack, dtype=np.float64)
    if a.ndim < 2:
        return np.median(a, axis=0)
    flat = a.reshape(a.shape[0], -1)
    out = _median_2d(flat)
    return out.reshape(a.shape[1:])


cdef cnp.ndarray _median_2d(double[:, ::1] flat):
    cdef Py_ssize_t n = flat.shape[0]
    cdef Py_ssize_t m = flat.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* buf = <double*> malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef Py_ssize_t half = n // 2
    cdef double upper, lower
    try:
        with nogil:
            for j in range(m):
                for i in range(n):
                    buf[i] = flat[i, j]
                upper = _quickselect(buf, n, half)
                if n % 2 == 1:
                    out[j] = upper
                else:
                    # after selection everything left of `half` is <= it
                    lower = buf[0]
                    for i in range(1, half):
                        if buf[i] > lower:
                            lower = buf[i]
                    out[j] = (lower + upper) / 2.0
    finally:
        free(buf)
    return out_arr


def box_count(mask, radius):
    """Count of ones in the (2*radius+1)^2 symmetric-padded window."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError("box_count expects a 2-d mask")
    cdef Py_ssize_t r = int(radius)
    padded = np.ascontiguousarray(np.pad(m.astype(np.int64), r, mode="symmetric"))
    return _box_count_core(padded, m.shape[0], m.shape[1], r)


cdef cnp.ndarray _box_count_core(long long[:, ::1] padded, Py_ssize_t h,
                                 Py_ssize_t w, Py_ssize_t r):
    cdef Py_ssize_t ph = padded.shape[0]
    cdef Py_ssize_t pw = padded.shape[1]
    cdef Py_ssize_t win = 2 * r + 1
    ii_arr = np.zeros((ph + 1, pw + 1), dtype=np.int64)
    cdef long long[:, ::1] ii = ii_arr
    out_arr = np.empty((h, w), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    with nogil:
        for y in range(ph):
            for x in range(pw):
                ii[y + 1, x + 1] = (padded[y, x] + ii[y, x + 1]
                                    + ii[y + 1, x] - ii[y, x])
        for y in range(h):
            for x in range(w):
                out[y, x] = (ii[y + win, x + win] - ii[y, x + win]
                             - ii[y + win, x] + ii[y, x])
    return out_arr


def conv2d_bank(image, kernels):
    """True convolution of a 2-d image with a (K, odd, odd) kernel bank."""
    img = np.ascontiguousarray(image, dtype=np.float64)
    bank = np.ascontiguousarray(kernels, dtype=np.float64)
    if bank.ndim != 3 or bank.shape[1] % 2 == 0 or bank.shape[2] % 2 == 0:
        raise ValueError("kernel bank must be (K, odd, odd)")
    if bank.shape[1] > img.shape[0] or bank.shape[2] > img.shape[1]:
        raise ValueError("kernel larger than image")
    ry = (bank.shape[1] - 1) // 2
    rx = (bank.shape[2] - 1) // 2
    padded = np.ascontiguousarray(np.pad(img, ((ry, ry), (rx, rx)), mode="symmetric"))
    return _conv_bank_core(padded, bank, img.shape[0], img.shape[1])


cdef cnp.ndarray _conv_bank_core(double[:, ::1] padded, double[:, :, ::1] bank,
                                 Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t nk = bank.shape[0]
    cdef Py_ssize_t kh = bank.shape[1]
    cdef Py_ssize_t kw = bank.shape[2]
    out_arr = np.empty((nk, h, w), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t k, y, x, i, j
    cdef double acc
    with nogil:
        for k in range(nk):
            for y in range(h):
                for x in range(w):
                    acc = 0.0
                    for i in range(kh):
                        for j in range(kw):
                            acc += bank[k, i, j] * padded[y + kh - 1 - i,
                                                          x + kw - 1 - j]
                    out[k, y, x] = acc
    return out_arr


def clahe_channel(channel, tiles_y, tiles_x, clip_fraction, nbins):
    """Contrast-limited adaptive histogram equalization of one channel."""
    img = np.asarray(channel, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("clahe_channel expects a 2-d channel")
    h, w = img.shape
    cdef Py_ssize_t ty = int(tiles_y)
    cdef Py_ssize_t tx = int(tiles_x)
    pad_y = (-h) % ty
    pad_x = (-w) % tx
    if pad_y or pad_x:
        img = np.pad(img, ((0, pad_y), (0, pad_x)), mode="symmetric")
    out = _clahe_core(np.ascontiguousarray(img), ty, tx,
                      float(clip_fraction), int(nbins))
    return out[:h, :w]


cdef cnp.ndarray _clahe_core(double[:, ::1] img, Py_ssize_t ty, Py_ssize_t tx,
                             double clip_fraction, Py_ssize_t nbins):
    cdef Py_ssize_t ph = img.shape[0]
    cdef Py_ssize_t pw = img.shape[1]
    cdef Py_ssize_t th = ph // ty
    cdef Py_ssize_t tw = pw // tx
    cdef double npix = <double> (th * tw)
    cdef double clip = clip_fraction * npix

    maps_arr = np.empty((ty, tx, nbins), dtype=np.float64)
    cdef double[:, :, ::1] maps = maps_arr
    hist_arr = np.empty(nbins, dtype=np.float64)
    cdef double[::1] hist = hist_arr
    bins_arr = np.empty((ph, pw), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] bins = bins_arr
    out_arr = np.empty((ph, pw), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    cdef Py_ssize_t r, c, y, x, b
    cdef double excess, acc, v
    cdef double rf, cf, wy, wx
    cdef Py_ssize_t r0, r1, c0, c1

    with nogil:
        for y in range(ph):
            for x in range(pw):
                b = <Py_ssize_t> (img[y, x] * nbins)
                if b > nbins - 1:
                    b = nbins - 1
                bins[y, x] = b

        for r in range(ty):
            for c in range(tx):
                for b in range(nbins):
                    hist[b] = 0.0
                for y in range(r * th, (r + 1) * th):
                    for x in range(c * tw, (c + 1) * tw):
                        hist[bins[y, x]] += 1.0
                excess = 0.0
                for b in range(nbins):
                    if hist[b] > clip:
                        excess += hist[b] - clip
                        hist[b] = clip
                acc = 0.0
                for b in range(nbins):
                    acc += hist[b] + excess / nbins
                    maps[r, c, b] = acc / npix

        for y in range(ph):
            rf = (y + 0.5) / th - 0.5
            if rf < 0.0:
                rf = 0.0
            if rf > ty - 1.0:
                rf = ty - 1.0
            r0 = <Py_ssize_t> rf
            r1 = r0 + 1
            if r1 > ty - 1:
                r1 = ty - 1
            wy = rf - r0
            for x in range(pw):
                cf = (x + 0.5) / tw - 0.5
                if cf < 0.0:
                    cf = 0.0
                if cf > tx - 1.0:
                    cf = tx - 1.0
                c0 = <Py_ssize_t> cf
                c1 = c0 + 1
                if c1 > tx - 1:
                    c1 = tx - 1
                wx = cf - c0
                b = bins[y, x]
                v = ((1.0 - wy) * (1.0 - wx) * maps[r0, c0, b]
                     + (1.0 - wy) * wx * maps[r0, c1, b]
                     + wy * (1.0 - wx) * maps[r1, c0, b]
                     + wy * wx * maps[r1, c1, b])
                out[y, x] = v
    return out_arr
