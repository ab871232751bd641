"""Independent brute-force oracles used to freeze expected values.

Everything here is written against the definitions only (nested loops,
explicit sorts, exhaustive scans) and stays independent of the library's
implementation paths.
"""

import math

import numpy as np


def pad_symmetric(image, ry, rx):
    return np.pad(image, ((ry, ry), (rx, rx)), mode="symmetric")


def conv2d_naive(image, kernel):
    """True 2-d convolution with symmetric padding, nested loops."""
    img = np.asarray(image, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    ry, rx = (kh - 1) // 2, (kw - 1) // 2
    padded = pad_symmetric(img, ry, rx)
    out = np.zeros_like(img)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    acc += k[i, j] * padded[y + kh - 1 - i, x + kw - 1 - j]
            out[y, x] = acc
    return out


def entropy_naive(mask, radius=4):
    """Per-pixel binary-histogram Shannon entropy (base 2), symmetric pad."""
    m = np.asarray(mask, dtype=np.int64)
    padded = pad_symmetric(m, radius, radius)
    win = 2 * radius + 1
    total = win * win
    out = np.zeros(m.shape, dtype=np.float64)
    for y in range(m.shape[0]):
        for x in range(m.shape[1]):
            ones = int(padded[y : y + win, x : x + win].sum())
            zeros = total - ones
            h = 0.0
            for count in (ones, zeros):
                if count > 0:
                    p = count / total
                    h -= p * math.log2(p)
            out[y, x] = h
    return out


def kde_naive(samples, bandwidth, grid_points):
    """Double-loop Gaussian KDE on a uniform [0, 1] grid."""
    data = list(samples)
    grid = np.linspace(0.0, 1.0, grid_points)
    out = np.zeros(grid_points, dtype=np.float64)
    for gi, x in enumerate(grid):
        acc = 0.0
        for s in data:
            z = (x - s) / bandwidth
            acc += math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        out[gi] = acc / (len(data) * bandwidth)
    return out


def median_naive(stack):
    """Per-pixel sort-based median; even counts average the central pair."""
    arr = np.asarray(stack, dtype=np.float64)
    n = arr.shape[0]
    flat = arr.reshape(n, -1)
    out = np.empty(flat.shape[1], dtype=np.float64)
    for col in range(flat.shape[1]):
        vals = sorted(flat[:, col])
        if n % 2 == 1:
            out[col] = vals[n // 2]
        else:
            out[col] = (vals[n // 2 - 1] + vals[n // 2]) / 2.0
    return out.reshape(arr.shape[1:])


def block_mean_naive(image, factor):
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    out_shape = (h // factor, w // factor) + img.shape[2:]
    out = np.zeros(out_shape, dtype=np.float64)
    for y in range(out_shape[0]):
        for x in range(out_shape[1]):
            block = img[y * factor : (y + 1) * factor, x * factor : (x + 1) * factor]
            out[y, x] = block.mean(axis=(0, 1))
    return out


def lloyd_naive(data, centers, max_iter=100):
    """Plain Lloyd iterations from the given initialization.

    Full distance matrix each step; ties break to the lowest cluster index;
    empty clusters keep their previous center; stops when the assignment no
    longer changes. Returns (labels, centers, sse_history).
    """
    data = np.asarray(data, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    k = centers.shape[0]

    def assign(cs):
        d = np.sqrt(
            np.maximum(
                np.sum(data**2, axis=1)[:, None]
                - 2.0 * data @ cs.T
                + np.sum(cs**2, axis=1)[None, :],
                0.0,
            )
        )
        return np.argmin(d, axis=1)

    labels = assign(centers)
    sse_history = [float(np.sum(np.sum((data - centers[labels]) ** 2, axis=1)))]
    for _ in range(max_iter):
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = data[members].mean(axis=0)
        centers = new_centers
        new_labels = assign(centers)
        sse_history.append(
            float(np.sum(np.sum((data - centers[new_labels]) ** 2, axis=1)))
        )
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centers, sse_history


def peaks_naive(values, min_height, min_prominence):
    """Exhaustive peak scan: local maxima (plateau leftmost), prominence by
    walking to the nearest higher ground on each side, width at half the
    prominence-referenced height. Returns [(peak_pos, (left, right_excl))]
    in positional indices."""
    n = len(values)
    results = []
    for i in range(1, n - 1):
        if values[i] <= values[i - 1]:
            continue
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j + 1 >= n or values[j + 1] >= values[i]:
            continue
        if values[i] < min_height:
            continue
        left_min = values[i]
        for a in range(i - 1, -1, -1):
            if values[a] > values[i]:
                break
            left_min = min(left_min, values[a])
        right_min = values[i]
        for b in range(j + 1, n):
            if values[b] > values[i]:
                break
            right_min = min(right_min, values[b])
        prominence = values[i] - max(left_min, right_min)
        if prominence < min_prominence:
            continue
        eval_height = values[i] - prominence / 2.0
        left = i
        while left > 0 and values[left - 1] >= eval_height:
            left -= 1
        right = j
        while right + 1 < n and values[right + 1] >= eval_height:
            right += 1
        results.append((i, (left, right + 1)))
    return results


def merge_intervals_naive(intervals, gap):
    """O(n^2) transitive-closure union of intervals closer than ``gap``."""
    items = [list(iv) for iv in intervals]
    changed = True
    while changed:
        changed = False
        for a in range(len(items)):
            for b in range(a + 1, len(items)):
                sa, ea = items[a]
                sb, eb = items[b]
                if sb - ea < gap and sa - eb < gap:
                    items[a] = [min(sa, sb), max(ea, eb)]
                    del items[b]
                    changed = True
                    break
            if changed:
                break
    return sorted((s, e) for s, e in items)


def match_naive(segments, truth_values, overlap=0.3):
    """Per-index brute-force TP/FP classification of predicted segments."""
    tp = fp = 0
    for start, end in segments:
        true_count = sum(1 for i in range(start, end) if truth_values[i])
        if true_count / (end - start) > overlap:
            tp += 1
        else:
            fp += 1
    return tp, fp


def false_negatives_naive(truth_segments, prediction_values):
    fn = 0
    for start, end in truth_segments:
        if not any(prediction_values[i] for i in range(start, end)):
            fn += 1
    return fn
