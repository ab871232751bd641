"""Filter bank, feature, PCA, and texton-clustering tests."""

import itertools

import numpy as np
import pytest

import oracles
from smokescan.texture import (
    FeatureMatrix,
    build_filter_bank,
    cluster_textons,
    compute_features,
    kmeans_pp_init,
    lloyd_accelerated,
    pca_reduce,
    smooth_segmentation,
)

BANK = build_filter_bank()


class TestFilterBank:
    def test_level_level_center(self):
        assert BANK[0][2][2] == 9.0  # 3 * 3

    def test_edge_level_corner(self):
        # row-major generator order: edge x level sits at index 1*5+0
        assert BANK[5][0][0] == -1.0

    def test_spot_spot_sums_to_zero(self):
        assert BANK[2 * 5 + 2].sum() == 0.0

    def test_zero_sum_generators_give_zero_sum_rows(self):
        # generators 1..4 sum to zero, so every mask involving them sums to 0
        for i, j in itertools.product(range(5), range(5)):
            if i == 0 and j == 0:
                continue
            assert BANK[i * 5 + j].sum() == pytest.approx(0.0, abs=1e-12)

    def test_transpose_symmetry(self):
        for i, j in itertools.product(range(5), range(5)):
            assert np.array_equal(BANK[i * 5 + j], BANK[j * 5 + i].T)

    def test_bank_shape(self):
        assert BANK.shape == (25, 5, 5)


class TestComputeFeatures:
    def test_constant_frame_gives_zero_features(self):
        img = np.full((12, 12, 3), 0.6)
        features = compute_features(img, BANK)
        # mean subtraction zeroes even the all-positive level x level mask
        assert np.abs(features.data).max() < 1e-12
        assert features.dims == 75

    def test_matches_naive_convolution(self, rng):
        img = rng.random((16, 16, 3))
        features = compute_features(img, BANK)
        for ch in range(3):
            centered = img[:, :, ch] - img[:, :, ch].mean()
            for m in (0, 7, 24):
                expected = oracles.conv2d_naive(centered, BANK[m]).ravel()
                got = features.data[:, ch * 25 + m]
                assert np.abs(got - expected).max() < 1e-10

    def test_shape_recorded(self, rng):
        features = compute_features(rng.random((6, 9, 3)), BANK)
        assert features.shape == (6, 9)
        assert features.rows == 54


class TestPcaReduce:
    def test_rank_one_data_keeps_one_dim(self, rng):
        direction = rng.standard_normal(8)
        data = np.outer(rng.standard_normal(40), direction)
        out = pca_reduce(FeatureMatrix(data=data, centered=True), energy=0.98)
        assert out.dims == 1

    @pytest.mark.parametrize("d,expected", [(5, 5), (10, 10), (50, 49)])
    def test_isotropic_keeps_ceil_energy_fraction(self, rng, d, expected):
        raw = rng.standard_normal((max(4 * d, 120), d))
        raw -= raw.mean(axis=0)
        cov = raw.T @ raw / (raw.shape[0] - 1)
        vals, vecs = np.linalg.eigh(cov)
        white = raw @ vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
        out = pca_reduce(FeatureMatrix(data=white, centered=True), energy=0.98)
        assert out.dims == expected

    def test_full_energy_keeps_total_variance(self, rng):
        data = rng.standard_normal((60, 7)) @ rng.standard_normal((7, 7))
        mat = FeatureMatrix(data=data).center()
        out = pca_reduce(mat, energy=1.0)
        total = np.var(mat.data, axis=0, ddof=1).sum()
        kept = np.var(out.data, axis=0, ddof=1).sum()
        assert kept == pytest.approx(total, abs=1e-9)

    def test_reconstruction_loses_at_most_unretained_energy(self, rng):
        data = rng.standard_normal((200, 12)) @ rng.standard_normal((12, 12))
        mat = FeatureMatrix(data=data).center()
        energy = 0.9
        out = pca_reduce(mat, energy=energy)
        total = np.sum(mat.data**2)
        kept = np.sum(out.data**2)
        assert kept / total >= energy - 1e-9

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError):
            pca_reduce(FeatureMatrix(data=np.zeros((1, 4)), centered=True))


class TestClusterTextons:
    def test_single_cluster(self, rng):
        data = rng.standard_normal((30, 3))
        features = FeatureMatrix(data=data, centered=True)
        labels, result = cluster_textons(features, k=1, seed=0)
        assert np.array_equal(labels, np.zeros(30, dtype=labels.dtype))
        assert np.allclose(result.centers[0], data.mean(axis=0))

    def test_two_separated_clouds_found_optimally(self, rng):
        cloud_a = rng.normal(0.0, 0.2, (6, 2))
        cloud_b = rng.normal(8.0, 0.2, (5, 2))
        data = np.vstack([cloud_a, cloud_b])
        labels, _ = cluster_textons(FeatureMatrix(data=data, centered=False), k=2, seed=3)

        best_sse, best_partition = None, None
        n = data.shape[0]
        for bits in range(1, 2 ** (n - 1)):
            part = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
            if part.all() or not part.any():
                continue
            sse = 0.0
            for group in (part, ~part):
                c = data[group].mean(axis=0)
                sse += float(np.sum((data[group] - c) ** 2))
            if best_sse is None or sse < best_sse:
                best_sse, best_partition = sse, part
        same = np.array_equal(labels.astype(bool), best_partition)
        flipped = np.array_equal(~labels.astype(bool), best_partition)
        assert same or flipped

    @pytest.mark.parametrize("trial", range(10))
    def test_accelerated_equals_plain_lloyd(self, trial):
        r = np.random.default_rng(1000 + trial)
        n = int(r.integers(10, 200))
        d = int(r.integers(1, 6))
        k = int(r.integers(1, 5))
        data = r.standard_normal((n, d))
        centers = kmeans_pp_init(data, k, np.random.default_rng(trial))
        accel = lloyd_accelerated(data, centers, max_iter=100)
        labels, oracle_centers, _ = oracles.lloyd_naive(data, centers, max_iter=100)
        assert np.array_equal(accel.labels, labels)
        assert np.array_equal(accel.centers, oracle_centers)

    def test_sse_non_increasing(self, rng):
        data = rng.standard_normal((150, 4))
        centers = kmeans_pp_init(data, 4, rng)
        result = lloyd_accelerated(data, centers)
        history = result.sse_history
        for earlier, later in zip(history, history[1:]):
            assert later <= earlier * (1.0 + 1e-12) + 1e-12

    def test_seeded_determinism(self, rng):
        data = rng.standard_normal((80, 3))
        features = FeatureMatrix(data=data, centered=True)
        labels_a, _ = cluster_textons(features, k=3, seed=42)
        labels_b, _ = cluster_textons(features, k=3, seed=42)
        assert np.array_equal(labels_a, labels_b)

    def test_k_exceeding_rows_rejected(self, rng):
        features = FeatureMatrix(data=rng.standard_normal((3, 2)), centered=True)
        with pytest.raises(ValueError):
            cluster_textons(features, k=5, seed=0)


class TestSmoothSegmentation:
    def test_uniform_map_unchanged(self):
        labels = np.zeros((20, 20), dtype=np.int32)
        assert np.array_equal(smooth_segmentation(labels, k=1), labels)

    def test_single_pixel_island_absorbed(self):
        labels = np.zeros((20, 20), dtype=np.int32)
        labels[10, 10] = 1
        out = smooth_segmentation(labels, k=2, min_area=4)
        assert np.array_equal(out, np.zeros_like(labels))

    def test_checkerboard_transitions_reduced(self):
        yy, xx = np.indices((24, 24))
        labels = ((yy + xx) % 2).astype(np.int32)
        out = smooth_segmentation(labels, k=2, min_area=1, median_radius=1, closing_radius=0)

        def transitions(arr):
            return int((arr[:, 1:] != arr[:, :-1]).sum() + (arr[1:, :] != arr[:-1, :]).sum())

        assert transitions(out) < transitions(labels)

    def test_no_small_components_survive(self, rng):
        labels = rng.integers(0, 4, (40, 40)).astype(np.int32)
        min_area = 16
        out = smooth_segmentation(labels, k=4, min_area=min_area)
        from scipy import ndimage

        from smokescan.change import EIGHT_CONNECTED

        for value in np.unique(out):
            comps, n = ndimage.label(out == value, structure=EIGHT_CONNECTED)
            if n:
                sizes = np.bincount(comps.ravel())[1:]
                assert sizes.min() >= min_area
