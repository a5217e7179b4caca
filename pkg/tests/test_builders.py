import numpy as np
import pytest
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from mlgsp.builders import (
    cluster_frames_to_layers,
    compute_superpixels,
    gaussian_mlg,
    grid_mlg,
)
from mlgsp.errors import InvalidParameterError


class TestGridMlg:
    def test_degrees(self):
        A = grid_mlg(16, 16, 3).adjacency
        intra = np.stack([A[a, :, a, :].sum(1) for a in range(3)])
        inter = A.sum(axis=(2, 3)) - intra
        interior = np.arange(256).reshape(16, 16)[1:-1, 1:-1].ravel()
        assert np.all(intra[:, interior] == 4)
        assert np.all(inter == 2)
        assert intra[0, 0] == 2 and intra[0, 1] == 3

    def test_identical_layers(self):
        A = grid_mlg(3, 4, 3).adjacency
        for a in range(1, 3):
            np.testing.assert_array_equal(A[a, :, a, :], A[0, :, 0, :])
            np.testing.assert_array_equal(A[0, :, a, :], np.eye(12))

    def test_bad_dims(self):
        for dims in ((0, 2, 1), (2, 0, 1), (2, 2, 0)):
            with pytest.raises(InvalidParameterError):
                grid_mlg(*dims)


class TestFrameClustering:
    def test_identity_when_m_equals_b(self, rng):
        cube = rng.uniform(size=(4, 5, 6))
        lc = cluster_frames_to_layers(cube, 6)
        np.testing.assert_array_equal(lc.assignment, np.arange(6))
        np.testing.assert_array_equal(lc.layer_signals, np.moveaxis(cube, 2, 0))

    def test_duplicated_frames_share_a_layer(self, rng):
        base = rng.uniform(size=(6, 6, 3))
        cube = base[:, :, [0, 1, 2, 0, 1, 2]]
        lc = cluster_frames_to_layers(cube, 3)
        a = lc.assignment
        assert a[0] == a[3] and a[1] == a[4] and a[2] == a[5] and len(set(a)) == 3
        np.testing.assert_allclose(lc.layer_signals, np.moveaxis(base, 2, 0)[a[:3].argsort()], atol=1e-15)

    def test_planted_groups(self, rng):
        protos = rng.uniform(size=(10, 8, 8))
        truth = np.repeat(np.arange(10), 3)
        cube = np.moveaxis(protos[truth] + 0.01 * rng.standard_normal((30, 8, 8)), 0, 2)
        lc = cluster_frames_to_layers(cube, 10, seed=3)
        C = np.zeros((10, 10))
        np.add.at(C, (truth, lc.assignment), 1)
        r, c = linear_sum_assignment(-C)
        assert C[r, c].sum() == 30
        assert lc.assignment[0] == 0
        assert all(np.diff(lc.history) <= 1e-9)

    def test_too_many_layers(self):
        with pytest.raises(InvalidParameterError):
            cluster_frames_to_layers(np.zeros((3, 3, 2)), 3)


class TestSuperpixels:
    def test_singletons(self, rng):
        sp = compute_superpixels(rng.uniform(size=(4, 5)), 20)
        assert sorted(sp.labels.ravel()) == list(range(20))

    def test_constant_blocks(self):
        sp = compute_superpixels(np.zeros((4, 4)), 4)
        L = sp.labels
        for y in (0, 2):
            for x in (0, 2):
                assert len(np.unique(L[y:y + 2, x:x + 2])) == 1
        assert len(np.unique(L)) == 4

    @pytest.mark.parametrize("n", [7, 25, 60])
    def test_exact_count_and_connected(self, rng, n):
        img = ndimage.gaussian_filter(rng.uniform(size=(30, 33)), 2)
        sp = compute_superpixels(img, n)
        assert set(np.unique(sp.labels)) == set(range(n))
        for lab in range(n):
            _, k = ndimage.label(sp.labels == lab)
            assert k == 1
        assert sp.sizes().sum() == 30 * 33

    def test_too_many_segments(self):
        with pytest.raises(InvalidParameterError):
            compute_superpixels(np.zeros((3, 3)), 10)

    def test_means(self, rng):
        img = rng.uniform(size=(6, 6))
        sp = compute_superpixels(img, 4)
        for lab in range(4):
            assert sp.means(img)[lab] == pytest.approx(img[sp.labels == lab].mean())


class TestGaussianMlg:
    def setup_method(self):
        self.sp = compute_superpixels(np.zeros((6, 6)), 9)

    def test_identical_features_give_unit_weights(self):
        A = gaussian_mlg(np.full((2, 6, 6), 0.4), self.sp, knn=None).adjacency
        off = ~np.eye(18, dtype=bool).reshape(2, 9, 2, 9)
        intra = np.zeros_like(off)
        inter = np.zeros_like(off)
        for a in range(2):
            intra[a, :, a, :] = True
        inter[0, :, 1, :] = inter[1, :, 0, :] = np.eye(9, dtype=bool)
        np.testing.assert_array_equal(A[off & intra], 1.0)
        np.testing.assert_array_equal(A[inter], 1.0)

    def test_two_far_clusters_are_nearly_disconnected(self, rng):
        sig = np.zeros((1, 6, 6))
        sig[0, :, 3:] = 1.0
        sp = compute_superpixels(sig[0], 6)
        A = gaussian_mlg(sig + 0.001 * rng.standard_normal(sig.shape), sp, sigma_intra=0.05, knn=None).adjacency[0, :, 0, :]
        side = sp.means(sig[0]) > 0.5
        assert A[np.ix_(side, ~side)].max() < 1e-100
        assert A[np.ix_(side, side)][~np.eye(side.sum(), dtype=bool)].min() > 0.9

    def test_structure(self, rng):
        sig = rng.uniform(size=(3, 6, 6))
        for full in (False, True):
            A = gaussian_mlg(sig, self.sp, knn=3, full_interlayer=full).adjacency
            np.testing.assert_array_equal(A, A.transpose(2, 3, 0, 1))
            assert np.all(np.einsum("aiai->ai", A) == 0)
            nz = A[A != 0]
            assert np.all((nz > 0) & (nz <= 1))

    def test_bad_sigma(self):
        with pytest.raises(InvalidParameterError):
            gaussian_mlg(np.zeros((1, 6, 6)), self.sp, sigma_intra=0.0)
        with pytest.raises(InvalidParameterError):
            gaussian_mlg(np.zeros((1, 6, 6)), self.sp, sigma_inter=-1.0)
