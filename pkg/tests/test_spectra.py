import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from conftest import random_mlg
from mlgsp.errors import InvalidGraphError, ShapeError
from mlgsp.graph import build_laplacian
from mlgsp.spectra import (
    SpectralBasis,
    canonicalize,
    flattened_eigen,
    hosvd,
    hosvd_diagonal_residual,
    imgft,
    mgft,
    orthogonal_cp,
)
from mlgsp.tensor import flatten, rank1_tensor, unfold


def _unit(v):
    return v / np.linalg.norm(v)


def _sign_ok(U):
    for c in range(U.shape[1]):
        col = U[:, c]
        k = int(np.flatnonzero(np.abs(col) >= np.abs(col).max() * (1 - 1e-9))[0])
        if col[k] <= 0:
            return False
    return True


class TestHosvd:
    def test_rank1(self, rng):
        f, e = _unit(rng.standard_normal(3)), _unit(rng.standard_normal(4))
        h = hosvd(rank1_tensor(f, e))
        assert abs(abs(h.basis.layer[:, 0] @ f) - 1) < 1e-12
        assert abs(abs(h.basis.entity[:, 0] @ e) - 1) < 1e-12
        core = h.core.copy()
        assert core[0, 0, 0, 0] == pytest.approx(1.0, abs=1e-12)
        core[0, 0, 0, 0] = 0
        assert np.max(np.abs(core)) < 1e-12

    def test_four_cycle_layer_basis(self, cycle4):
        b = hosvd(cycle4).basis
        np.testing.assert_allclose(b.layer, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(b.layer_values, [2, 2], atol=1e-12)

    def test_invariants_on_random_graphs(self, rng):
        for _ in range(10):
            M, N = rng.integers(1, 4), rng.integers(1, 7)
            F = random_mlg(rng, M, N)
            h = hosvd(F)
            b = h.basis
            assert np.linalg.norm(h.core) == pytest.approx(np.linalg.norm(F), rel=1e-10, abs=1e-12)
            assert np.linalg.norm(h.reconstruct() - F) <= 1e-8 * max(np.linalg.norm(F), 1e-300) + 1e-14
            assert b.orthonormality_error() <= 1e-9
            assert np.all(np.diff(np.abs(b.layer_values)) <= 1e-12)
            assert np.all(np.diff(np.abs(b.entity_values)) <= 1e-12)
            assert _sign_ok(b.layer) and _sign_ok(b.entity)

    def test_mode3_subspaces_match_mode1(self, rng):
        F = random_mlg(rng, 3, 5)
        U1 = np.linalg.svd(unfold(F, 1))[0]
        U3 = np.linalg.svd(unfold(F, 3))[0]
        for r in range(1, 3):
            assert np.max(subspace_angles(U1[:, :r], U3[:, :r])) < 1e-6

    def test_deterministic(self, rng):
        F = build_laplacian(random_mlg(rng, 3, 6))
        a, b = hosvd(F), hosvd(F.copy())
        assert np.array_equal(a.basis.layer, b.basis.layer)
        assert np.array_equal(a.basis.entity, b.basis.entity)
        assert np.array_equal(a.core, b.core)

    def test_asymmetric_rejected(self, rng):
        with pytest.raises(InvalidGraphError):
            hosvd(rng.standard_normal((2, 3, 2, 3)))


class TestCanonicalize:
    def test_rotation_invariant_under_ties(self, rng):
        # two different orthonormal bases of one eigenspace give the same result
        Q = np.linalg.qr(rng.standard_normal((5, 5)))[0]
        vals = np.array([3.0, 2.0, 2.0, 2.0, 1.0])
        R = np.eye(5)
        R[1:4, 1:4] = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        a, _ = canonicalize(Q, vals)
        b, _ = canonicalize(Q @ R, vals)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_sorts_by_magnitude(self):
        U, v = canonicalize(np.eye(3), np.array([1.0, -5.0, 2.0]))
        np.testing.assert_array_equal(v, [-5.0, 2.0, 1.0])
        np.testing.assert_array_equal(U, np.eye(3)[:, [1, 2, 0]])


class TestFlattenedEigen:
    def test_four_cycle(self, cycle4):
        fe = flattened_eigen(cycle4)
        np.testing.assert_allclose(fe.values, [2, 0, 0, -2], atol=1e-12)

    def test_diagonal(self):
        d = np.array([0.5, -1.0, 3.0, 2.0])
        F = np.diag(d).reshape(2, 2, 2, 2)
        np.testing.assert_allclose(flattened_eigen(F).values, sorted(d, reverse=True), atol=1e-14)

    def test_trace_and_orthonormal_vectors(self, rng):
        F = random_mlg(rng, 3, 4)
        fe = flattened_eigen(F)
        assert fe.values.sum() == pytest.approx(np.trace(flatten(F)), abs=1e-10)
        V = fe.vectors.reshape(12, 12)
        np.testing.assert_allclose(V @ V.T, np.eye(12), atol=1e-10)
        X = flatten(F)
        for lam, v in zip(fe.values, fe.vectors):
            np.testing.assert_allclose(X @ v.reshape(-1), lam * v.reshape(-1), atol=1e-10)


class TestOrthogonalCp:
    def test_model_matched(self, rng):
        ef = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        ee = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        lam = rng.uniform(1, 5, (3, 4))
        F = sum(lam[a, i] * rank1_tensor(ef[:, a], ee[:, i]) for a in range(3) for i in range(4))
        cp = orthogonal_cp(F)
        assert cp.residual <= 1e-9
        np.testing.assert_allclose(np.sort(cp.weights.ravel()), np.sort(lam.ravel()), atol=1e-9)

    def test_four_cycle_not_worse_than_oracle(self, cycle4):
        # oracle: keep only S[a, i, a, i] of the HOSVD core, reconstruct, measure
        h = hosvd(cycle4)
        ef, ee = h.basis.layer, h.basis.entity
        R = np.zeros_like(cycle4)
        for a in range(2):
            for i in range(2):
                R += h.core[a, i, a, i] * rank1_tensor(ef[:, a], ee[:, i])
        oracle = np.linalg.norm(cycle4 - R)
        assert orthogonal_cp(cycle4).residual <= oracle + 1e-12
        assert hosvd_diagonal_residual(cycle4) == pytest.approx(oracle, abs=1e-12)

    def test_monotone_and_consistent(self, rng):
        for _ in range(5):
            F = random_mlg(rng, 3, 5)
            cp = orthogonal_cp(F)
            assert np.all(np.diff(cp.history) <= 1e-12)
            assert cp.residual <= hosvd_diagonal_residual(F) + 1e-10
            assert np.linalg.norm(F - cp.reconstruct()) == pytest.approx(cp.residual, rel=1e-8, abs=1e-10)
            assert np.isrealobj(cp.weights)
            assert cp.basis.orthonormality_error() <= 1e-9


class TestTransforms:
    def test_identity_basis(self, rng):
        s = rng.standard_normal((2, 3))
        B = SpectralBasis(np.eye(2), np.eye(3), np.ones(2), np.ones(3))
        np.testing.assert_array_equal(mgft(s, B), s)

    def test_basis_atoms(self, cycle4):
        B = hosvd(cycle4).basis
        s = np.outer(B.layer[:, 0], B.entity[:, 0])
        want = np.zeros((2, 2))
        want[0, 0] = 1
        np.testing.assert_allclose(mgft(s, B), want, atol=1e-14)
        np.testing.assert_array_equal(imgft(np.zeros((2, 2)), B), np.zeros((2, 2)))
        e = np.zeros((2, 2))
        e[1, 0] = 1
        np.testing.assert_allclose(imgft(e, B), np.outer(B.layer[:, 1], B.entity[:, 0]), atol=1e-14)

    def test_shape_mismatch(self, cycle4):
        with pytest.raises(ShapeError):
            mgft(np.zeros((3, 2)), hosvd(cycle4).basis)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_parseval_and_round_trip(self, seed):
        r = np.random.default_rng(seed)
        F = random_mlg(r, 2, 4)
        s = r.standard_normal((2, 4))
        for B in (hosvd(F).basis, orthogonal_cp(F).basis):
            sh = mgft(s, B)
            assert np.linalg.norm(sh) == pytest.approx(np.linalg.norm(s), rel=1e-9)
            np.testing.assert_allclose(imgft(sh, B), s, atol=1e-12)
