import numpy as np
import pytest

from mlgsp.cluster import kmeans, relabel_by_first_occurrence
from mlgsp.errors import InvalidParameterError


def test_separated_blobs(rng):
    X = np.concatenate([rng.normal(c, 0.05, (30, 2)) for c in (0.0, 5.0, 10.0)])
    res = kmeans(X, 3, seed=1, n_init=3)
    for g in range(3):
        assert len(set(res.labels[30 * g:30 * (g + 1)])) == 1
    assert len(set(res.labels)) == 3


def test_inertia_matches_labels(rng):
    X = rng.standard_normal((50, 3))
    res = kmeans(X, 4, seed=0)
    want = sum(((X[res.labels == c] - res.centers[c]) ** 2).sum() for c in range(4))
    assert res.inertia == pytest.approx(want, rel=1e-10)
    assert all(a >= b - 1e-9 for a, b in zip(res.history, res.history[1:]))


def test_deterministic_and_restarts_help(rng):
    X = rng.standard_normal((80, 2))
    a, b = kmeans(X, 5, seed=7), kmeans(X, 5, seed=7)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert kmeans(X, 5, seed=7, n_init=10).inertia <= min(kmeans(X, 5, seed=7).inertia, a.inertia) + 1e-12


def test_k_equals_n(rng):
    X = rng.standard_normal((6, 2))
    assert kmeans(X, 6, seed=0).inertia == pytest.approx(0.0, abs=1e-20)


def test_bad_k():
    with pytest.raises(InvalidParameterError):
        kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(InvalidParameterError):
        kmeans(np.zeros((3, 2)), 0)


def test_relabel():
    np.testing.assert_array_equal(relabel_by_first_occurrence(np.array([5, 5, 2, 9, 2])), [0, 0, 1, 2, 1])
    np.testing.assert_array_equal(relabel_by_first_occurrence(np.array([[3, 1], [1, 0]])), [[0, 1], [1, 2]])
