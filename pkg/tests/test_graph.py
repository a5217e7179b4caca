import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_mlg
from mlgsp.builders import grid_mlg
from mlgsp.errors import InvalidGraphError
from mlgsp.graph import MultilayerGraph, build_laplacian, check_undirected
from mlgsp.tensor import flatten


def test_rejects_negative_entries(cycle4):
    A = cycle4.copy()
    A[0, 0, 1, 1] = A[1, 1, 0, 0] = -0.5
    with pytest.raises(InvalidGraphError, match="negative"):
        MultilayerGraph(A)


def test_rejects_directed(cycle4):
    A = cycle4.copy()
    A[0, 0, 1, 1] = 0.3
    with pytest.raises(InvalidGraphError, match="undirected"):
        MultilayerGraph(A)


def test_rejects_self_loops(cycle4):
    A = cycle4.copy()
    A[1, 0, 1, 0] = 1.0
    with pytest.raises(InvalidGraphError, match="self-loop"):
        MultilayerGraph(A)


def test_stored_copy_is_read_only(cycle4):
    G = MultilayerGraph(cycle4)
    cycle4[0, 0, 0, 1] = 7.0
    assert G.adjacency[0, 0, 0, 1] == 1.0
    with pytest.raises(ValueError):
        G.adjacency[0, 0, 0, 1] = 3.0
    assert G.shape == (2, 2)


def test_representation_tag(cycle4):
    G = MultilayerGraph(cycle4, "laplacian")
    np.testing.assert_array_equal(G.tensor, build_laplacian(cycle4))
    np.testing.assert_array_equal(G.with_representation("adjacency").tensor, cycle4)


class TestLaplacian:
    def test_empty_graph(self):
        np.testing.assert_array_equal(build_laplacian(np.zeros((2, 3, 2, 3))), np.zeros((2, 3, 2, 3)))

    def test_four_cycle(self, cycle4):
        np.testing.assert_array_equal(flatten(build_laplacian(MultilayerGraph(cycle4))),
                                      2 * np.eye(4) - flatten(cycle4))

    def test_negative_input(self):
        A = np.zeros((1, 2, 1, 2))
        A[0, 0, 0, 1] = -1
        with pytest.raises(InvalidGraphError):
            build_laplacian(A)

    @given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_ones_in_null_space_and_symmetric(self, M, N, seed):
        A = random_mlg(np.random.default_rng(seed), M, N)
        L = build_laplacian(A)
        assert np.max(np.abs(np.einsum("aibj,bj->ai", L, np.ones((M, N))))) < 1e-12
        assert check_undirected(L).passed
        # degree from an explicit double loop
        for a in range(M):
            for i in range(N):
                assert L[a, i, a, i] == pytest.approx(A[a, i].sum())


class TestCheckUndirected:
    def test_symmetric(self, cycle4):
        r = check_undirected(cycle4)
        assert r.max_deviation == 0.0 and r.passed

    def test_perturbed(self, cycle4):
        T = cycle4.copy()
        T[0, 1, 1, 0] += 0.5
        r = check_undirected(T, tol=1e-9)
        assert r.max_deviation == 0.5 and not r.passed


def test_smallest_grid_is_four_cycle(cycle4):
    np.testing.assert_array_equal(grid_mlg(1, 2, 2).adjacency, cycle4)
