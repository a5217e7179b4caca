import numpy as np
import pytest


def four_cycle() -> np.ndarray:
    """M=2, N=2: one intralayer edge per layer, one interlayer edge per entity."""
    A = np.zeros((2, 2, 2, 2))
    for a in range(2):
        A[a, 0, a, 1] = A[a, 1, a, 0] = 1.0
    for i in range(2):
        A[0, i, 1, i] = A[1, i, 0, i] = 1.0
    return A


def random_mlg(rng: np.random.Generator, M: int, N: int, density: float = 0.6) -> np.ndarray:
    """Random undirected adjacency tensor, built entry by entry."""
    A = np.zeros((M, N, M, N))
    nodes = [(a, i) for a in range(M) for i in range(N)]
    for p, (a, i) in enumerate(nodes):
        for (b, j) in nodes[p + 1:]:
            if rng.random() < density:
                w = rng.uniform(0.1, 1.0)
                A[a, i, b, j] = A[b, j, a, i] = w
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cycle4():
    return four_cycle()
