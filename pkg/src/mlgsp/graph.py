"""Multilayer graph container, Laplacian construction and validity checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import InvalidGraphError
from .tensor import as_tensor4, flatten

Representation = Literal["adjacency", "laplacian"]

SYMMETRY_TOL = 1e-9


class SymmetryReport(NamedTuple):
    max_deviation: float
    passed: bool


def check_undirected(T, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    """Largest violation of ``T[a, i, b, j] == T[b, j, a, i]``."""
    T = np.asarray(T, dtype=np.float64)
    dev = float(np.max(np.abs(T - T.transpose(2, 3, 0, 1)))) if T.size else 0.0
    return SymmetryReport(dev, dev <= tol)


def require_undirected(T, tol: float = SYMMETRY_TOL) -> np.ndarray:
    T = as_tensor4(T)
    report = check_undirected(T, tol)
    if not report.passed:
        raise InvalidGraphError(
            f"tensor is not undirected-symmetric (max deviation {report.max_deviation:.3g} > {tol:g})"
        )
    return T


@dataclass(frozen=True)
class MultilayerGraph:
    """An undirected multilayer graph with ``M`` layers of ``N`` entities.

    ``adjacency`` holds edge strengths ``A[alpha, i, beta, j]`` between the
    projection of entity ``j`` in layer ``beta`` and entity ``i`` in layer
    ``alpha``.  ``representation`` selects which tensor :attr:`tensor`
    returns to the spectral routines.
    """

    adjacency: np.ndarray
    representation: Representation = "adjacency"

    def __post_init__(self):
        A = as_tensor4(self.adjacency)
        if self.representation not in ("adjacency", "laplacian"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if np.any(A < 0):
            raise InvalidGraphError("adjacency tensor has negative entries")
        require_undirected(A)
        M, N = A.shape[:2]
        diag = flatten(A).diagonal()
        if np.any(diag != 0):
            raise InvalidGraphError("adjacency tensor has self-loops")
        A = A.copy()
        A.flags.writeable = False
        object.__setattr__(self, "adjacency", A)

    @property
    def M(self) -> int:
        return self.adjacency.shape[0]

    @property
    def N(self) -> int:
        return self.adjacency.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M, self.N)

    @property
    def tensor(self) -> np.ndarray:
        if self.representation == "laplacian":
            return build_laplacian(self)
        return self.adjacency

    def with_representation(self, representation: Representation) -> "MultilayerGraph":
        return MultilayerGraph(self.adjacency, representation)


def build_laplacian(G: MultilayerGraph | np.ndarray) -> np.ndarray:
    """Combinatorial Laplacian tensor ``L = D - A``.

    The degree of node ``(alpha, i)`` sums all intralayer and interlayer
    edge strengths, so every row of the flattening sums to zero.
    """
    A = G.adjacency if isinstance(G, MultilayerGraph) else as_tensor4(G)
    if np.any(A < 0):
        raise InvalidGraphError("adjacency tensor has negative entries")
    M, N = A.shape[:2]
    flat = flatten(A)
    L = np.diag(flat.sum(axis=1)) - flat
    return L.reshape(M, N, M, N)
