"""Seeded Lloyd k-means with k-means++ initialization."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError


class KMeansResult(NamedTuple):
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    history: list[float]  # within-cluster SSE after each assignment step


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = X[idx]
        closest = np.minimum(closest, _sq_dists(X, centers[c:c + 1]).ravel())
    return centers


def _lloyd(X, centers, max_iter, tol):
    history = []
    labels = None
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d = _sq_dists(X, centers)
        labels = np.argmin(d, axis=1)
        sse = float(d[np.arange(len(X)), labels].sum())
        history.append(sse)
        new = centers.copy()
        counts = np.bincount(labels, minlength=len(centers))
        for c in range(len(centers)):
            if counts[c]:
                new[c] = X[labels == c].mean(axis=0)
            else:
                # steal the point farthest from its current center
                far = int(np.argmax(d[np.arange(len(X)), labels]))
                new[c] = X[far]
                labels[far] = c
        shift = float(((new - centers) ** 2).sum())
        centers = new
        if len(history) > 1 and history[-2] - history[-1] <= tol * max(history[-2], 1e-300):
            break
        if shift == 0.0:
            break
    d = _sq_dists(X, centers)
    labels = np.argmin(d, axis=1)
    inertia = float(d[np.arange(len(X)), labels].sum())
    return labels, centers, inertia, n_iter, history


def kmeans(X, k: int, seed: int | None = 0, n_init: int = 1, max_iter: int = 300,
           tol: float = 1e-6) -> KMeansResult:
    """Best of ``n_init`` seeded k-means runs by final inertia."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidParameterError("k-means input must be a 2-D array of samples")
    if not 1 <= k <= len(X):
        raise InvalidParameterError(f"k must lie in 1..{len(X)}, got {k}")
    seeds = np.random.SeedSequence(seed).spawn(n_init)
    best = None
    for ss in seeds:
        rng = np.random.default_rng(ss)
        res = _lloyd(X, kmeans_plusplus(X, k, rng), max_iter, tol)
        if best is None or res[2] < best[2]:
            best = res
    return KMeansResult(*best)


def relabel_by_first_occurrence(labels: np.ndarray) -> np.ndarray:
    """Rename cluster ids so they appear in increasing order along ``labels``."""
    labels = np.asarray(labels)
    flat = labels.reshape(-1)
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
    return rank[inverse].reshape(labels.shape)
