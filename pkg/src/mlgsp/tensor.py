"""Dense 4th-order tensor and 2-D signal algebra.

A multilayer graph with ``M`` layers and ``N`` entities per layer is
represented by a tensor ``F`` of shape ``(M, N, M, N)`` indexed
``(alpha, i, beta, j)``.  Signals are ``(M, N)`` arrays.  Modes are
numbered 1..4 in the public API (mode 1 = ``alpha``) and stored 0-based.

Unfolding convention
--------------------
``unfold(T, n)`` moves mode ``n`` to the front and keeps the remaining
modes in cyclic order ``n+1, n+2, ...`` (wrapping), then reshapes in
row-major order, so the first of the remaining modes varies slowest.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError

__all__ = [
    "as_tensor4",
    "as_signal",
    "cyclic_order",
    "unfold",
    "fold",
    "n_mode_product",
    "n_mode_product_signal",
    "flatten",
    "unflatten",
    "flat_index",
    "outer_rank1",
    "rank1_tensor",
]


def as_tensor4(T) -> np.ndarray:
    """Validate and return ``T`` as a float64 ``(M, N, M, N)`` array."""
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 4:
        raise ShapeError(f"expected a 4th-order tensor, got ndim={T.ndim}")
    M, N, M2, N2 = T.shape
    if (M, N) != (M2, N2):
        raise ShapeError(f"tensor shape {T.shape} is not of the form (M, N, M, N)")
    if not np.all(np.isfinite(T)):
        raise ShapeError("tensor contains non-finite entries")
    return T


def as_signal(s, shape: tuple[int, int] | None = None) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2:
        raise ShapeError(f"expected a 2-D signal, got ndim={s.ndim}")
    if shape is not None and s.shape != tuple(shape):
        raise ShapeError(f"signal shape {s.shape} does not match MLG shape {tuple(shape)}")
    return s


def _check_mode(mode: int, ndim: int) -> int:
    if not 1 <= mode <= ndim:
        raise ShapeError(f"mode must be in 1..{ndim}, got {mode}")
    return mode - 1


def cyclic_order(mode: int, ndim: int = 4) -> list[int]:
    """0-based axis order used by :func:`unfold` for a 1-based ``mode``."""
    m = _check_mode(mode, ndim)
    return [(m + k) % ndim for k in range(ndim)]


def unfold(T: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization with cyclic column ordering."""
    T = np.asarray(T)
    order = cyclic_order(mode, T.ndim)
    return np.transpose(T, order).reshape(T.shape[order[0]], -1)


def fold(Y: np.ndarray, mode: int, shape: tuple[int, ...]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    order = cyclic_order(mode, len(shape))
    permuted = tuple(shape[a] for a in order)
    Y = np.asarray(Y)
    if Y.shape != (permuted[0], int(np.prod(permuted[1:]))):
        raise ShapeError(f"matrix shape {Y.shape} cannot be folded to {tuple(shape)} along mode {mode}")
    return np.transpose(Y.reshape(permuted), np.argsort(order))


def n_mode_product(T: np.ndarray, A: np.ndarray, mode: int) -> np.ndarray:
    """Return ``T x_mode A``; the size of ``mode`` becomes ``A.shape[0]``."""
    T = np.asarray(T, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    m = _check_mode(mode, T.ndim)
    if A.shape[1] != T.shape[m]:
        raise ShapeError(
            f"mode-{mode} product needs a matrix with {T.shape[m]} columns, got {A.shape[1]}"
        )
    out = np.tensordot(A, T, axes=(1, m))
    return np.moveaxis(out, 0, m)


def n_mode_product_signal(s: np.ndarray, A: np.ndarray, mode: int) -> np.ndarray:
    """n-mode product of a 2-D signal: mode 1 gives ``A @ s``, mode 2 gives ``s @ A.T``."""
    s = as_signal(s)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if mode == 1:
        if A.shape[1] != s.shape[0]:
            raise ShapeError(f"mode-1 product needs {s.shape[0]} columns, got {A.shape[1]}")
        return A @ s
    if mode == 2:
        if A.shape[1] != s.shape[1]:
            raise ShapeError(f"mode-2 product needs {s.shape[1]} columns, got {A.shape[1]}")
        return s @ A.T
    raise ShapeError(f"signal mode must be 1 or 2, got {mode}")


def flat_index(alpha: int, i: int, N: int) -> int:
    """0-based flattened position of (layer ``alpha``, entity ``i``), both 0-based."""
    return alpha * N + i


def flatten(T: np.ndarray) -> np.ndarray:
    """Reshape ``(M, N, M, N)`` to ``(M*N, M*N)``; row ``alpha*N + i``, column ``beta*N + j``."""
    T = np.asarray(T, dtype=np.float64)
    M, N = T.shape[:2]
    return T.reshape(M * N, M * N)


def unflatten(X: np.ndarray, M: int, N: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (M * N, M * N):
        raise ShapeError(f"matrix shape {X.shape} is not ({M * N}, {M * N})")
    return X.reshape(M, N, M, N)


def outer_rank1(f: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Rank-1 signal with entry ``(alpha, i) = f[alpha] * e[i]``."""
    return np.outer(np.asarray(f, dtype=np.float64), np.asarray(e, dtype=np.float64))


def rank1_tensor(f: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Symmetric rank-1 tensor ``f o e o f o e``."""
    v = outer_rank1(f, e)
    return np.multiply.outer(v, v)
