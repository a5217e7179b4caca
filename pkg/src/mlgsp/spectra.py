"""Spectral and singular bases of multilayer graphs and the MLG transforms.

Two factorizations of a representing tensor ``F`` are provided:

* :func:`hosvd` gives the singular space (``MLN-HOSVD``): one orthogonal
  factor for the layer modes (1, 3) and one for the entity modes (2, 4).
* :func:`orthogonal_cp` approximates ``F`` by ``sum lambda[a, i] *
  f_a o e_i o f_a o e_i`` with orthonormal ``f`` and ``e`` (``MLN-EIG``).

Both return a :class:`SpectralBasis` usable by :func:`mgft` / :func:`imgft`.
Bases are canonicalized so that repeated calls give bit-identical output:
columns are sorted by value magnitude, each column's largest-magnitude
entry is made positive, and columns sharing a (numerically) repeated value
are rotated to diagonalize the partial trace of ``F`` over the other mode
pair; whatever freedom remains is fixed by a basis derived from the
subspace projector, and tied columns are ordered lexicographically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .errors import ShapeError
from .graph import require_undirected
from .tensor import as_signal, flatten, n_mode_product, unfold

BasisKind = Literal["hosvd", "cp", "eig", "gft2"]

_TIE_RTOL = 1e-9
_LEX_DECIMALS = 9


@dataclass(frozen=True)
class SpectralBasis:
    """Layer basis ``E_f`` (M x M) and entity basis ``E_e`` (N x N).

    Columns are the basis vectors ``f_alpha`` / ``e_i``.
    """

    layer: np.ndarray
    entity: np.ndarray
    layer_values: np.ndarray
    entity_values: np.ndarray
    kind: str = "hosvd"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.layer.shape[0], self.entity.shape[0])

    def transform(self, s) -> np.ndarray:
        return mgft(s, self)

    def inverse(self, s_hat) -> np.ndarray:
        return imgft(s_hat, self)

    def orthonormality_error(self) -> float:
        ef, ee = self.layer, self.entity
        return max(
            float(np.max(np.abs(ef.T @ ef - np.eye(ef.shape[1])))),
            float(np.max(np.abs(ee.T @ ee - np.eye(ee.shape[1])))),
        )


class HosvdFactorization(NamedTuple):
    core: np.ndarray
    basis: SpectralBasis

    def reconstruct(self) -> np.ndarray:
        ef, ee = self.basis.layer, self.basis.entity
        T = self.core
        for mode, U in ((1, ef), (2, ee), (3, ef), (4, ee)):
            T = n_mode_product(T, U, mode)
        return T


@dataclass(frozen=True)
class CpFactorization:
    weights: np.ndarray
    basis: SpectralBasis
    residual: float
    relative_residual: float
    n_iter: int
    converged: bool
    history: list[float] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        V = _rank1_signals(self.basis.layer, self.basis.entity)  # (M, N, M, N) over (a, i) -> signal
        M, N = self.weights.shape
        terms = V.reshape(M * N, M, N)
        w = self.weights.reshape(-1)
        return np.einsum("k,kab,kcd->abcd", w, terms, terms)


class FlatEigen(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray  # (M*N, M, N); vectors[k] pairs with values[k]


# --------------------------------------------------------------------------
# canonicalization

def _sign_normalize(U: np.ndarray) -> np.ndarray:
    U = U.copy()
    for c in range(U.shape[1]):
        col = np.abs(U[:, c])
        amax = col.max()
        if amax == 0:
            continue
        k = int(np.flatnonzero(col >= amax * (1 - 1e-9))[0])
        if U[k, c] < 0:
            U[:, c] = -U[:, c]
    return U


def _tie_groups(values: np.ndarray, signed: bool = False) -> list[np.ndarray]:
    """Split indices of a sorted array into runs of equal magnitude (or value)."""
    mags = np.asarray(values, dtype=np.float64) if signed else np.abs(values)
    scale = max(float(np.abs(mags).max(initial=0.0)), 1.0)
    groups, start = [], 0
    for k in range(1, len(mags) + 1):
        if k == len(mags) or mags[k - 1] - mags[k] > _TIE_RTOL * scale:
            groups.append(np.arange(start, k))
            start = k
    return groups


def _projector_basis(U: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``span(U)`` that depends only on the subspace.

    Pivoted Cholesky of the projector ``U U^T`` (largest remaining diagonal,
    lowest index on ties) followed by Gram-Schmidt in pivot order.
    """
    P = U @ U.T
    n, d = U.shape
    L = np.zeros((n, d))
    diag = P.diagonal().copy()
    for c in range(d):
        top = diag.max()
        k = int(np.flatnonzero(diag >= top * (1 - 1e-9))[0])
        col = P[:, k] - L[:, :c] @ L[k, :c]
        L[:, c] = col / np.sqrt(col[k])
        diag = np.maximum(diag - L[:, c] ** 2, 0.0)
    Q, R = np.linalg.qr(L)
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))


def _resolve_block(block: np.ndarray, secondary: np.ndarray | None) -> np.ndarray:
    if secondary is not None:
        w, R = np.linalg.eigh(block.T @ secondary @ block)
        order = np.argsort(-w, kind="stable")
        w, block = w[order], block @ R[:, order]
        parts = [block[:, g] for g in _tie_groups(w, signed=True)]
    else:
        parts = [block]
    out = []
    for part in parts:
        part = _projector_basis(part) if part.shape[1] > 1 else part
        part = _sign_normalize(part)
        if part.shape[1] > 1:
            keys = np.round(part, _LEX_DECIMALS) + 0.0  # +0.0 folds -0.0
            idx = sorted(range(part.shape[1]), key=lambda c: tuple(-keys[:, c]))
            part = part[:, idx]
        out.append(part)
    return np.hstack(out)


def canonicalize(U: np.ndarray, values: np.ndarray, secondary: np.ndarray | None = None):
    """Deterministic column order and sign for an orthonormal basis.

    Returns ``(U, values)`` sorted by ``|values|`` descending.  Columns that
    share a repeated value are rotated to diagonalize ``secondary`` (when
    given); any rotation freedom left is removed by a projector-derived
    basis, so the result does not depend on the eigen/SVD solver.
    """
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(-np.abs(values), kind="stable")
    U, values = U[:, order], values[order]
    out = np.empty_like(U)
    for g in _tie_groups(values):
        block = U[:, g]
        out[:, g] = _resolve_block(block, secondary) if len(g) > 1 else _sign_normalize(block)
    return out, values


def _layer_trace(F: np.ndarray) -> np.ndarray:
    return np.einsum("aibi->ab", F)


def _entity_trace(F: np.ndarray) -> np.ndarray:
    return np.einsum("aiaj->ij", F)


# --------------------------------------------------------------------------
# factorizations

def _mode_svd(F: np.ndarray, mode: int) -> tuple[np.ndarray, np.ndarray]:
    U, s, _ = np.linalg.svd(unfold(F, mode), full_matrices=False)
    return U, s


def core_tensor(F: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """``F x1 Ef^T x2 Ee^T x3 Ef^T x4 Ee^T``."""
    ef, ee = basis.layer, basis.entity
    S = F
    for mode, U in ((1, ef), (2, ee), (3, ef), (4, ee)):
        S = n_mode_product(S, U.T, mode)
    return S


def hosvd(F) -> HosvdFactorization:
    """Higher-order SVD of an undirected representing tensor."""
    F = require_undirected(F)
    Uf, gamma = _mode_svd(F, 1)
    Ue, sigma = _mode_svd(F, 2)
    Uf, gamma = canonicalize(Uf, gamma, _layer_trace(F))
    Ue, sigma = canonicalize(Ue, sigma, _entity_trace(F))
    basis = SpectralBasis(Uf, Ue, gamma, sigma, kind="hosvd")
    return HosvdFactorization(core_tensor(F, basis), basis)


def flattened_eigen(F) -> FlatEigen:
    """Eigenpairs of the symmetric ``MN x MN`` flattening, values descending."""
    F = require_undirected(F)
    M, N = F.shape[:2]
    X = flatten(F)
    w, V = np.linalg.eigh(0.5 * (X + X.T))
    order = np.argsort(-w, kind="stable")
    w, V = w[order], _sign_normalize(V[:, order])
    return FlatEigen(w, V.T.reshape(M * N, M, N))


def _rank1_signals(ef: np.ndarray, ee: np.ndarray) -> np.ndarray:
    # V[a, i] = f_a o e_i as an (M, N) signal
    return np.einsum("xa,yi->aixy", ef, ee)


def _diag_weights_and_gram(F, ef, ee):
    T1 = np.tensordot(F, ee, axes=(3, 0))           # (a, j, b, i)
    G = np.einsum("ajbi,ji->aib", T1, ee)            # G[:, i, :] = F x2 e_i x4 e_i
    lam = np.einsum("aib,ax,bx->xi", G, ef, ef)
    return lam, G


def _polar(W: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(W)
    return U @ Vt


def _offdiag_residual(F, ef, ee) -> float:
    S = core_tensor(F, SpectralBasis(ef, ee, np.zeros(0), np.zeros(0)))
    M, N = F.shape[:2]
    a, i = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    S = S.copy()
    S[a, i, a, i] = 0.0
    return float(np.linalg.norm(S))


def orthogonal_cp(F, max_iter: int = 100, tol: float = 1e-8) -> CpFactorization:
    """Orthogonal CP approximation ``F ~ sum lam[a,i] f_a o e_i o f_a o e_i``.

    Starts from the HOSVD factors and alternates polar updates of the layer
    and entity factors.  With orthonormal factors the optimal weights are
    ``lam[a, i] = <F, f_a o e_i o f_a o e_i>`` and the squared residual is
    ``||F||^2 - sum lam^2``, so each update is kept only if it raises
    ``sum lam^2``; the residual is therefore non-increasing.
    """
    F = require_undirected(F)
    init = hosvd(F).basis
    ef, ee = init.layer.copy(), init.entity.copy()
    norm2 = float(np.sum(F * F))
    lam, G = _diag_weights_and_gram(F, ef, ee)
    J = float(np.sum(lam * lam))
    history = [np.sqrt(max(norm2 - J, 0.0))]
    margin = 1e-12 * max(norm2, 1e-300)
    n_iter, converged = 0, False

    for n_iter in range(1, max_iter + 1):
        improved = False
        W = np.einsum("aib,bx,xi->ax", G, ef, lam)
        ef_new = _polar(W)
        lam_new, G_new = _diag_weights_and_gram(F, ef_new, ee)
        J_new = float(np.sum(lam_new * lam_new))
        if J_new > J + margin:
            ef, lam, G, J, improved = ef_new, lam_new, G_new, J_new, True

        H = np.einsum("ax,ajbl,bx->xjl", ef, F, ef)
        W = np.einsum("xjl,li,xi->ji", H, ee, lam)
        ee_new = _polar(W)
        lam_new, G_new = _diag_weights_and_gram(F, ef, ee_new)
        J_new = float(np.sum(lam_new * lam_new))
        if J_new > J + margin:
            ee, lam, G, J, improved = ee_new, lam_new, G_new, J_new, True

        res = np.sqrt(max(norm2 - J, 0.0))
        prev = history[-1]
        history.append(res)
        if not improved or abs(prev - res) <= tol * max(prev, 1e-300):
            converged = True
            break

    layer_vals = np.sqrt(np.sum(lam * lam, axis=1))
    entity_vals = np.sqrt(np.sum(lam * lam, axis=0))
    ro = np.argsort(-layer_vals, kind="stable")
    co = np.argsort(-entity_vals, kind="stable")
    ef, ee, lam = _sign_normalize(ef[:, ro]), _sign_normalize(ee[:, co]), lam[np.ix_(ro, co)]
    basis = SpectralBasis(ef, ee, layer_vals[ro], entity_vals[co], kind="cp")
    residual = _offdiag_residual(F, ef, ee)
    fnorm = np.sqrt(norm2)
    return CpFactorization(
        weights=lam,
        basis=basis,
        residual=residual,
        relative_residual=residual / fnorm if fnorm > 0 else 0.0,
        n_iter=n_iter,
        converged=converged,
        history=history,
    )


def hosvd_diagonal_residual(F) -> float:
    """Residual of keeping only the ``S[a, i, a, i]`` entries of the HOSVD core."""
    F = require_undirected(F)
    b = hosvd(F).basis
    return _offdiag_residual(F, b.layer, b.entity)


# --------------------------------------------------------------------------
# transforms

def _check_basis(s: np.ndarray, B: SpectralBasis) -> None:
    if s.shape != B.shape:
        raise ShapeError(f"signal shape {s.shape} does not match basis shape {B.shape}")


def mgft(s, B: SpectralBasis) -> np.ndarray:
    """Forward MLG transform ``E_f^T s E_e``."""
    s = as_signal(s)
    _check_basis(s, B)
    return B.layer.T @ s @ B.entity


def imgft(s_hat, B: SpectralBasis) -> np.ndarray:
    """Inverse MLG transform ``E_f s_hat E_e^T``."""
    s_hat = as_signal(s_hat)
    _check_basis(s_hat, B)
    return B.layer @ s_hat @ B.entity.T
