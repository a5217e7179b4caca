"""Reconstruction and segmentation-boundary metrics."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import ndimage

from ..errors import ShapeError

PSNR_CAP = 999.0


class Distortion(NamedTuple):
    mse: float
    psnr: float


def _same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(orig, recon) -> float:
    a, b = _same_shape(orig, recon)
    return float(np.mean((a - b) ** 2))


def psnr(orig, recon, peak: float = 1.0) -> float:
    """PSNR in dB; identical inputs report :data:`PSNR_CAP`."""
    err = mse(orig, recon)
    if err <= 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(peak * peak / err)))


def metrics(orig, recon, peak: float = 1.0) -> Distortion:
    return Distortion(mse(orig, recon), psnr(orig, recon, peak))


def boundary_map(labels) -> np.ndarray:
    """Pixels with at least one 4-neighbour carrying a different label."""
    L = np.asarray(labels)
    if L.ndim != 2:
        raise ShapeError("label map must be 2-D")
    b = np.zeros(L.shape, dtype=bool)
    dv = L[1:, :] != L[:-1, :]
    dh = L[:, 1:] != L[:, :-1]
    b[1:, :] |= dv
    b[:-1, :] |= dv
    b[:, 1:] |= dh
    b[:, :-1] |= dh
    return b


def _dilate(mask: np.ndarray, tol: int) -> np.ndarray:
    if tol <= 0:
        return mask
    return ndimage.binary_dilation(mask, np.ones((2 * tol + 1, 2 * tol + 1), bool))


def boundary_accuracy(pred, truth, tol: int = 1) -> float:
    """Fraction of pixels whose boundary status agrees between two label maps.

    A pixel agrees if both maps call it non-boundary, or if one map calls
    it boundary and the other has a boundary pixel within ``tol`` pixels
    (Chebyshev distance).  With ``tol=0`` this is plain equality of the two
    boundary maps.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"label maps differ in shape: {pred.shape} vs {truth.shape}")
    bp, bt = boundary_map(pred), boundary_map(truth)
    near_t, near_p = _dilate(bt, tol), _dilate(bp, tol)
    ok = (~bp & ~bt) | (bp & near_t) | (bt & near_p)
    return float(ok.mean())
