"""MLG spectral convolution, localization kernels, window smoothing and edges.

Window conventions: a ``k x k`` window over a ``C``-channel image is an MLG
signal of shape ``(C, k*k)``; node ``n = u*k + v`` is window row ``u`` and
column ``v`` (row-major), and layers follow the channel order (R, G, B).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np

from . import kernels
from .builders import grid_mlg
from .errors import InvalidParameterError, ShapeError
from .spectra import SpectralBasis, hosvd, imgft, mgft
from .tensor import as_signal

Variant = Literal["c1", "c2"]
Border = Literal["replicate", "reflect", "valid"]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
DIFF_FLOOR = 1e-12  # differences below this are treated as exact zeros


def mlg_convolve(x, y, basis: SpectralBasis) -> np.ndarray:
    """``x * y = imgft(mgft(x) . mgft(y))`` with ``.`` the Hadamard product."""
    x = as_signal(x, basis.shape)
    y = as_signal(y, basis.shape)
    return imgft(mgft(x, basis) * mgft(y, basis), basis)


@dataclass(frozen=True)
class WindowSpec:
    k: int = 3
    layers: int = 3
    stride: int = 1
    border: Border = "replicate"

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise InvalidParameterError(f"window size must be odd and positive, got {self.k}")
        if self.layers < 1 or self.stride < 1:
            raise InvalidParameterError("layers and stride must be positive")
        if self.border not in ("replicate", "reflect", "valid"):
            raise InvalidParameterError(f"unknown border policy {self.border!r}")

    @property
    def nodes(self) -> int:
        return self.k * self.k

    @property
    def center(self) -> int:
        return self.nodes // 2


@dataclass(frozen=True)
class Kernel:
    values: np.ndarray                      # (layers, k*k) indicator
    active: tuple[tuple[int, int], ...]     # (layer, node) pairs set to 1


def make_localization_kernel(spec: WindowSpec, variant: Variant = "c1") -> Kernel:
    """Indicator kernel focused on the window centre.

    ``c1`` marks the centre node of the middle layer, ``c2`` the centre
    node of every layer.
    """
    if variant == "c1":
        active = ((spec.layers // 2, spec.center),)
    elif variant == "c2":
        active = tuple((a, spec.center) for a in range(spec.layers))
    else:
        raise InvalidParameterError(f"unknown kernel variant {variant!r}")
    values = np.zeros((spec.layers, spec.nodes))
    for a, n in active:
        values[a, n] = 1.0
    return Kernel(values, active)


@lru_cache(maxsize=16)
def _window_basis(k: int, layers: int) -> SpectralBasis:
    return hosvd(grid_mlg(k, k, layers, "laplacian").tensor).basis


def window_basis(spec: WindowSpec) -> SpectralBasis:
    """HOSVD basis of the window MLG (Laplacian of a ``layers x k x k`` grid)."""
    return _window_basis(spec.k, spec.layers)


def window_weights(kernel: Kernel, basis: SpectralBasis) -> np.ndarray:
    """Stencil ``w`` with ``mean(mlg_convolve(x, kernel)) == sum(w * x)``.

    The window mean is ``1^T E_f (x_hat . c_hat) E_e^T 1 / (L K)``, which is
    linear in ``x``; collecting terms gives ``w = E_f (a b^T . c_hat) E_e^T
    / (L K)`` with ``a = E_f^T 1`` and ``b = E_e^T 1``.
    """
    L, K = basis.shape
    c_hat = mgft(kernel.values, basis)
    a = basis.layer.T @ np.ones(L)
    b = basis.entity.T @ np.ones(K)
    return imgft(np.outer(a, b) * c_hat, basis) / (L * K)


def _pad(img: np.ndarray, r: int, border: Border) -> np.ndarray:
    if border == "valid" or r == 0:
        return img
    mode = "edge" if border == "replicate" else "reflect"
    return np.pad(img, ((r, r), (r, r), (0, 0)), mode=mode)


def _as_image(img, layers: int) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] != layers:
        raise ShapeError(f"expected an image with {layers} channels, got shape {img.shape}")
    return img


def smooth_image(img, spec: WindowSpec = WindowSpec(), variant: Variant = "c1",
                 basis: SpectralBasis | None = None, method: str = "fast",
                 normalize: bool = False) -> np.ndarray:
    """Locally enhanced, blurred single-channel image.

    Every window's signal is convolved with the localization kernel and the
    window centre is replaced by the mean of the ``layers * k*k`` outputs.
    ``img`` holds intensities in [0, 1] with ``spec.layers`` channels.
    ``method="direct"`` evaluates each window literally; ``"fast"`` applies
    the equivalent :func:`window_weights` stencil through the compiled core.
    With ``normalize`` the result is divided by the stencil's DC gain so a
    constant image maps to itself.
    """
    img = _as_image(img, spec.layers)
    H, W, _ = img.shape
    if H < spec.k or W < spec.k:
        raise ShapeError(f"image {H}x{W} is smaller than the {spec.k}x{spec.k} window")
    basis = basis if basis is not None else window_basis(spec)
    if basis.shape != (spec.layers, spec.nodes):
        raise ShapeError(f"window basis shape {basis.shape} does not match window {spec}")
    kernel = make_localization_kernel(spec, variant)
    w = window_weights(kernel, basis)
    padded = np.ascontiguousarray(_pad(img, spec.k // 2, spec.border))
    shift = 0.0
    if normalize:
        gain = float(w.sum())
        if abs(gain) < 1e-15:
            raise InvalidParameterError("kernel has zero DC gain; cannot normalize")
        # filter deviations from one sample so constant input comes back bit-exact
        shift = float(padded[0, 0, 0])
        padded = padded - shift

    if method == "fast":
        stencil = np.ascontiguousarray(w.reshape(spec.layers, spec.k, spec.k))
        out = kernels.window_correlate(padded, stencil)
    elif method == "direct":
        k = spec.k
        Ho, Wo = padded.shape[0] - k + 1, padded.shape[1] - k + 1
        out = np.empty((Ho, Wo))
        for y in range(Ho):
            for x in range(Wo):
                sig = padded[y:y + k, x:x + k, :].reshape(k * k, spec.layers).T
                out[y, x] = mlg_convolve(sig, kernel.values, basis).mean()
    else:
        raise InvalidParameterError(f"unknown smoothing method {method!r}")

    if normalize:
        out = out / gain + shift
    if spec.stride > 1:
        out = out[:: spec.stride, :: spec.stride]
    return out


def luma(img) -> np.ndarray:
    """BT.601 luma of an RGB image; single-channel input is returned as is."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 1:
        return img[:, :, 0]
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"expected an RGB image, got shape {img.shape}")
    return img @ LUMA_WEIGHTS


def otsu_threshold(values) -> float:
    """Otsu's threshold over a 256-bin histogram of ``values``."""
    v = np.asarray(values, dtype=np.float64).ravel()
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return hi
    hist, edges = np.histogram(v, bins=256, range=(lo, hi))
    mids = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(hist)
    w1 = w0[-1] - w0
    m0 = np.cumsum(hist * mids)
    mu0 = m0 / np.maximum(w0, 1)
    mu1 = (m0[-1] - m0) / np.maximum(w1, 1)
    between = w0 * w1 * (mu0 - mu1) ** 2
    b = between[:-1]
    # a flat maximum spans an empty gap; take its midpoint
    top = np.flatnonzero(b >= b.max() * (1 - 1e-12))
    return float(0.5 * (edges[top[0] + 1] + edges[top[-1] + 1]))


class ThresholdPolicy(NamedTuple):
    kind: str          # "fixed" | "percentile" | "otsu"
    value: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "ThresholdPolicy":
        """Parse ``fixed:0.1``, ``percentile:95`` or ``otsu``."""
        kind, _, val = str(text).partition(":")
        kind = kind.strip().lower()
        if kind == "otsu" and not val:
            return cls("otsu")
        if kind in ("fixed", "percentile") and val:
            v = float(val)
            if kind == "percentile" and not 0 <= v <= 100:
                raise InvalidParameterError(f"percentile must lie in [0, 100], got {v}")
            if kind == "fixed" and v < 0:
                raise InvalidParameterError("fixed threshold must be nonnegative")
            return cls(kind, v)
        raise InvalidParameterError(f"cannot parse threshold policy {text!r}")

    def resolve(self, d: np.ndarray) -> float:
        """Threshold for ``d``; an edge is ``d > threshold``.

        A percentile or Otsu threshold that lands on a positive ``max(d)``
        would mark nothing, so it drops to the next lower value of ``d``.
        """
        if self.kind == "fixed":
            return self.value
        d = np.asarray(d, dtype=np.float64)
        t = float(np.percentile(d, self.value)) if self.kind == "percentile" else otsu_threshold(d)
        top = float(d.max()) if d.size else 0.0
        if top > 0 and t >= top:
            below = d[d < top]
            t = float(below.max()) if below.size else 0.0
        return t

    def __str__(self) -> str:
        return "otsu" if self.kind == "otsu" else f"{self.kind}:{self.value:g}"


DEFAULT_THRESHOLD = ThresholdPolicy("percentile", 95.0)


class EdgeResult(NamedTuple):
    edges: np.ndarray      # bool (H, W)
    difference: np.ndarray
    threshold: float


def threshold_map(d: np.ndarray, policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgeResult:
    d = np.where(np.abs(d) < DIFF_FLOOR, 0.0, d)
    t = policy.resolve(d)
    return EdgeResult(d > t, d, t)


def detect_edges(img, smoothed, policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgeResult:
    """Mark pixels where ``|luma(img) - smoothed|`` exceeds the policy threshold."""
    gray = luma(img)
    smoothed = np.asarray(smoothed, dtype=np.float64)
    if gray.shape != smoothed.shape:
        raise ShapeError(f"image {gray.shape} and smoothed image {smoothed.shape} differ in size")
    return threshold_map(np.abs(gray - smoothed), policy)
