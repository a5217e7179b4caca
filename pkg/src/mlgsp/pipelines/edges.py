"""Edge detection by MLG window smoothing, with GSP and classic comparators."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import ndimage

from ..convolution import (
    DEFAULT_THRESHOLD,
    EdgeResult,
    ThresholdPolicy,
    WindowSpec,
    detect_edges,
    luma,
    smooth_image,
    threshold_map,
)
from ..errors import ShapeError

PANEL_LABELS = ("MLG-c1", "MLG-c2", "GSP", "Sobel", "Prewitt")


class EdgePanel(NamedTuple):
    maps: dict          # label -> EdgeResult, ordered as PANEL_LABELS
    primary: str        # label of the requested MLG variant


def gradient_edges(gray: np.ndarray, operator: str,
                   policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgeResult:
    """Thresholded gradient magnitude of a 3x3 Sobel or Prewitt operator."""
    op = {"sobel": ndimage.sobel, "prewitt": ndimage.prewitt}[operator]
    gy = op(gray, axis=0, mode="nearest")
    gx = op(gray, axis=1, mode="nearest")
    return threshold_map(np.hypot(gx, gy), policy)


def mlg_edges(img, spec: WindowSpec, variant: str,
              policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgeResult:
    smoothed = smooth_image(img, spec, variant, normalize=True)
    return detect_edges(img, smoothed, policy)


def gsp_edges(img, k: int = 3, policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgeResult:
    """Single-layer counterpart: same window procedure on luma over a k x k grid graph."""
    gray = luma(img)
    spec = WindowSpec(k=k, layers=1)
    smoothed = smooth_image(gray, spec, "c1", normalize=True)
    return threshold_map(np.abs(gray - smoothed), policy)


def edge_detect_pipeline(img, spec: WindowSpec = WindowSpec(), variant: str = "c1",
                         policy: ThresholdPolicy = DEFAULT_THRESHOLD) -> EdgePanel:
    """Run MLG-c1, MLG-c2, GSP, Sobel and Prewitt detectors on an RGB image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"edge detection expects an RGB image, got shape {img.shape}")
    mlg_spec = WindowSpec(k=spec.k, layers=3, stride=1, border=spec.border)
    gray = luma(img)
    maps = {
        "MLG-c1": mlg_edges(img, mlg_spec, "c1", policy),
        "MLG-c2": mlg_edges(img, mlg_spec, "c2", policy),
        "GSP": gsp_edges(img, spec.k, policy),
        "Sobel": gradient_edges(gray, "sobel", policy),
        "Prewitt": gradient_edges(gray, "prewitt", policy),
    }
    return EdgePanel(maps, "MLG-" + variant)
