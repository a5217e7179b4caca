"""Pure numpy versions of the compiled inner loops in ``_core.pyx``."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def window_correlate(padded: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``out[y, x] = sum_{c,u,v} weights[c, u, v] * padded[y + u, x + v, c]``."""
    padded = np.ascontiguousarray(padded, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    C, k, kw = weights.shape
    if padded.shape[2] != C:
        raise ValueError("channel count of image and weights differ")
    if padded.shape[0] < k or padded.shape[1] < kw:
        raise ValueError("image smaller than window")
    win = sliding_window_view(padded, (k, kw), axis=(0, 1))  # (H, W, C, k, kw)
    return np.einsum("yxcuv,cuv->yx", win, weights)


def slic_assign(image: np.ndarray, centers: np.ndarray, S: float,
                intensity_weight: float, radius: int):
    """Assign pixels to the nearest center inside a ``(2*radius+1)`` square window.

    Centers are visited in order and a pixel only moves on a strictly
    smaller distance, so ties go to the lowest center index.
    """
    image = np.asarray(image, dtype=np.float64)
    H, W = image.shape
    labels = np.full((H, W), -1, dtype=np.int64)
    dist = np.full((H, W), np.inf)
    for n, (cy, cx, ci) in enumerate(np.asarray(centers, dtype=np.float64)):
        fy, fx = int(np.floor(cy)), int(np.floor(cx))
        y0, y1 = max(fy - radius, 0), min(fy + radius + 1, H)
        x0, x1 = max(fx - radius, 0), min(fx + radius + 1, W)
        if y0 >= y1 or x0 >= x1:
            continue
        dy = (np.arange(y0, y1) - cy) / S
        dx = (np.arange(x0, x1) - cx) / S
        di = (image[y0:y1, x0:x1] - ci) * intensity_weight
        d = dy[:, None] ** 2 + dx[None, :] ** 2 + di * di
        sub = dist[y0:y1, x0:x1]
        better = d < sub
        sub[better] = d[better]
        labels[y0:y1, x0:x1][better] = n
    return labels, dist
