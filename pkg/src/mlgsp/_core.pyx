# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics mirror :mod:`mlgsp._fallback` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def window_correlate(double[:, :, ::1] padded, double[:, :, ::1] weights):
    cdef Py_ssize_t C = weights.shape[0], k = weights.shape[1], kw = weights.shape[2]
    cdef Py_ssize_t H = padded.shape[0] - k + 1, W = padded.shape[1] - kw + 1
    if padded.shape[2] != C:
        raise ValueError("channel count of image and weights differ")
    if H <= 0 or W <= 0:
        raise ValueError("image smaller than window")
    out_arr = np.zeros((H, W), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t y, x, c, u, v
    cdef double acc
    with nogil:
        for y in range(H):
            for x in range(W):
                acc = 0.0
                for c in range(C):
                    for u in range(k):
                        for v in range(kw):
                            acc = acc + weights[c, u, v] * padded[y + u, x + v, c]
                out[y, x] = acc
    return out_arr


def slic_assign(double[:, ::1] image, double[:, ::1] centers, double S,
                double intensity_weight, Py_ssize_t radius):
    cdef Py_ssize_t H = image.shape[0], W = image.shape[1], K = centers.shape[0]
    labels_arr = np.full((H, W), -1, dtype=np.int64)
    dist_arr = np.full((H, W), np.inf, dtype=np.float64)
    cdef long long[:, ::1] labels = labels_arr
    cdef double[:, ::1] dist = dist_arr
    cdef Py_ssize_t n, y, x, y0, y1, x0, x1
    cdef double cy, cx, ci, dy, dx, di, d
    with nogil:
        for n in range(K):
            cy = centers[n, 0]
            cx = centers[n, 1]
            ci = centers[n, 2]
            y0 = <Py_ssize_t>floor(cy) - radius
            y1 = <Py_ssize_t>floor(cy) + radius + 1
            x0 = <Py_ssize_t>floor(cx) - radius
            x1 = <Py_ssize_t>floor(cx) + radius + 1
            if y0 < 0:
                y0 = 0
            if x0 < 0:
                x0 = 0
            if y1 > H:
                y1 = H
            if x1 > W:
                x1 = W
            for y in range(y0, y1):
                dy = (y - cy) / S
                for x in range(x0, x1):
                    dx = (x - cx) / S
                    di = (image[y, x] - ci) * intensity_weight
                    d = dy * dy + dx * dx + di * di
                    if d < dist[y, x]:
                        dist[y, x] = d
                        labels[y, x] = n
    return labels_arr, dist_arr
