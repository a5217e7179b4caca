"""Construct multilayer graphs from images.

* :func:`grid_mlg` - pixel-grid MLG for RGB images (4-neighbour intralayer
  edges, counterpart interlayer edges).
* :func:`cluster_frames_to_layers`, :func:`compute_superpixels` and
  :func:`gaussian_mlg` - the clustered-band / superpixel MLG used for
  hyperspectral segmentation.

Superpixel labels and layer ids are 0-based here; files written by the CLI
document the same convention.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .cluster import kmeans, relabel_by_first_occurrence
from .errors import InvalidParameterError
from .graph import MultilayerGraph, Representation

_FOUR = ndimage.generate_binary_structure(2, 1)


def as_cube(cube) -> np.ndarray:
    cube = np.asarray(cube, dtype=np.float64)
    if cube.ndim == 2:
        cube = cube[:, :, None]
    if cube.ndim != 3 or cube.shape[2] < 1:
        raise InvalidParameterError(f"expected an H x W x B cube, got shape {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise InvalidParameterError("cube contains non-finite values")
    return cube


# --------------------------------------------------------------------------
# grid MLG

def grid_adjacency(rows: int, cols: int) -> np.ndarray:
    """4-neighbour adjacency of a ``rows x cols`` pixel grid (row-major nodes)."""
    N = rows * cols
    A = np.zeros((N, N))
    idx = np.arange(N).reshape(rows, cols)
    for a, b in ((idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])):
        A[a.ravel(), b.ravel()] = 1.0
        A[b.ravel(), a.ravel()] = 1.0
    return A


def grid_mlg(rows: int, cols: int, layers: int,
             representation: Representation = "adjacency") -> MultilayerGraph:
    """Identical 4-neighbour grids in every layer, counterparts linked across layers."""
    if rows < 1 or cols < 1 or layers < 1:
        raise InvalidParameterError(f"grid dimensions must be positive, got {rows}x{cols}x{layers}")
    N = rows * cols
    intra = grid_adjacency(rows, cols)
    A = np.zeros((layers, N, layers, N))
    eye = np.eye(N)
    for a in range(layers):
        for b in range(layers):
            A[a, :, b, :] = intra if a == b else eye
    return MultilayerGraph(A, representation)


# --------------------------------------------------------------------------
# hyperspectral MLG

@dataclass(frozen=True)
class LayerClustering:
    assignment: np.ndarray     # (B,) band -> layer
    layer_signals: np.ndarray  # (M, H, W) mean frame per layer
    history: list

    @property
    def M(self) -> int:
        return self.layer_signals.shape[0]


def cluster_frames_to_layers(cube, M: int, seed: int | None = 0,
                             max_iter: int = 300, tol: float = 1e-6) -> LayerClustering:
    """Group the ``B`` bands into ``M`` layers by k-means on flattened frames."""
    cube = as_cube(cube)
    H, W, B = cube.shape
    if M > B:
        raise InvalidParameterError(f"cannot form {M} layers from {B} bands")
    frames = cube.reshape(H * W, B).T
    if M == B:
        assignment = np.arange(B)
        history = [0.0]
    else:
        res = kmeans(frames, M, seed=seed, max_iter=max_iter, tol=tol)
        assignment = relabel_by_first_occurrence(res.labels)
        history = res.history
    signals = np.stack([cube[:, :, assignment == m].mean(axis=2) for m in range(M)])
    return LayerClustering(assignment, signals, history)


@dataclass(frozen=True)
class SuperpixelMap:
    labels: np.ndarray     # (H, W) ints in 0..N-1
    n_segments: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.n_segments)

    def centroids(self) -> np.ndarray:
        """Centroids ``(y, x)`` divided by ``max(H, W)``."""
        H, W = self.labels.shape
        yy, xx = np.mgrid[0:H, 0:W]
        n = self.sizes()
        cy = np.bincount(self.labels.ravel(), yy.ravel(), self.n_segments) / n
        cx = np.bincount(self.labels.ravel(), xx.ravel(), self.n_segments) / n
        return np.column_stack([cy, cx]) / max(H, W)

    def means(self, image: np.ndarray) -> np.ndarray:
        """Per-superpixel mean of a 2-D image, or of each frame of an ``(M, H, W)`` stack."""
        image = np.asarray(image, dtype=np.float64)
        flat = self.labels.ravel()
        n = self.sizes()
        if image.ndim == 2:
            return np.bincount(flat, image.ravel(), self.n_segments) / n
        return np.stack([np.bincount(flat, f.ravel(), self.n_segments) / n for f in image])


def _grid_shape(H: int, W: int, N: int) -> tuple[int, int]:
    best = None
    for a in range(1, N + 1):
        if N % a:
            continue
        b = N // a
        if a > H or b > W:
            continue
        score = abs(np.log((H / a) / (W / b)))
        if best is None or score < best[0] - 1e-12:
            best = (score, a, b)
    if best is None:
        raise InvalidParameterError(f"cannot tile {N} superpixels on a {H}x{W} image")
    return best[1], best[2]


def _neighbour_labels(labels: np.ndarray, region: np.ndarray) -> np.ndarray:
    ring = ndimage.binary_dilation(region, _FOUR) & ~region
    vals = labels[ring]
    return vals[vals >= 0]


def _enforce_connectivity(labels: np.ndarray, n: int) -> np.ndarray:
    labels = labels.copy()
    for lab in range(n):
        mask = labels == lab
        if not mask.any():
            continue
        comp, k = ndimage.label(mask, _FOUR)
        if k > 1:
            sizes = np.bincount(comp.ravel())[1:]
            keep = int(np.argmax(sizes)) + 1
            labels[mask & (comp != keep)] = -1
    # merge orphans into the largest adjacent superpixel
    while (labels < 0).any():
        comp, k = ndimage.label(labels < 0, _FOUR)
        sizes = np.bincount(labels[labels >= 0], minlength=n)
        progressed = False
        for c in range(1, k + 1):
            region = comp == c
            nb = np.unique(_neighbour_labels(labels, region))
            if nb.size == 0:
                continue
            target = int(nb[np.argmax(sizes[nb])])
            labels[region] = target
            sizes[target] += int(region.sum())
            progressed = True
        if not progressed:
            labels[labels < 0] = 0
    return labels


def _split_largest(labels: np.ndarray, new_label: int) -> None:
    sizes = np.bincount(labels.ravel())
    big = int(np.argmax(sizes))
    ys, xs = np.nonzero(labels == big)
    start = (int(ys[0]), int(xs[0]))
    half = sizes[big] // 2
    H, W = labels.shape
    seen = {start}
    order = []
    q = deque([start])
    while q and len(order) < half:
        y, x = q.popleft()
        order.append((y, x))
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < H and 0 <= nx < W and (ny, nx) not in seen and labels[ny, nx] == big:
                seen.add((ny, nx))
                q.append((ny, nx))
    for y, x in order:
        labels[y, x] = new_label
    # the remainder of `big` may now be split; keep its largest part
    rest, k = ndimage.label(labels == big, _FOUR)
    if k > 1:
        keep = int(np.argmax(np.bincount(rest.ravel())[1:])) + 1
        labels[(rest > 0) & (rest != keep)] = -1
        fixed = _enforce_connectivity(labels, labels.max() + 1)
        labels[...] = fixed


def compute_superpixels(image, n_segments: int, intensity_weight: float = 10.0,
                        n_iter: int = 10) -> SuperpixelMap:
    """SLIC-style superpixels on a 2-D image with exactly ``n_segments`` labels.

    Centers start on a regular grid.  Each iteration assigns every pixel to
    the nearest center within a ``2S`` radius under the distance
    ``((y - cy)/S)^2 + ((x - cx)/S)^2 + (w * (I - cI))^2`` (intensities
    rescaled to [0, 1], ``S = sqrt(H W / n)``), then moves centers to the
    mean of their members.  Afterwards each label keeps only its largest
    4-connected component; the orphans join the largest adjacent
    superpixel, and labels left empty are refilled by halving the largest
    superpixel.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidParameterError("superpixels need a 2-D image")
    H, W = img.shape
    if not 1 <= n_segments <= H * W:
        raise InvalidParameterError(f"n_segments must lie in 1..{H * W}, got {n_segments}")
    lo, hi = img.min(), img.max()
    img = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)

    a, b = _grid_shape(H, W, n_segments)
    cy = (np.arange(a) + 0.5) * H / a - 0.5
    cx = (np.arange(b) + 0.5) * W / b - 0.5
    CY, CX = np.meshgrid(cy, cx, indexing="ij")
    CY, CX = CY.ravel(), CX.ravel()
    CI = img[np.clip(np.rint(CY).astype(int), 0, H - 1), np.clip(np.rint(CX).astype(int), 0, W - 1)]
    centers = np.ascontiguousarray(np.column_stack([CY, CX, CI]))
    S = float(np.sqrt(H * W / n_segments))
    radius = int(np.ceil(2 * S))
    yy, xx = np.mgrid[0:H, 0:W]

    labels = None
    for _ in range(n_iter):
        labels, _ = kernels.slic_assign(img, centers, S, float(intensity_weight), radius)
        flat = labels.ravel()
        ok = flat >= 0
        cnt = np.bincount(flat[ok], minlength=n_segments)
        has = cnt > 0
        for col, vals in enumerate((yy, xx, img)):
            sums = np.bincount(flat[ok], vals.ravel()[ok], n_segments)
            centers[has, col] = sums[has] / cnt[has]
    labels, _ = kernels.slic_assign(img, centers, S, float(intensity_weight), radius)

    labels = _enforce_connectivity(labels, n_segments)
    present = np.unique(labels)
    for missing in sorted(set(range(n_segments)) - set(present.tolist())):
        _split_largest(labels, missing)
    return SuperpixelMap(labels.astype(np.int64), n_segments)


def median_heuristic(d: np.ndarray) -> float:
    d = np.asarray(d, dtype=np.float64).ravel()
    if d.size == 0:
        return 1.0
    med = float(np.median(d))
    return med if med > 0 else 1.0


def superpixel_features(layer_signals: np.ndarray, sp: SuperpixelMap,
                        spatial_weight: float = 1.0) -> np.ndarray:
    """Feature ``[mean intensity, w*cy, w*cx]`` of every (layer, superpixel): shape (M, N, 3)."""
    means = sp.means(layer_signals)                 # (M, N)
    cent = spatial_weight * sp.centroids()          # (N, 2)
    M, N = means.shape
    return np.concatenate([means[:, :, None], np.broadcast_to(cent, (M, N, 2))], axis=2)


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _knn_gaussian(D2: np.ndarray, sigma: float, knn: int | None) -> np.ndarray:
    N = D2.shape[0]
    Wt = np.exp(-D2 / sigma**2)
    np.fill_diagonal(Wt, 0.0)
    if knn is None or knn >= N - 1:
        return Wt
    keep = np.zeros_like(Wt, dtype=bool)
    masked = D2 + np.diag(np.full(N, np.inf))
    nearest = np.argsort(masked, axis=1, kind="stable")[:, :knn]
    keep[np.repeat(np.arange(N), knn), nearest.ravel()] = True
    Wk = np.where(keep, Wt, 0.0)
    return np.maximum(Wk, Wk.T)


def gaussian_mlg(layer_signals, sp: SuperpixelMap, sigma_intra: float | None = None,
                 sigma_inter: float | None = None, knn: int | None = 8,
                 full_interlayer: bool = False,
                 representation: Representation = "adjacency",
                 spatial_weight: float = 0.0) -> MultilayerGraph:
    """Gaussian-similarity MLG over superpixels.

    Entity ``i`` in layer ``a`` carries the feature ``[m[a, i], w*cy_i, w*cx_i]``
    where ``m`` is the layer mean over the superpixel and ``w`` is
    ``spatial_weight`` (0 by default: intensity only).  Intralayer weights
    ``exp(-|f_ai - f_aj|^2 / sigma_intra^2)`` are kept for the ``knn``
    nearest neighbours and symmetrized by max.  Interlayer weights link
    counterparts ``(a, i) - (b, i)`` unless ``full_interlayer`` is set.
    ``None`` sigmas use the median pairwise feature distance.
    """
    if sigma_intra is not None and sigma_intra <= 0 or sigma_inter is not None and sigma_inter <= 0:
        raise InvalidParameterError("Gaussian widths must be positive")
    if spatial_weight < 0:
        raise InvalidParameterError("spatial_weight must be nonnegative")
    feats = superpixel_features(np.asarray(layer_signals, dtype=np.float64), sp, spatial_weight)
    M, N, _ = feats.shape
    iu = np.triu_indices(N, 1)
    intra_d2 = np.stack([_pairwise_sq(feats[a]) for a in range(M)])
    if sigma_intra is None:
        sigma_intra = median_heuristic(np.sqrt(intra_d2[:, iu[0], iu[1]]))

    A = np.zeros((M, N, M, N))
    for a in range(M):
        A[a, :, a, :] = _knn_gaussian(intra_d2[a], sigma_intra, knn)

    if M > 1:
        la, lb = np.triu_indices(M, 1)
        if full_interlayer:
            cross = {}
            for a, b in zip(la, lb):
                diff = feats[a][:, None, :] - feats[b][None, :, :]
                cross[(a, b)] = np.einsum("ijk,ijk->ij", diff, diff)
            if sigma_inter is None:
                sigma_inter = median_heuristic(np.sqrt(np.stack(list(cross.values()))))
            for (a, b), d2 in cross.items():
                w = np.exp(-d2 / sigma_inter**2)
                A[a, :, b, :] = w
                A[b, :, a, :] = w.T
        else:
            diffs = {(a, b): (feats[a, :, 0] - feats[b, :, 0]) ** 2 for a, b in zip(la, lb)}
            if sigma_inter is None:
                sigma_inter = median_heuristic(np.sqrt(np.stack(list(diffs.values()))))
            idx = np.arange(N)
            for (a, b), d2 in diffs.items():
                w = np.exp(-d2 / sigma_inter**2)
                A[a, idx, b, idx] = w
                A[b, idx, a, idx] = w
    return MultilayerGraph(A, representation)
