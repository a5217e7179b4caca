"""Time the compiled core against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mlgsp import kernels
from mlgsp.builders import compute_superpixels
from mlgsp.convolution import WindowSpec, smooth_image


def cases(rng):
    for H, k in ((128, 3), (256, 3), (256, 7)):
        padded = rng.uniform(size=(H + k - 1, H + k - 1, 3))
        w = rng.standard_normal((3, k, k))
        yield f"window_correlate {H}x{H}x3 k={k}", "window_correlate", (padded, w)
    for H, K in ((64, 100), (145, 100)):
        img = rng.uniform(size=(H, H))
        S = np.sqrt(H * H / K)
        g = int(np.sqrt(K))
        c = (np.arange(g) + 0.5) * H / g
        cy, cx = np.meshgrid(c, c, indexing="ij")
        centers = np.column_stack([cy.ravel(), cx.ravel(), rng.uniform(size=g * g)])
        yield f"slic_assign {H}x{H} K={g * g}", "slic_assign", (img, centers, S, 10.0, int(np.ceil(2 * S)))


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}")
    if kernels.compiled is None:
        print("compiled core unavailable; only the fallback is timed")
    print(f"{'kernel':34s} {'fallback ms':>12s} {'compiled ms':>12s} {'speedup':>8s}")
    for label, name, a in cases(rng):
        tf = best(getattr(kernels.fallback, name), a, args.repeat)
        if kernels.compiled is None:
            print(f"{label:34s} {tf * 1e3:12.2f} {'-':>12s} {'-':>8s}")
            continue
        tc = best(getattr(kernels.compiled, name), a, args.repeat)
        print(f"{label:34s} {tf * 1e3:12.2f} {tc * 1e3:12.2f} {tf / tc:7.1f}x")
    img = rng.uniform(size=(256, 256, 3))
    t = best(lambda: smooth_image(img, WindowSpec(), "c1", normalize=True), (), args.repeat)
    print(f"{'smooth_image 256x256 (active)':34s} {t * 1e3:12.2f}")
    t = best(lambda: compute_superpixels(img[:, :, 0], 100), (), max(1, args.repeat // 2))
    print(f"{'compute_superpixels 256x256 N=100':34s} {t * 1e3:12.2f}")


if __name__ == "__main__":
    main()
