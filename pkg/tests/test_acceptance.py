"""Acceptance gate: one [PASS]/[FAIL] line per criterion."""
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage
from scipy.linalg import subspace_angles

from conftest import four_cycle, random_mlg
from mlgsp import io
from mlgsp.cli import main
from mlgsp.convolution import WindowSpec, mlg_convolve, smooth_image, window_basis
from mlgsp.graph import build_laplacian
from mlgsp.pipelines.compression import compress_rgb, synthetic_icon
from mlgsp.pipelines.edges import edge_detect_pipeline
from mlgsp.pipelines.metrics import boundary_accuracy, boundary_map
from mlgsp.pipelines.segmentation import kmeans_baseline, planted_cube, segment_hsi
from mlgsp.sampling import SamplingPlan, nested_plans, plan_for_fraction, spectral_sample
from mlgsp.spectra import flattened_eigen, hosvd, hosvd_diagonal_residual, imgft, mgft, orthogonal_cp
from mlgsp.tensor import unfold

from test_sampling import loop_oracle


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
    return emit


def test_criterion_1_decomposition(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = dict(recon=0.0, ortho=0.0, angle=0.0, cp_excess=-np.inf)
    for _ in range(100):
        M, N = int(rng.integers(1, 5)), int(rng.integers(1, 13))
        F = random_mlg(rng, M, N)
        h = hosvd(F)
        nf = np.linalg.norm(F)
        if nf > 0:
            worst["recon"] = max(worst["recon"], np.linalg.norm(h.reconstruct() - F) / nf)
        worst["ortho"] = max(worst["ortho"], h.basis.orthonormality_error())
        for a, b in ((1, 3), (2, 4)):
            Ua = np.linalg.svd(unfold(F, a))[0]
            Ub = np.linalg.svd(unfold(F, b))[0]
            s = np.linalg.svd(unfold(F, a), compute_uv=False)
            # compare subspaces only across gaps in the spectrum
            for r in range(1, Ua.shape[1]):
                if s[r - 1] - s[r] > 1e-6 * max(s[0], 1e-300):
                    worst["angle"] = max(worst["angle"], float(np.max(subspace_angles(Ua[:, :r], Ub[:, :r]))))
        cp = orthogonal_cp(F)
        worst["cp_excess"] = max(worst["cp_excess"], cp.residual - hosvd_diagonal_residual(F))
    elapsed = time.perf_counter() - t0
    ok = (worst["recon"] <= 1e-8 and worst["ortho"] <= 1e-9 and worst["angle"] <= 1e-6
          and worst["cp_excess"] <= 1e-10 and elapsed < 10)
    report(1, ok, f"recon {worst['recon']:.1e}, ortho {worst['ortho']:.1e}, angle {worst['angle']:.1e}, "
                  f"cp-minus-init {worst['cp_excess']:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_transforms(report):
    rng = np.random.default_rng(2)
    worst_parseval = worst_round = 0.0
    for g in range(10):
        F = random_mlg(rng, int(rng.integers(1, 5)), int(rng.integers(2, 9)))
        M, N = F.shape[:2]
        bases = (hosvd(F).basis, orthogonal_cp(F).basis)
        for _ in range(50):
            s = rng.standard_normal((M, N))
            for B in bases:
                sh = mgft(s, B)
                worst_parseval = max(worst_parseval, abs(np.linalg.norm(sh) - np.linalg.norm(s)) / np.linalg.norm(s))
                worst_round = max(worst_round, np.max(np.abs(imgft(sh, B) - s)))
    ev = flattened_eigen(four_cycle()).values
    ev_dev = float(np.max(np.abs(ev - np.array([2.0, 0.0, 0.0, -2.0]))))
    ok = worst_parseval <= 1e-9 and worst_round <= 1e-9 and ev_dev <= 1e-12
    report(2, ok, f"1000 signals: parseval {worst_parseval:.1e}, round trip {worst_round:.1e}; "
                  f"4-cycle eigenvalue deviation {ev_dev:.1e}")
    assert ok


def test_criterion_3_sampling(report):
    rng = np.random.default_rng(3)
    B = hosvd(random_mlg(rng, 4, 6)).basis
    dev = 0.0
    for direction in ("block", "layer", "entity"):
        for ordering in ("energy", "value"):
            for _ in range(10):
                s = rng.standard_normal((4, 6))
                for K in range(0, 25, 3):
                    if direction == "block":
                        P, Q = max(1, K // 6), min(6, K % 6 + 1)
                        plan = SamplingPlan("block", ordering, keep_layers=P, keep_entities=Q)
                        want, _ = loop_oracle(s, B.layer, B.entity, direction, ordering,
                                              B.layer_values, B.entity_values, P=P, Q=Q)
                    else:
                        plan = SamplingPlan(direction, ordering, keep_count=K)
                        want, _ = loop_oracle(s, B.layer, B.entity, direction, ordering,
                                              B.layer_values, B.entity_values, K=K)
                    dev = max(dev, float(np.max(np.abs(spectral_sample(s, B, plan).recovered - want))))
    big = orthogonal_cp(build_laplacian(random_mlg(rng, 3, 256, density=0.02))).basis
    fr = [0.1, 0.25, 0.5, 0.75, 1.0]
    monotone, full = True, 0.0
    for _ in range(50):
        s = rng.standard_normal((3, 256))
        for d in ("block", "layer", "entity"):
            errs = [spectral_sample(s, big, p).error for p in nested_plans(3, 256, fr, d)]
            monotone &= all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
        res = spectral_sample(s, big, plan_for_fraction(3, 256, 1.0))
        full = max(full, res.error / np.linalg.norm(s))
    ok = dev < 1e-12 and monotone and full <= 1e-9
    report(3, ok, f"oracle deviation {dev:.1e}, monotone {monotone}, full-fraction relative error {full:.1e}")
    assert ok


def test_criterion_4_compression(report):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    wins = {0.25: 0, 0.5: 0}
    strict = {0.25: 0, 0.5: 0}
    trials = 20
    for _ in range(trials):
        img = synthetic_icon(rng, size=16)
        ours = compress_rgb(img, "mln-hosvd", list(wins), keep_images=False)
        gft = compress_rgb(img, "gft", list(wins), keep_images=False)
        for f, a, b in zip(ours.fractions, ours.mse, gft.mse):
            # equal up to rounding counts as not worse
            wins[f] += a <= b * (1 + 1e-9)
            strict[f] += a < b * (1 - 1e-9)
    elapsed = time.perf_counter() - t0
    ok = all(w >= 0.7 * trials for w in wins.values()) and elapsed < 60
    report(4, ok, "MLN-HOSVD <= GFT in " + ", ".join(
        f"{wins[f]}/{trials} at {f} ({strict[f]} strict)" for f in wins) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_5_convolution(report):
    rng = np.random.default_rng(5)
    B = window_basis(WindowSpec())
    comm = lin = 0.0
    for _ in range(200):
        x1, x2, y = (rng.standard_normal(B.shape) for _ in range(3))
        a, b = rng.standard_normal(2)
        comm = max(comm, np.max(np.abs(mlg_convolve(x1, y, B) - mlg_convolve(y, x1, B))))
        lin = max(lin, np.max(np.abs(mlg_convolve(a * x1 + b * x2, y, B)
                                     - a * mlg_convolve(x1, y, B) - b * mlg_convolve(x2, y, B))))
    filt = 0.0
    for _ in range(50):
        A = np.triu(rng.uniform(0, 1, (8, 8)) * (rng.random((8, 8)) < 0.5), 1)
        A = A + A.T
        Bs = hosvd((np.diag(A.sum(1)) - A)[None, :, None, :]).basis
        x, y = rng.standard_normal((1, 8)), rng.standard_normal((1, 8))
        V = Bs.entity
        want = V @ np.diag(V.T @ y[0]) @ V.T @ x[0]
        filt = max(filt, np.max(np.abs(mlg_convolve(x, y, Bs)[0] - want)))
    exact = True
    for v in (0.0, 0.2, 0.37, 0.5, 1.0, 0.123456789):
        for variant in ("c1", "c2"):
            once = smooth_image(np.full((9, 9, 3), v), WindowSpec(), variant, normalize=True)
            twice = smooth_image(np.repeat(once[:, :, None], 3, axis=2), WindowSpec(), variant, normalize=True)
            exact &= bool(np.all(once == v) and np.all(twice == once))
    ok = comm <= 1e-12 and lin <= 1e-12 and filt <= 1e-10 and exact
    report(5, ok, f"commutativity {comm:.1e}, linearity {lin:.1e}, filtering form {filt:.1e}, "
                  f"constant smoothing exact {exact}")
    assert ok


def _recall_precision(edges, truth_labels):
    gt = boundary_map(truth_labels)
    near_det = ndimage.binary_dilation(edges, np.ones((3, 3), bool))
    near_gt = ndimage.binary_dilation(gt, np.ones((3, 3), bool))
    recall = float((gt & near_det).sum() / gt.sum())
    precision = float((edges & near_gt).sum() / max(edges.sum(), 1))
    return recall, precision


def test_criterion_6_edges(report):
    n = 48
    step = np.zeros((n, n), int)
    step[:, n // 2:] = 1
    yy, xx = np.mgrid[0:n, 0:n]
    circle = ((yy - n / 2 + 0.5) ** 2 + (xx - n / 2 + 0.5) ** 2 <= (n / 3) ** 2).astype(int)
    colours = np.array([[0.1, 0.2, 0.3], [0.8, 0.6, 0.2]])
    ok, parts = True, []
    for name, labels in (("step", step), ("circle", circle)):
        panel = edge_detect_pipeline(colours[labels])
        for variant in ("MLG-c1", "MLG-c2"):
            r, p = _recall_precision(panel.maps[variant].edges, labels)
            ok &= r >= 0.9 and p == 1.0
            parts.append(f"{name}/{variant[-2:]} recall {r:.3f} within-1px {p:.3f}")
    flat = edge_detect_pipeline(np.full((n, n, 3), 0.4))
    empty = all(not m.edges.any() for m in flat.maps.values())
    ok &= empty
    report(6, ok, "; ".join(parts) + f"; constant image empty {empty}")
    assert ok


def test_criterion_7_segmentation(report):
    cube, truth = planted_cube(np.random.default_rng(0), size=64, bands=20, regions=4)
    a = segment_hsi(cube, M=10, N=100, Q=4, seed=42)
    b = segment_hsi(cube, M=10, N=100, Q=4, seed=42)
    ours = boundary_accuracy(a.labels, truth)
    km = boundary_accuracy(kmeans_baseline(cube, 4, seed=42).labels, truth)
    det = bool(np.array_equal(a.labels, b.labels))
    ok = ours >= 0.95 and ours >= km and det
    report(7, ok, f"M-GSP {ours:.4f} (P={a.P}), k-means {km:.4f}, deterministic {det}")
    assert ok


HSI_TARGETS = {"salinas": 0.9409, "indian_pines": 0.8441, "paviau": 0.9255}


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("MLGSP_HSI_DIR"), reason="set MLGSP_HSI_DIR to run the HSI soft target")
def test_criterion_7_hsi_soft_target(report):
    root = Path(os.environ["MLGSP_HSI_DIR"])
    beats, parts, within = 0, [], True
    for name, target in HSI_TARGETS.items():
        cube = io.load_cube(root / f"{name}.mat")
        truth = io.load_labels(root / f"{name}_gt.mat")
        Q = len(np.unique(truth))
        ours = boundary_accuracy(segment_hsi(cube, Q=Q).labels, truth)
        km = boundary_accuracy(kmeans_baseline(cube, Q).labels, truth)
        within &= abs(ours - target) <= 0.05
        beats += ours > km
        parts.append(f"{name} {ours:.4f} (target {target}, k-means {km:.4f})")
    ok = within and beats >= 2
    report("7-hsi", ok, "; ".join(parts))
    assert ok


def _run_twice(tmp_path, argv):
    trees = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(argv + ["--out", str(out)]) == 0
        trees.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    return trees[0] == trees[1]


def test_criterion_8_determinism(tmp_path, report):
    rng = np.random.default_rng(8)
    io.save_image(tmp_path / "icon.png", synthetic_icon(rng, size=16))
    cube, truth = planted_cube(rng, size=32, bands=10, regions=4)
    np.save(tmp_path / "cube.npy", cube)
    np.save(tmp_path / "truth.npy", truth + 1)
    io.save_tensor(tmp_path / "g.bin", random_mlg(rng, 3, 5))
    commands = {
        "compress": ["compress", "--in", str(tmp_path / "icon.png"), "--save-coefficients"],
        "edges": ["edges", "--in", str(tmp_path / "icon.png")],
        "segment": ["segment", "--in", str(tmp_path / "cube.npy"), "--truth", str(tmp_path / "truth.npy"),
                    "--N", "36"],
        "spectra dump": ["spectra", "dump", "--in", str(tmp_path / "g.bin")],
    }
    same = {name: _run_twice(tmp_path / name.replace(" ", "_"), argv) for name, argv in commands.items()}
    ok = all(same.values())
    report(8, ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))
    assert ok
