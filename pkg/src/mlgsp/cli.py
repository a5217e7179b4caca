"""Command-line interface: ``mlgsp {compress,edges,segment,spectra}``.

Exit codes: 0 success, 2 input/output failure, 3 invalid parameters,
4 invalid graph.  Every run writes ``manifest.json`` under ``--out``.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io
from .errors import InvalidGraphError, InvalidParameterError, MlgIOError, ShapeError
from .graph import build_laplacian, require_undirected

EXIT_OK, EXIT_IO, EXIT_PARAM, EXIT_GRAPH = 0, 2, 3, 4
DEFAULT_SEED = 42
DEFAULT_FRACTIONS = (1.0, 0.75, 0.5, 0.25)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("MLG_SEED")
    if env is None or env.strip() == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise InvalidParameterError(f"MLG_SEED must be an integer, got {env!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidParameterError(f"cannot parse number list {text!r}") from exc


def _input_record(path) -> dict:
    data = io._read_bytes(path)
    return {"name": Path(path).name, "sha256": hashlib.sha256(data).hexdigest()}


def _slug(label: str) -> str:
    return label.lower().replace(" ", "-")


def _fraction_tag(f: float) -> str:
    return f"{f:.4f}".rstrip("0").rstrip(".").replace(".", "p")


def _pmap(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _finish(out: Path, command: str, seed: int, config: dict, inputs: list, outputs: list,
            results: dict) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "inputs": inputs,
        "outputs": sorted(outputs + ["manifest.json"]),
        "results": results,
    }
    io.write_json(out / "manifest.json", manifest)


# ---------------------------------------------------------------- compress

def cmd_compress(args, seed: int) -> None:
    from .pipelines.compression import METHODS, compress_rgb, image_to_signal, method_basis
    from .sampling import kept_mask, SamplingPlan
    from .spectra import mgft

    img = io.load_rgb(args.input)
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise InvalidParameterError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    fractions = _float_list(args.fractions)
    if not fractions:
        raise InvalidParameterError("no fractions given")
    for f in fractions:
        if not 0.0 <= f <= 1.0:
            raise InvalidParameterError(f"fraction must lie in [0, 1], got {f}")
    layers = args.layers
    if layers not in ("auto", "all"):
        try:
            layers = int(layers)
        except ValueError as exc:
            raise InvalidParameterError(f"--layers must be auto, all or an integer, got {layers!r}") from exc
    layers = None if layers == "all" else layers

    def run(method):
        return compress_rgb(img, method, fractions, args.direction, args.ordering, layers,
                            keep_images=True, gft_selection=args.gft_selection)

    reports = _pmap(run, methods, args.jobs)
    out, outputs = args.out, ["curves.csv"]
    rows = [r for rep in reports for r in rep.rows()]
    io.write_csv(out / "curves.csv", ("fraction", "method", "mse", "psnr"), rows)
    H, W, C = img.shape
    s = image_to_signal(img)
    for rep in reports:
        for f, rec, plan in zip(rep.fractions, rep.recovered, rep.plans):
            name = f"recovered_{rep.method}_{_fraction_tag(f)}.png"
            io.save_image(out / name, rec)
            outputs.append(name)
            if args.save_coefficients and plan is not None:
                plan = SamplingPlan.from_dict(plan)
                basis = method_basis(rep.method, H, W, C)
                cname = f"coefficients_{rep.method}_{_fraction_tag(f)}.csv"
                io.save_compressed(out / cname, mgft(s, basis), kept_mask(plan, C, H * W),
                                   basis.kind, plan)
                outputs.append(cname)
    config = {
        "methods": methods, "fractions": fractions, "direction": args.direction,
        "ordering": args.ordering, "layers": args.layers, "gft_selection": args.gft_selection,
        "save_coefficients": bool(args.save_coefficients), "jobs": args.jobs,
    }
    results = {rep.method: {"kept": rep.kept, "mse": rep.mse, "psnr": rep.psnr} for rep in reports}
    _finish(out, "compress", seed, config, [_input_record(args.input)], outputs, results)


# ---------------------------------------------------------------- edges

def cmd_edges(args, seed: int) -> None:
    from .convolution import ThresholdPolicy, WindowSpec
    from .pipelines.edges import PANEL_LABELS, edge_detect_pipeline

    img = io.load_rgb(args.input)
    policy = ThresholdPolicy.parse(args.threshold)
    spec = WindowSpec(k=args.k, layers=3, border=args.border)
    panel = edge_detect_pipeline(img, spec, args.kernel, policy)
    out, outputs, results = args.out, [], {}
    for label in PANEL_LABELS:
        res = panel.maps[label]
        name = f"edges_{_slug(label)}.png"
        io.save_mask(out / name, res.edges)
        outputs.append(name)
        results[label] = {"threshold": res.threshold, "edge_pixels": int(res.edges.sum())}
    diff = panel.maps[panel.primary].difference
    io.write_matrix_csv(out / "difference.csv", [f"c{j + 1}" for j in range(diff.shape[1])], diff)
    outputs.append("difference.csv")
    config = {"kernel": args.kernel, "k": args.k, "border": args.border,
              "threshold": str(policy), "primary": panel.primary, "jobs": args.jobs}
    _finish(out, "edges", seed, config, [_input_record(args.input)], outputs, results)


# ---------------------------------------------------------------- segment

def cmd_segment(args, seed: int) -> None:
    from .pipelines.metrics import boundary_accuracy
    from .pipelines.segmentation import gsp_baseline, kmeans_baseline, segment_hsi

    cube = io.load_cube(args.input, key=args.key)
    truth = io.load_labels(args.truth, key=args.truth_key) if args.truth else None
    if truth is not None and truth.shape != cube.shape[:2]:
        raise ShapeError(f"ground truth {truth.shape} does not match cube {cube.shape[:2]}")
    Q = args.Q
    if Q is None:
        if truth is None:
            raise InvalidParameterError("--Q is required when no ground truth is given")
        Q = int(np.unique(truth).size)
    if Q < 1:
        raise InvalidParameterError(f"--Q must be positive, got {Q}")

    if args.knn < 0:
        raise InvalidParameterError(f"--knn must be nonnegative, got {args.knn}")
    knn = args.knn or None

    def run(name):
        if name == "M-GSP":
            return segment_hsi(cube, args.M, args.N, Q, seed, args.sigma_intra, args.sigma_inter,
                               knn, args.full_interlayer)
        if name == "GSP":
            return gsp_baseline(cube, args.M, args.N, Q, seed, knn)
        return kmeans_baseline(cube, Q, seed)

    names = ["k-means", "GSP", "M-GSP"] if args.baselines else ["M-GSP"]
    results = dict(zip(names, _pmap(run, names, args.jobs)))
    out, outputs = args.out, []
    main = results["M-GSP"]
    io.save_label_png(out / "labels.png", main.labels)
    io.save_mask(out / "boundary.png", main.boundary)
    io.write_matrix_csv(out / "labels.csv", [f"c{j + 1}" for j in range(main.labels.shape[1])],
                        main.labels)
    outputs += ["labels.png", "boundary.png", "labels.csv"]
    for name, res in results.items():
        if name != "M-GSP":
            fname = f"labels_{_slug(name)}.png"
            io.save_label_png(out / fname, res.labels)
            outputs.append(fname)
    header = ["method", "P"] + (["boundary_accuracy"] if truth is not None else [])
    rows, summary = [], {}
    for name, res in results.items():
        row = [name, "" if res.P is None else res.P]
        entry = {"P": res.P}
        if truth is not None:
            acc = boundary_accuracy(res.labels, truth, args.tol)
            row.append(acc)
            entry["boundary_accuracy"] = acc
        rows.append(row)
        summary[name] = entry
    io.write_csv(out / "accuracy.csv", header, rows)
    outputs.append("accuracy.csv")
    summary["M-GSP"]["layer_assignment"] = [a + 1 for a in main.info["layer_assignment"]]
    summary["M-GSP"]["entity_singular_values"] = main.info["entity_singular_values"][:20]
    config = {"M": args.M, "N": args.N, "Q": Q, "sigma_intra": args.sigma_intra,
              "sigma_inter": args.sigma_inter, "knn": args.knn,
              "full_interlayer": bool(args.full_interlayer), "tol": args.tol,
              "baselines": bool(args.baselines), "jobs": args.jobs}
    inputs = [_input_record(args.input)] + ([_input_record(args.truth)] if args.truth else [])
    _finish(out, "segment", seed, config, inputs, outputs, summary)


# ---------------------------------------------------------------- spectra dump

def _load_dump_tensor(path, laplacian: bool) -> np.ndarray:
    data = io._read_bytes(path)
    if data[:4] == io.TENSOR_MAGIC:
        F = require_undirected(io.tensor_from_bytes(data, path))
        if laplacian:
            F = build_laplacian(F)
        return F
    G = io.load_edge_list(path)
    return build_laplacian(G) if laplacian else G.adjacency


def cmd_spectra_dump(args, seed: int) -> None:
    from .spectra import flattened_eigen, hosvd, hosvd_diagonal_residual, orthogonal_cp

    F = _load_dump_tensor(args.input, args.laplacian)
    M, N = F.shape[:2]
    hf = hosvd(F)
    cp = orthogonal_cp(F, args.max_iter, args.tol)
    eig = flattened_eigen(F)
    out, b = args.out, hf.basis
    io.write_matrix_csv(out / "layer_basis.csv", [f"f{a + 1}" for a in range(M)], b.layer)
    io.write_matrix_csv(out / "entity_basis.csv", [f"e{i + 1}" for i in range(N)], b.entity)
    io.write_csv(out / "values.csv", ("mode", "index", "value"),
                 [("layer", k + 1, float(v)) for k, v in enumerate(b.layer_values)]
                 + [("entity", k + 1, float(v)) for k, v in enumerate(b.entity_values)])
    io.write_csv(out / "core.csv", ("alpha", "i", "beta", "j", "value"),
                 [(a + 1, i + 1, c + 1, j + 1, float(hf.core[a, i, c, j]))
                  for a, i, c, j in np.ndindex(*hf.core.shape)])
    io.write_csv(out / "eigenvalues.csv", ("index", "eigenvalue"),
                 [(k + 1, float(v)) for k, v in enumerate(eig.values)])
    io.write_matrix_csv(out / "cp_layer_basis.csv", [f"f{a + 1}" for a in range(M)], cp.basis.layer)
    io.write_matrix_csv(out / "cp_entity_basis.csv", [f"e{i + 1}" for i in range(N)], cp.basis.entity)
    io.write_csv(out / "cp_weights.csv", ("alpha", "i", "lambda"),
                 [(a + 1, i + 1, float(cp.weights[a, i])) for a, i in np.ndindex(M, N)])
    report = {
        "hosvd_orthonormality": b.orthonormality_error(),
        "cp_orthonormality": cp.basis.orthonormality_error(),
        "cp_residual": cp.residual,
        "cp_relative_residual": cp.relative_residual,
        "cp_iterations": cp.n_iter,
        "cp_converged": bool(cp.converged),
        "hosvd_diagonal_residual": hosvd_diagonal_residual(F),
    }
    io.write_csv(out / "residuals.csv", ("quantity", "value"),
                 [(k, int(v) if isinstance(v, (bool, int)) else float(v)) for k, v in sorted(report.items())])
    outputs = ["layer_basis.csv", "entity_basis.csv", "values.csv", "core.csv", "eigenvalues.csv",
               "cp_layer_basis.csv", "cp_entity_basis.csv", "cp_weights.csv", "residuals.csv"]
    config = {"representation": "laplacian" if args.laplacian else "as-loaded",
              "M": M, "N": N, "max_iter": args.max_iter, "tol": args.tol}
    _finish(out, "spectra dump", seed, config, [_input_record(args.input)], outputs, report)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlgsp", description="Multilayer-graph signal processing tools.")
    p.add_argument("--version", action="version", version=f"mlgsp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: $MLG_SEED or {DEFAULT_SEED})")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for independent stages")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", parents=[common], help="spectral-sampling compression of an RGB image")
    c.add_argument("--in", dest="input", required=True, help="RGB image (PNG/PPM)")
    c.add_argument("--methods", default="mln-eig,mln-hosvd,gft,gft2")
    c.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    c.add_argument("--direction", choices=("block", "layer", "entity"), default="block")
    c.add_argument("--ordering", choices=("energy", "value"), default="energy")
    c.add_argument("--layers", default="auto", help="kept layers for block plans: auto, all or an integer")
    c.add_argument("--gft-selection", choices=("shared", "per-layer"), default="shared")
    c.add_argument("--save-coefficients", action="store_true",
                   help="write kept coefficients of the MLG-style methods")
    c.set_defaults(func=cmd_compress)

    e = sub.add_parser("edges", parents=[common], help="edge detection by MLG window smoothing")
    e.add_argument("--in", dest="input", required=True, help="RGB image (PNG/PPM)")
    e.add_argument("--kernel", choices=("c1", "c2"), default="c1")
    e.add_argument("--k", type=int, default=3, help="odd window size")
    e.add_argument("--border", choices=("replicate", "reflect", "valid"), default="replicate")
    e.add_argument("--threshold", default="percentile:95", help="fixed:V, percentile:P or otsu")
    e.set_defaults(func=cmd_edges)

    s = sub.add_parser("segment", parents=[common], help="hyperspectral segmentation")
    s.add_argument("--in", dest="input", required=True, help="cube: ENVI .hdr, .csv, .npy or .mat")
    s.add_argument("--key", default=None, help="variable name inside a .mat cube")
    s.add_argument("--truth", default=None, help="ground-truth label map")
    s.add_argument("--truth-key", default=None)
    s.add_argument("--M", type=int, default=10, help="layer clusters")
    s.add_argument("--N", type=int, default=100, help="superpixels")
    s.add_argument("--Q", type=int, default=None, help="segments (default: labels in --truth)")
    s.add_argument("--sigma-intra", type=float, default=None)
    s.add_argument("--sigma-inter", type=float, default=None)
    s.add_argument("--knn", type=int, default=8, help="intralayer neighbours; 0 keeps all")
    s.add_argument("--full-interlayer", action="store_true")
    s.add_argument("--tol", type=int, default=1, help="boundary tolerance in pixels")
    s.add_argument("--no-baselines", dest="baselines", action="store_false")
    s.set_defaults(func=cmd_segment)

    sp = sub.add_parser("spectra", help="spectral bases of a stored MLG")
    ssub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    d = ssub.add_parser("dump", parents=[common], help="write bases, values and residuals as CSV")
    d.add_argument("--in", dest="input", required=True, help="MLG4 tensor dump or edge list")
    d.add_argument("--laplacian", action="store_true", help="decompose the Laplacian of the input")
    d.add_argument("--max-iter", type=int, default=100)
    d.add_argument("--tol", type=float, default=1e-8)
    d.set_defaults(func=cmd_spectra_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARAM
    try:
        if args.jobs < 1:
            raise InvalidParameterError("--jobs must be at least 1")
        seed = resolve_seed(args.seed)
        try:
            args.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise MlgIOError(f"cannot create output directory {args.out}: {exc}") from exc
        args.func(args, seed)
    except MlgIOError as exc:
        print(f"mlgsp: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidGraphError as exc:
        print(f"mlgsp: invalid graph: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except (InvalidParameterError, ShapeError) as exc:
        print(f"mlgsp: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"mlgsp: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
