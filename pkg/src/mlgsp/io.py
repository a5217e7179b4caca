"""File formats: tensor and signal dumps, edge lists, images, cubes, labels, reports.

Text formats index layers, entities, rows and columns from 1.  Floats are
written with ``repr`` so every value round-trips exactly.
"""
from __future__ import annotations

import csv
import json
import re
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidGraphError, MlgIOError, ShapeError
from .graph import MultilayerGraph
from .sampling import SamplingPlan
from .tensor import as_signal, as_tensor4

TENSOR_MAGIC = b"MLG4"
SIGNAL_MAGIC = b"MLGS"
_HEADER = struct.Struct("<4sII")

# Fixed categorical palette for label maps; label 0 is black, then cycles.
PALETTE = (
    (0, 0, 0), (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207), (174, 199, 232), (255, 187, 120),
    (152, 223, 138), (255, 152, 150), (197, 176, 213), (196, 156, 148),
    (247, 182, 210), (199, 199, 199), (219, 219, 141), (158, 218, 229),
)


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise MlgIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise MlgIOError(f"cannot read {path}: {exc}") from exc


def _fmt(v: float) -> str:
    return repr(float(v))


# ---------------------------------------------------------------- binary dumps

def _pack(magic: bytes, M: int, N: int, values: np.ndarray) -> bytes:
    return _HEADER.pack(magic, M, N) + np.ascontiguousarray(values, dtype="<f8").tobytes()


def _unpack(data: bytes, magic: bytes, count, path) -> tuple[int, int, np.ndarray]:
    if len(data) < _HEADER.size:
        raise MlgIOError(f"{path}: truncated header")
    got, M, N = _HEADER.unpack_from(data)
    if got != magic:
        raise MlgIOError(f"{path}: bad magic {got!r}, expected {magic!r}")
    n = count(M, N)
    body = data[_HEADER.size:]
    if len(body) != 8 * n:
        raise MlgIOError(f"{path}: expected {n} float64 values, found {len(body) / 8:g}")
    return M, N, np.frombuffer(body, dtype="<f8").astype(np.float64)


def tensor_to_bytes(F) -> bytes:
    F = as_tensor4(F)
    M, N = F.shape[:2]
    return _pack(TENSOR_MAGIC, M, N, F)


def tensor_from_bytes(data: bytes, path="<bytes>") -> np.ndarray:
    M, N, v = _unpack(data, TENSOR_MAGIC, lambda M, N: (M * N) ** 2, path)
    return as_tensor4(v.reshape(M, N, M, N))


def save_tensor(path, F) -> None:
    Path(path).write_bytes(tensor_to_bytes(F))


def load_tensor(path) -> np.ndarray:
    return tensor_from_bytes(_read_bytes(path), path)


def save_signal(path, s) -> None:
    s = as_signal(s)
    Path(path).write_bytes(_pack(SIGNAL_MAGIC, *s.shape, s))


def load_signal(path) -> np.ndarray:
    M, N, v = _unpack(_read_bytes(path), SIGNAL_MAGIC, lambda M, N: M * N, path)
    return v.reshape(M, N)


# ---------------------------------------------------------------- edge lists

def save_edge_list(path, G: MultilayerGraph | np.ndarray) -> None:
    """Header ``M N`` then one ``alpha i beta j w`` line per undirected edge."""
    A = G.adjacency if isinstance(G, MultilayerGraph) else as_tensor4(G)
    M, N = A.shape[:2]
    flat = A.reshape(M * N, M * N)
    lines = [f"{M} {N}"]
    for p, q in zip(*np.nonzero(np.triu(flat, 1))):
        a, i = divmod(int(p), N)
        b, j = divmod(int(q), N)
        lines.append(f"{a + 1} {i + 1} {b + 1} {j + 1} {_fmt(flat[p, q])}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path) -> MultilayerGraph:
    """Parse an edge list; each line sets both orientations of its edge."""
    rows = [ln.split("#", 1)[0].split() for ln in _read_text(path).splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 2:
        raise MlgIOError(f"{path}: first line must be 'M N'")
    try:
        M, N = int(rows[0][0]), int(rows[0][1])
    except ValueError as exc:
        raise MlgIOError(f"{path}: bad header {rows[0]}") from exc
    if M < 1 or N < 1:
        raise MlgIOError(f"{path}: M and N must be positive")
    A = np.zeros((M, N, M, N))
    seen = np.zeros(A.shape, dtype=bool)
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != 5:
            raise MlgIOError(f"{path}:{lineno}: expected 'alpha i beta j w'")
        try:
            a, i, b, j = (int(x) - 1 for x in r[:4])
            w = float(r[4])
        except ValueError as exc:
            raise MlgIOError(f"{path}:{lineno}: {exc}") from exc
        if not (0 <= a < M and 0 <= b < M and 0 <= i < N and 0 <= j < N):
            raise MlgIOError(f"{path}:{lineno}: index out of range for M={M}, N={N}")
        for key in ((a, i, b, j), (b, j, a, i)):
            if seen[key] and A[key] != w:
                raise InvalidGraphError(
                    f"{path}:{lineno}: edge ({a + 1},{i + 1})-({b + 1},{j + 1}) given twice with different weights")
            A[key] = w
            seen[key] = True
    return MultilayerGraph(A)


def load_mlg(path) -> MultilayerGraph:
    """Load an adjacency tensor from a binary dump (by magic) or an edge list."""
    data = _read_bytes(path)
    if data[:4] == TENSOR_MAGIC:
        return MultilayerGraph(tensor_from_bytes(data, path))
    return load_edge_list(path)


# ---------------------------------------------------------------- images

def load_image(path) -> np.ndarray:
    """PNG/PPM/PGM as float64 in [0, 1]: ``H x W x 3`` for colour, ``H x W`` for gray."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif im.mode in ("L", "1"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError) as exc:
        raise MlgIOError(f"cannot read image {path}: {exc}") from exc
    return arr


def load_rgb(path) -> np.ndarray:
    img = load_image(path)
    return np.repeat(img[:, :, None], 3, axis=2) if img.ndim == 2 else img


def to_uint8(img) -> np.ndarray:
    return np.round(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(path, img) -> None:
    """Save a [0, 1] gray or RGB array; the format follows the suffix."""
    from PIL import Image

    Image.fromarray(to_uint8(img)).save(path)


def save_mask(path, mask) -> None:
    save_image(path, np.asarray(mask, dtype=bool).astype(np.float64))


def save_label_png(path, labels) -> None:
    """Label map as a palette PNG; label ``k`` gets ``PALETTE[k % len(PALETTE)]``."""
    from PIL import Image

    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ShapeError(f"label map must be 2-D, got shape {labels.shape}")
    if labels.size and labels.min() < 0:
        raise ShapeError("labels must be nonnegative")
    idx = (labels % len(PALETTE)).astype(np.uint8)
    im = Image.frombytes("P", (idx.shape[1], idx.shape[0]), np.ascontiguousarray(idx).tobytes())
    flat = [c for rgb in PALETTE for c in rgb]
    im.putpalette(flat + [0] * (768 - len(flat)))
    im.save(path)


# ---------------------------------------------------------------- cubes

ENVI_DTYPES = {1: "u1", 2: "i2", 3: "i4", 4: "f4", 5: "f8", 12: "u2", 13: "u4", 14: "i8", 15: "u8"}
ENVI_REQUIRED = ("samples", "lines", "bands", "data type")


def parse_envi_header(text: str) -> dict:
    if not text.lstrip().upper().startswith("ENVI"):
        raise MlgIOError("ENVI header must start with 'ENVI'")
    fields = {}
    for m in re.finditer(r"^\s*([^=\n]+?)\s*=\s*(\{[^}]*\}|[^\n]*)", text, flags=re.M):
        fields[m.group(1).strip().lower()] = m.group(2).strip()
    return fields


def _header_int(fields: dict, key: str, default=None) -> int:
    if key not in fields:
        if default is None:
            raise MlgIOError(f"ENVI header missing field '{key}'")
        return default
    try:
        return int(fields[key])
    except ValueError as exc:
        raise MlgIOError(f"ENVI header field '{key}' is not an integer: {fields[key]!r}") from exc


def _envi_data_path(hdr: Path) -> Path:
    stem = hdr.with_suffix("")
    for cand in (stem, *(stem.with_suffix(s) for s in (".img", ".dat", ".raw", ".bin", ".bsq", ".bil", ".bip"))):
        if cand.exists() and cand != hdr:
            return cand
    raise MlgIOError(f"no binary data file found next to {hdr}")


def load_envi(path) -> np.ndarray:
    """Read an ENVI header (``.hdr``) and its flat binary as an ``H x W x B`` float64 cube."""
    path = Path(path)
    hdr = path if path.suffix.lower() == ".hdr" else path.with_suffix(".hdr")
    if not hdr.exists() and path.suffix.lower() != ".hdr":
        hdr = Path(str(path) + ".hdr")
    fields = parse_envi_header(_read_text(hdr))
    for key in ENVI_REQUIRED:
        if key not in fields:
            raise MlgIOError(f"{hdr}: ENVI header missing field '{key}'")
    W, H, B = (_header_int(fields, k) for k in ("samples", "lines", "bands"))
    code = _header_int(fields, "data type")
    if code not in ENVI_DTYPES:
        raise MlgIOError(f"{hdr}: unsupported ENVI data type {code}")
    order = "<" if _header_int(fields, "byte order", 0) == 0 else ">"
    offset = _header_int(fields, "header offset", 0)
    interleave = fields.get("interleave", "bsq").lower()
    data_path = path if path.suffix.lower() != ".hdr" and path.exists() else _envi_data_path(hdr)
    raw = _read_bytes(data_path)[offset:]
    dt = np.dtype(order + ENVI_DTYPES[code])
    if len(raw) != H * W * B * dt.itemsize:
        raise MlgIOError(f"{data_path}: size {len(raw)} does not match {H}x{W}x{B} of {dt}")
    flat = np.frombuffer(raw, dtype=dt).astype(np.float64)
    if interleave == "bsq":
        cube = flat.reshape(B, H, W).transpose(1, 2, 0)
    elif interleave == "bil":
        cube = flat.reshape(H, B, W).transpose(0, 2, 1)
    elif interleave == "bip":
        cube = flat.reshape(H, W, B)
    else:
        raise MlgIOError(f"{hdr}: unknown interleave {interleave!r}")
    return np.ascontiguousarray(cube)


def save_envi(path, cube, dtype: str = "f8") -> Path:
    """Write ``path`` (binary, BSQ, little-endian) and ``path.hdr``; returns the header path."""
    cube = np.asarray(cube)
    if cube.ndim != 3:
        raise ShapeError(f"cube must be H x W x B, got shape {cube.shape}")
    H, W, B = cube.shape
    code = {v: k for k, v in ENVI_DTYPES.items()}[dtype]
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(cube.transpose(2, 0, 1), dtype="<" + dtype).tobytes())
    hdr = Path(str(path) + ".hdr") if path.suffix else path.with_suffix(".hdr")
    hdr.write_text(
        f"ENVI\nsamples = {W}\nlines = {H}\nbands = {B}\nheader offset = 0\n"
        f"file type = ENVI Standard\ndata type = {code}\ninterleave = bsq\nbyte order = 0\n")
    return hdr


def save_cube_csv(path, cube) -> None:
    """One line per pixel: ``row,col,b1,...,bB`` (row-major pixel order)."""
    cube = np.asarray(cube, dtype=np.float64)
    H, W, B = cube.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", *(f"b{k + 1}" for k in range(B))])
        for r in range(H):
            for c in range(W):
                w.writerow([r + 1, c + 1, *(_fmt(v) for v in cube[r, c])])


def load_cube_csv(path) -> np.ndarray:
    rows = list(csv.reader(_read_text(path).splitlines()))
    if not rows or [h.strip().lower() for h in rows[0][:2]] != ["row", "col"] or len(rows[0]) < 3:
        raise MlgIOError(f"{path}: header must be 'row,col,b1,...,bB'")
    B = len(rows[0]) - 2
    try:
        idx = np.array([[int(r[0]), int(r[1])] for r in rows[1:]], dtype=np.int64)
        vals = np.array([[float(v) for v in r[2:]] for r in rows[1:]], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise MlgIOError(f"{path}: {exc}") from exc
    if vals.ndim != 2 or vals.shape[1] != B or idx.size == 0:
        raise MlgIOError(f"{path}: every pixel line needs {B} band values")
    H, W = int(idx[:, 0].max()), int(idx[:, 1].max())
    if idx.min() < 1 or len(idx) != H * W:
        raise MlgIOError(f"{path}: pixels must cover a full {H}x{W} grid exactly once")
    cube = np.full((H, W, B), np.nan)
    cube[idx[:, 0] - 1, idx[:, 1] - 1] = vals
    if np.isnan(cube).any():
        raise MlgIOError(f"{path}: duplicate pixel coordinates")
    return cube


def _largest_array(mat: dict, ndim: int, path, key: str | None):
    if key is not None:
        if key not in mat:
            raise MlgIOError(f"{path}: no variable {key!r}")
        return np.asarray(mat[key])
    cands = [np.asarray(v) for k, v in sorted(mat.items())
             if not k.startswith("__") and np.asarray(v).ndim == ndim]
    if not cands:
        raise MlgIOError(f"{path}: no {ndim}-D array found")
    return max(cands, key=lambda a: a.size)


def _load_mat(path) -> dict:
    from scipy.io import loadmat

    try:
        return loadmat(path)
    except (OSError, ValueError, NotImplementedError) as exc:
        raise MlgIOError(f"cannot read {path}: {exc}") from exc


def load_cube(path, key: str | None = None) -> np.ndarray:
    """Load an ``H x W x B`` cube from ``.hdr``/ENVI, ``.csv``, ``.npy`` or ``.mat``."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        cube = load_cube_csv(path)
    elif suffix == ".npy":
        try:
            cube = np.load(path, allow_pickle=False)
        except (OSError, ValueError) as exc:
            raise MlgIOError(f"cannot read {path}: {exc}") from exc
    elif suffix == ".mat":
        cube = _largest_array(_load_mat(path), 3, path, key)
    else:
        cube = load_envi(path)
    cube = np.asarray(cube, dtype=np.float64)
    if cube.ndim != 3:
        raise MlgIOError(f"{path}: expected an H x W x B cube, got shape {cube.shape}")
    if not np.isfinite(cube).all():
        raise MlgIOError(f"{path}: cube contains non-finite values")
    return cube


def load_labels(path, key: str | None = None) -> np.ndarray:
    """Integer label map from ``.npy``, ``.mat``, ``.csv`` (comma-separated rows) or an image."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        try:
            lab = np.load(path, allow_pickle=False)
        except (OSError, ValueError) as exc:
            raise MlgIOError(f"cannot read {path}: {exc}") from exc
    elif suffix == ".mat":
        lab = _largest_array(_load_mat(path), 2, path, key)
    elif suffix in (".csv", ".txt"):
        try:
            lab = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
        except (OSError, ValueError) as exc:
            raise MlgIOError(f"cannot read {path}: {exc}") from exc
    else:
        from PIL import Image, UnidentifiedImageError

        try:
            with Image.open(path) as im:
                lab = np.asarray(im if im.mode in ("P", "L", "I", "I;16") else im.convert("L"))
        except (OSError, UnidentifiedImageError) as exc:
            raise MlgIOError(f"cannot read {path}: {exc}") from exc
    lab = np.asarray(lab)
    if lab.ndim != 2:
        raise MlgIOError(f"{path}: label map must be 2-D, got shape {lab.shape}")
    return lab.astype(np.int64)


# ---------------------------------------------------------------- reports

def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_matrix_csv(path, header: Sequence[str], X) -> None:
    X = np.atleast_2d(np.asarray(X))
    if not np.issubdtype(X.dtype, np.integer):
        X = X.astype(np.float64)
    write_csv(path, header, X.tolist())


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def save_compressed(path, s_hat: np.ndarray, mask: np.ndarray, basis_kind: str,
                    plan: SamplingPlan) -> None:
    """JSON header line, then ``row,col,value`` for each kept coefficient (1-based).

    ``s_hat`` holds transformed coefficients in their natural layout and
    ``mask`` marks the kept ones.
    """
    s_hat = np.asarray(s_hat, dtype=np.float64)
    M, N = s_hat.shape
    header = {"M": M, "N": N, "basis": basis_kind, "plan": plan.to_dict()}
    lines = [json.dumps(header, sort_keys=True), "row,col,value"]
    lines += [f"{r + 1},{c + 1},{_fmt(s_hat[r, c])}" for r, c in np.argwhere(mask)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_compressed(path) -> tuple[np.ndarray, str, SamplingPlan]:
    """Zero-filled coefficient array, basis kind and plan."""
    lines = _read_text(path).splitlines()
    if len(lines) < 2 or lines[1].strip() != "row,col,value":
        raise MlgIOError(f"{path}: expected a JSON header line and a 'row,col,value' block")
    try:
        header = json.loads(lines[0])
        M, N = int(header["M"]), int(header["N"])
        plan = SamplingPlan.from_dict(header["plan"])
        coeffs = np.zeros((M, N))
        for ln in lines[2:]:
            if ln.strip():
                r, c, v = ln.split(",")
                coeffs[int(r) - 1, int(c) - 1] = float(v)
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MlgIOError(f"{path}: malformed compressed file: {exc}") from exc
    return coeffs, str(header.get("basis", "")), plan
