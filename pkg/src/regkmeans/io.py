"""File formats: points/labels CSV, JSON reports, IDX (read-only) and P5 heatmaps."""
import csv
import json
import math
import os
import struct

import numpy as np

from .core import NOISE, Clustering, PointSet

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def _fmt(v):
    return repr(float(v))


def write_points_csv(path, points):
    X = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in X:
            w.writerow([_fmt(v) for v in row])


def read_points_csv(path, skip_header=False) -> PointSet:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if skip_header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if skip_header else 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field ({exc})") from None
    if not rows:
        raise ValueError(f"{path}: no points")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError(f"{path}: rows have differing numbers of columns {sorted(width)}")
    return PointSet(np.asarray(rows))


def write_labels_csv(path, clustering: Clustering):
    with open(path, "w", newline="") as fh:
        for v in clustering.labels:
            fh.write("noise\n" if v == NOISE else f"{int(v) + 1}\n")


def read_labels_csv(path, k=None) -> Clustering:
    """Labels 1..k or "noise", one per line. k defaults to the largest label seen."""
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip().split(",")[0].strip()
            if not tok:
                continue
            if tok.lower() == "noise":
                labels.append(NOISE)
                continue
            try:
                v = int(tok)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: label must be a positive integer or 'noise', got {tok!r}") from None
            if v < 1:
                raise ValueError(f"{path}:{lineno}: labels start at 1, got {v}")
            labels.append(v - 1)
    lab = np.asarray(labels, dtype=np.int64)
    if k is None:
        k = int(lab.max()) + 1 if (lab != NOISE).any() else 0
    return Clustering(lab, k)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps_json(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def parse_float(s) -> float:
    """Float parser that also accepts inf / infinity."""
    if isinstance(s, (int, float)):
        return float(s)
    t = str(s).strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    return float(t)


def _read_idx(path, magic):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise ValueError(f"{path}: truncated IDX header")
    got = struct.unpack(">I", data[:4])[0]
    if got != magic:
        raise ValueError(f"{path}: bad IDX magic 0x{got:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    head = 4 + 4 * ndim
    if len(data) < head:
        raise ValueError(f"{path}: truncated IDX header")
    dims = struct.unpack(">" + "I" * ndim, data[4:head])
    size = int(np.prod(dims, dtype=np.int64))
    if len(data) - head < size:
        raise ValueError(f"{path}: truncated IDX payload ({len(data) - head} of {size} bytes)")
    arr = np.frombuffer(data, dtype=np.uint8, count=size, offset=head)
    return arr.reshape(dims)


def load_idx(path) -> PointSet:
    """IDX ubyte images, flattened to rows and scaled to [0, 1]."""
    arr = _read_idx(path, IDX_IMAGES_MAGIC)
    n = arr.shape[0]
    d = int(np.prod(arr.shape[1:]))
    return PointSet(arr.reshape(n, d).astype(np.float64) / 255.0)


def load_idx_labels(path) -> np.ndarray:
    return _read_idx(path, IDX_LABELS_MAGIC).astype(np.int64)


def write_pgm(path, grid, cell=16):
    """Grayscale P5 heatmap: value 1.0 maps to 255 (white). Each cell is cell x cell pixels."""
    g = np.asarray(grid, dtype=np.float64)
    g = np.where(np.isfinite(g), g, 0.0)
    px = np.clip(np.rint(g * 255.0), 0, 255).astype(np.uint8)
    px = np.kron(px, np.ones((cell, cell), dtype=np.uint8))
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(px.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a P5 image")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


BUNDLE_FILE = "instance.json"


def save_bundle(directory, inst, extra=None):
    """Write points.csv, labels.csv (planted) and instance.json into directory."""
    from .synth import config_dict

    os.makedirs(directory, exist_ok=True)
    write_points_csv(os.path.join(directory, "points.csv"), inst.points)
    write_labels_csv(os.path.join(directory, "labels.csv"), inst.planted_labels())
    st = inst.stats()
    doc = {
        "config": config_dict(inst.config, inst.noise),
        "points": "points.csv",
        "labels": "labels.csv",
        "truth": inst.truth.to_dict(),
        "stats": {"n_min": st.n_min, "rho": st.rho, "theta": st.theta, "sigma_max_sq": st.sigma_max_sq,
                  "n_points": inst.points.n_points, "dim": inst.points.dim},
        "audit": "passed",
    }
    if extra:
        doc.update(extra)
    write_json(os.path.join(directory, BUNDLE_FILE), doc)
    return doc


def load_bundle(path):
    """Inverse of save_bundle; path is the bundle directory or its JSON file."""
    from .synth import BallModelConfig, GroundTruth, Instance, NoiseConfig

    if os.path.isdir(path):
        path = os.path.join(path, BUNDLE_FILE)
    doc = read_json(path)
    try:
        base = os.path.dirname(path)
        points = read_points_csv(os.path.join(base, doc["points"]))
        cfg = BallModelConfig(**doc["config"]["ball"])
        noise = NoiseConfig(**doc["config"]["noise"])
        truth = GroundTruth.from_dict(doc["truth"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed instance bundle ({exc})") from None
    return Instance(points, truth, cfg, noise)
