"""Round a relaxed (Z, y) to an explicit clustering, and reassign noise."""
from dataclasses import dataclass

import numpy as np

from .baseline import LloydConfig, lloyd_result
from .core import NOISE, Clustering, as_array


@dataclass
class RoundingConfig:
    threshold: float = 0.5
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


def noise_set(y, threshold=0.5) -> np.ndarray:
    if y is None:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(np.asarray(y) > threshold)


def round_solution(points, Z, y, k, config: RoundingConfig = None) -> Clustering:
    """Points with y above the threshold become NOISE; the rest are clustered
    by k-means on the rows of Z X (each row estimates its point's centre).

    Surviving rows are not renormalised.
    """
    config = config or RoundingConfig()
    X = as_array(points)
    n = X.shape[0]
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape != (n, n):
        raise ValueError(f"Z has shape {Z.shape}, expected {(n, n)}")
    y = np.zeros(n) if y is None else np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected {(n,)}")

    keep = np.flatnonzero(~(y > config.threshold))
    if keep.size == 0:
        raise ValueError("empty structured set: every point was thresholded to noise")
    if k > keep.size:
        raise ValueError(f"cannot form {k} clusters from {keep.size} surviving points")

    emb = Z[keep] @ X
    res = lloyd_result(emb, LloydConfig(k=k, restarts=config.restarts, seed=config.seed))
    labels = np.full(n, NOISE, dtype=np.int64)
    labels[keep] = res.clustering.labels
    return Clustering(labels, k)


def assign_noise_to_clusters(points, clustering: Clustering) -> Clustering:
    """Move every NOISE point to the structured cluster with the nearest centroid."""
    X = as_array(points)
    lab = clustering.labels.copy()
    present = [p for p in range(clustering.k) if (lab == p).any()]
    if not present:
        raise ValueError("no structured clusters to assign noise to")
    noise = np.flatnonzero(lab == NOISE)
    if noise.size == 0:
        return clustering
    cents = np.stack([X[lab == p].mean(axis=0) for p in present])
    d2 = ((X[noise, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    lab[noise] = np.asarray(present)[d2.argmin(axis=1)]
    return Clustering(lab, clustering.k)


def match_labels(candidate: Clustering, reference: Clustering) -> Clustering:
    """Permute candidate cluster ids to greedily maximise overlap with the reference.

    NOISE stays NOISE. Metrics are permutation invariant; this only makes
    label files comparable by eye.
    """
    c, r = candidate.labels, reference.labels
    if c.shape != r.shape:
        raise ValueError("clusterings label different numbers of points")
    kc, kr = candidate.k, reference.k
    overlap = np.zeros((kc, max(kr, 1)), dtype=np.int64)
    mask = (c != NOISE) & (r != NOISE)
    np.add.at(overlap, (c[mask], r[mask]), 1)
    mapping = {}
    used = set()
    # largest overlaps first, ties by lower ids
    order = sorted(((-overlap[i, j], i, j) for i in range(kc) for j in range(kr)))
    for _, i, j in order:
        if i in mapping or j in used:
            continue
        mapping[i] = j
        used.add(j)
    spare = iter(sorted(set(range(max(kc, kr))) - used))
    for i in range(kc):
        if i not in mapping:
            mapping[i] = next(spare)
    out = np.array([NOISE if v == NOISE else mapping[v] for v in c], dtype=np.int64)
    return Clustering(out, max(kc, kr))
