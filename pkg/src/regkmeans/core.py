"""Data model, distances, regularised k-means costs and clustering metrics."""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

NOISE = -1
EXACT_TOL = 1e-9
SOLVER_TOL = 1e-6


@dataclass(frozen=True)
class PointSet:
    """N points in R^d, stored as a read-only float array."""

    points: np.ndarray

    def __post_init__(self):
        X = np.array(self.points, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValueError(f"points must be an N x d array with d >= 1, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("points contain non-finite coordinates")
        X.setflags(write=False)
        object.__setattr__(self, "points", X)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n_points


@dataclass(frozen=True)
class Clustering:
    """Labels in {0..k-1} for structured clusters, ``NOISE`` (-1) for the noise cluster.

    Serialised forms use 1..k and the string "noise".
    """

    labels: np.ndarray
    k: int

    def __post_init__(self):
        lab = np.array(self.labels, dtype=np.int64).ravel()
        k = int(self.k)
        if k < 0:
            raise ValueError("k must be nonnegative")
        bad = (lab != NOISE) & ((lab < 0) | (lab >= k))
        if bad.any():
            raise ValueError(f"labels must lie in 0..{k - 1} or NOISE; offending value {lab[bad][0]}")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "k", k)

    @property
    def n_points(self) -> int:
        return self.labels.shape[0]

    @property
    def noise_mask(self) -> np.ndarray:
        return self.labels == NOISE

    def members(self, p) -> np.ndarray:
        return np.flatnonzero(self.labels == p)

    def cluster_sizes(self) -> np.ndarray:
        lab = self.labels[self.labels != NOISE]
        return np.bincount(lab, minlength=self.k)


@dataclass(frozen=True)
class PairMetrics:
    precision: float
    recall: float
    f1: float


def as_array(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    return PointSet(points).points


def squared_distance_matrix(points) -> np.ndarray:
    X = as_array(points)
    D = cdist(X, X, "sqeuclidean")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)


def min_pairwise_sq_distance(points) -> float:
    """m(X): smallest squared distance between two distinct indices."""
    X = as_array(points)
    if X.shape[0] < 2:
        raise ValueError("minimum pairwise distance needs at least two points")
    D = squared_distance_matrix(X)
    iu = np.triu_indices(X.shape[0], 1)
    return float(D[iu].min())


def within_cluster_sse(points, member_indices, verify=True) -> float:
    """Sum of squared distances of the members to their centroid.

    With ``verify`` the pairwise form sum_{x,y} |x-y|^2 / (2|C|) is computed as
    well and must agree to 1e-9 (relative to the magnitude of the value).
    """
    X = as_array(points)
    idx = np.asarray(member_indices, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ValueError("within-cluster SSE of an empty member set is undefined")
    S = X[idx]
    sse = float(((S - S.mean(axis=0)) ** 2).sum())
    if verify and idx.size <= 4000:
        pairwise = float(cdist(S, S, "sqeuclidean").sum()) / (2.0 * idx.size)
        if abs(sse - pairwise) > EXACT_TOL * max(1.0, abs(sse), abs(pairwise)):
            raise ArithmeticError(f"centroid SSE {sse!r} disagrees with pairwise SSE {pairwise!r}")
    return sse


def cluster_sse(points, clustering: Clustering) -> float:
    X = as_array(points)
    total = 0.0
    for p in range(clustering.k):
        idx = clustering.members(p)
        if idx.size:
            total += within_cluster_sse(X, idx, verify=False)
    return total


def regularised_cost(points, clustering: Clustering, lam: float) -> float:
    """Sum of structured-cluster SSE plus lam per noise point."""
    X = as_array(points)
    if clustering.n_points != X.shape[0]:
        raise ValueError("clustering and point set disagree on N")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    n_noise = int(clustering.noise_mask.sum())
    penalty = 0.0 if n_noise == 0 else lam * n_noise
    return cluster_sse(X, clustering) + penalty


def _pair_counts(a, b):
    """(pairs together in a, pairs together in b, pairs together in both)."""
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def c2(v):
        return int((v * (v - 1) // 2).sum())

    return c2(table.sum(axis=1)), c2(table.sum(axis=0)), c2(table)


def _labels(c):
    return c.labels if isinstance(c, Clustering) else np.asarray(c, dtype=np.int64)


def clustering_distance(a, b) -> float:
    """Fraction of point pairs co-clustered in exactly one of a, b.

    NOISE counts as an ordinary cluster here.
    """
    la, lb = _labels(a), _labels(b)
    if la.shape != lb.shape:
        raise ValueError("clusterings label different numbers of points")
    n = la.shape[0]
    if n < 2:
        return 0.0
    pa, pb, both = _pair_counts(la, lb)
    return (pa + pb - 2 * both) / (n * (n - 1) // 2)


def restrict(c: Clustering, subset_indices) -> Clustering:
    idx = np.asarray(subset_indices, dtype=np.int64).ravel()
    n = c.n_points
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError("subset index out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("subset indices must be distinct")
    return Clustering(c.labels[idx], c.k)


def gamma_robustness(full_result: Clustering, clean_result: Clustering, clean_indices) -> float:
    sub = restrict(full_result, clean_indices)
    if sub.n_points != clean_result.n_points:
        raise ValueError("clean result must label exactly the clean subset")
    return clustering_distance(sub, clean_result)


def pair_metrics(candidate, reference) -> PairMetrics:
    """Pair-counting precision, recall and f1.

    Precision is 1 when the candidate co-clusters no pair, recall is 1 when
    the reference co-clusters no pair. Noise must be reassigned first.
    """
    lc, lr = _labels(candidate), _labels(reference)
    if lc.shape != lr.shape:
        raise ValueError("clusterings label different numbers of points")
    if (lc == NOISE).any() or (lr == NOISE).any():
        raise ValueError("reassign noise points before computing pair metrics")
    pc, pr, both = _pair_counts(lc, lr)
    precision = 1.0 if pc == 0 else both / pc
    recall = 1.0 if pr == 0 else both / pr
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PairMetrics(float(precision), float(recall), float(f1))


def canonical_labels(labels) -> np.ndarray:
    """Relabel structured clusters by order of first appearance; NOISE kept."""
    lab = np.asarray(labels, dtype=np.int64)
    out = np.full_like(lab, NOISE)
    mapping = {}
    for i, v in enumerate(lab):
        if v == NOISE:
            continue
        if v not in mapping:
            mapping[v] = len(mapping)
        out[i] = mapping[v]
    return out


def exhaustive_optimum(points, k, lam, max_points=12):
    """Minimum regularised cost over every labeling with k nonempty clusters.

    Enumerates (k+1)^N labelings (k^N when lam is inf), so N is capped.
    Returns (cost, Clustering).
    """
    from . import _kernels

    X = as_array(points)
    n = X.shape[0]
    if n > max_points:
        raise ValueError(f"exhaustive search limited to {max_points} points, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    cost, labels = _kernels.best_labeling(squared_distance_matrix(X), int(k), float(lam))
    return float(cost), Clustering(labels, k)
