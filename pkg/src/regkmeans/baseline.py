"""k-means++ seeding and Lloyd iterations, used as the comparison baseline."""
from dataclasses import dataclass, field

import numpy as np

from .core import Clustering, as_array


@dataclass
class LloydConfig:
    k: int
    restarts: int = 10
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class LloydResult:
    clustering: Clustering
    centers: np.ndarray
    cost: float
    best_restart: int
    restart_costs: list
    histories: list = field(repr=False)  # per-restart cost trace


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def kmeanspp_seed(points, k, seed=0) -> np.ndarray:
    """D^2 seeding: returns a k x d array of centres chosen among the points."""
    X = as_array(points)
    n = X.shape[0]
    if k > n:
        raise ValueError(f"cannot seed {k} centres from {n} points")
    rng = _rng(seed)
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining mass sits on chosen centres; pick an unused index
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _assign(X, C):
    d2 = (X ** 2).sum(1)[:, None] - 2 * X @ C.T + (C ** 2).sum(1)[None, :]
    d2 = np.maximum(d2, 0.0)
    lab = d2.argmin(axis=1)
    return lab, d2[np.arange(X.shape[0]), lab]


def _sse(X, lab, k):
    cost = 0.0
    for p in range(k):
        S = X[lab == p]
        if len(S):
            cost += float(((S - S.mean(axis=0)) ** 2).sum())
    return cost


def _lloyd_once(X, k, max_iter, rng):
    C = kmeanspp_seed(X, k, rng)
    lab, _ = _assign(X, C)
    history = []
    for _ in range(max_iter):
        if not all((lab == p).any() for p in range(k)):
            lab = _repair(X, lab, C, k)
        C = np.stack([X[lab == p].mean(axis=0) for p in range(k)])
        history.append(_sse(X, lab, k))
        new_lab, _ = _assign(X, C)
        if np.array_equal(new_lab, lab):
            break
        lab = new_lab
    # the final assignment is never worse than the one that produced C
    if not all((lab == p).any() for p in range(k)):
        lab = _repair(X, lab, C, k)
    C = np.stack([X[lab == p].mean(axis=0) for p in range(k)])
    final = _sse(X, lab, k)
    if not history or final <= history[-1] + 1e-12 * max(1.0, abs(final)):
        history.append(final)
    return lab, C, final, history


def _repair(X, lab, C, k):
    lab = lab.copy()
    for p in range(k):
        if not (lab == p).any():
            # farthest point from its centre becomes a singleton
            _, dist = _assign(X, C)
            counts = np.bincount(lab, minlength=k)
            dist[counts[lab] <= 1] = -1.0  # never empty another cluster
            lab[int(dist.argmax())] = p
    return lab


def lloyd_result(points, config: LloydConfig) -> LloydResult:
    X = as_array(points)
    n = X.shape[0]
    if config.k > n:
        raise ValueError(f"k={config.k} exceeds the number of points {n}")
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best = None
    costs, histories = [], []
    for r, ss in enumerate(children):
        lab, C, cost, hist = _lloyd_once(X, config.k, config.max_iter, np.random.default_rng(ss))
        costs.append(cost)
        histories.append(hist)
        if best is None or cost < best[2]:
            best = (lab, C, cost, r)
    lab, C, cost, r = best
    return LloydResult(Clustering(lab, config.k), C, cost, r, costs, histories)


def lloyd(points, config: LloydConfig) -> Clustering:
    """Best-of-restarts Lloyd clustering."""
    return lloyd_result(points, config).clustering
