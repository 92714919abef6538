"""NumPy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` argument-for-argument and are used when the
compiled extension is unavailable (or when ``REGKMEANS_PURE_PYTHON=1``).
"""
import numpy as np

_CHUNK = 1 << 15


def _tie_tol(value):
    return 1e-9 * max(1.0, abs(value))


def best_subset_1means(points, lam):
    """Minimise SSE(S) + lam * (N - |S|) over all nonempty subsets S.

    Returns ``(best_cost, best_mask)``. Ties (within 1e-9 relative) go to the
    larger subset, then to the lexicographically smallest sorted index tuple.
    """
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    X = X - X.mean(axis=0)
    sq = np.einsum("ij,ij->i", X, X)
    bits = 1 << np.arange(n, dtype=np.int64)

    costs = np.empty((1 << n) - 1)
    counts = np.empty((1 << n) - 1, dtype=np.int64)
    for start in range(1, 1 << n, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        member = (masks[:, None] & bits[None, :]) != 0
        cnt = member.sum(axis=1)
        sums = member @ X
        sse = member @ sq - np.einsum("ij,ij->i", sums, sums) / cnt
        costs[start - 1:start - 1 + len(masks)] = np.maximum(sse, 0.0) + lam * (n - cnt)
        counts[start - 1:start - 1 + len(masks)] = cnt

    best = costs.min()
    cand = np.flatnonzero(costs <= best + _tie_tol(best)) + 1
    top = counts[cand - 1].max()
    cand = cand[counts[cand - 1] == top]
    # lexicographic order of sorted index tuples
    chosen = min(cand.tolist(), key=lambda m: [i for i in range(n) if m >> i & 1])
    return float(costs[chosen - 1]), int(chosen)


def best_labeling(D, k, lam, require_nonempty=True):
    """Exhaustive minimum of sum_p SSE(C_p) + lam * |noise| over labelings.

    ``D`` holds squared distances; labels are -1 (noise) or 0..k-1. ``lam``
    may be ``inf``, which forbids noise. Returns ``(best_cost, labels)``.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    allow_noise = np.isfinite(lam)
    base = k + 1 if allow_noise else k
    total = base ** n
    powers = base ** np.arange(n - 1, -1, -1, dtype=np.int64)

    best_cost = np.inf
    best_labels = None
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % base
        labels = digits - 1 if allow_noise else digits
        cost = np.zeros(len(codes))
        ok = np.ones(len(codes), dtype=bool)
        for p in range(k):
            member = (labels == p).astype(np.float64)
            size = member.sum(axis=1)
            pair = np.einsum("ij,ij->i", member @ D, member) / 2.0
            nonempty = size > 0
            cost += np.where(nonempty, pair / np.where(nonempty, size, 1.0), 0.0)
            if require_nonempty:
                ok &= nonempty
        if allow_noise:
            cost += lam * (labels == -1).sum(axis=1)
        cost = np.where(ok, cost, np.inf)
        i = int(np.argmin(cost))
        if not np.isfinite(cost[i]):
            continue
        if best_labels is None or cost[i] < best_cost - _tie_tol(best_cost):
            best_cost = float(cost[i])
            best_labels = labels[i].copy()
    return best_cost, best_labels


def project_row_cone(M):
    """Row-wise Euclidean projection onto {0 <= m_pq <= m_pp}.

    Each row p is projected independently onto the polyhedral cone whose
    apex coordinate is the diagonal entry.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    diag = M.diagonal().copy()
    if n == 1:
        return np.maximum(M, 0.0)
    off = M[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    srt = -np.sort(-off, axis=1)
    csum = np.concatenate([np.zeros((n, 1)), np.cumsum(srt, axis=1)[:, :-1]], axis=1)
    j = np.arange(n - 1)
    cand = (diag[:, None] + csum) / (1.0 + j)[None, :]
    hit = srt <= cand
    first = np.where(hit.any(axis=1), hit.argmax(axis=1), n - 1)
    t_all = (diag + np.concatenate([csum, srt.sum(axis=1, keepdims=True)], axis=1)[np.arange(n), first]) / (1.0 + first)
    t = np.maximum(t_all, 0.0)
    out = np.clip(M, 0.0, t[:, None])
    out[np.diag_indices(n)] = t
    return out
