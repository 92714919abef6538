# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: exhaustive enumeration oracles and the LP row-cone projection."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double _tie_tol(double v) noexcept nogil:
    if not isfinite(v):
        return 0.0
    return 1e-9 * (fabs(v) if fabs(v) > 1.0 else 1.0)


cdef inline bint _lex_smaller(long long a, long long b) noexcept nogil:
    # equal popcount assumed: the set owning the lowest differing index wins
    cdef long long x = a ^ b
    return (a & (x & -x)) != 0


def best_subset_1means(points, double lam):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.ascontiguousarray(points, dtype=np.float64)
    X = X - X.mean(axis=0)
    cdef double[:, ::1] xv = X
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    if n > 62:
        raise ValueError("too many points for subset enumeration")
    cdef double[::1] sums = np.zeros(d)
    cdef double[::1] sq = np.einsum("ij,ij->i", X, X)
    cdef double sumsq = 0.0, norm2, sse, cost, best = INFINITY
    cdef long long i, gray, prev = 0, changed, best_mask = 0, total = (<long long>1) << n
    cdef int bit, cnt = 0, best_cnt = 0
    cdef Py_ssize_t j
    cdef double sign
    with nogil:
        for i in range(1, total):
            gray = i ^ (i >> 1)
            changed = gray ^ prev
            bit = 0
            while (changed >> bit) != 1:
                bit += 1
            sign = 1.0 if (gray & changed) else -1.0
            cnt += 1 if sign > 0 else -1
            sumsq += sign * sq[bit]
            norm2 = 0.0
            for j in range(d):
                sums[j] += sign * xv[bit, j]
                norm2 += sums[j] * sums[j]
            prev = gray
            if cnt == 0:
                continue
            sse = sumsq - norm2 / cnt
            if sse < 0.0:
                sse = 0.0
            cost = sse + lam * (n - cnt)
            if cost < best - _tie_tol(best):
                best, best_mask, best_cnt = cost, gray, cnt
            elif cost <= best + _tie_tol(best):
                if cnt > best_cnt or (cnt == best_cnt and _lex_smaller(gray, best_mask)):
                    best, best_mask, best_cnt = (cost if cost < best else best), gray, cnt
    # report the cost of the chosen subset exactly, not the drifted running value
    member = np.array([(best_mask >> b) & 1 for b in range(n)], dtype=bool)
    sub = X[member]
    exact = float(((sub - sub.mean(axis=0)) ** 2).sum()) + lam * (n - member.sum())
    return exact, int(best_mask)


cdef struct _State:
    int n
    int k
    int allow_noise
    int require_nonempty
    double lam
    double *D
    int *labels
    int *best_labels
    int *sizes
    double *pair
    double best


cdef void _dfs(_State *s, int i, int used) noexcept nogil:
    cdef int p, j, lab, n = s.n
    cdef double add, cost
    if i == n:
        if s.require_nonempty and used < s.k:
            return
        cost = 0.0
        for p in range(s.k):
            if s.sizes[p] > 0:
                cost += s.pair[p] / s.sizes[p]
        if s.allow_noise:
            cost += s.lam * s.sizes[s.k]
        if cost < s.best - _tie_tol(s.best):
            s.best = cost
            for j in range(n):
                s.best_labels[j] = s.labels[j]
        return
    # remaining points cannot open enough clusters
    if s.require_nonempty and used + (n - i) < s.k:
        return
    if s.allow_noise:
        s.labels[i] = -1
        s.sizes[s.k] += 1
        _dfs(s, i + 1, used)
        s.sizes[s.k] -= 1
    for p in range(used + 1 if used < s.k else s.k):
        add = 0.0
        for j in range(i):
            if s.labels[j] == p:
                add += s.D[i * n + j]
        s.labels[i] = p
        s.pair[p] += add
        s.sizes[p] += 1
        _dfs(s, i + 1, used + 1 if p == used else used)
        s.sizes[p] -= 1
        s.pair[p] -= add


def best_labeling(D, int k, double lam, bint require_nonempty=True):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Dm = np.ascontiguousarray(D, dtype=np.float64)
    cdef int n = Dm.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] labels = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] best_labels = np.full(n, -2, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] sizes = np.zeros(k + 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pair = np.zeros(k + 1)
    cdef _State s
    s.n = n
    s.k = k
    s.allow_noise = 1 if isfinite(lam) else 0
    s.require_nonempty = 1 if require_nonempty else 0
    s.lam = lam if isfinite(lam) else 0.0
    s.D = <double *> Dm.data
    s.labels = <int *> labels.data
    s.best_labels = <int *> best_labels.data
    s.sizes = <int *> sizes.data
    s.pair = <double *> pair.data
    s.best = INFINITY
    with nogil:
        _dfs(&s, 0, 0)
    if not isfinite(s.best):
        return float("inf"), None
    return s.best, best_labels.astype(np.int64)


def project_row_cone(M):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(M, dtype=np.float64, order="C")
    cdef Py_ssize_t n = A.shape[0], p, q, m, j, kept
    cdef double[:, ::1] a = A
    cdef double *buf
    cdef double t0, csum, t, v
    if n == 1:
        return np.maximum(A, 0.0)
    buf = <double *> malloc((n - 1) * sizeof(double))
    try:
        with nogil:
            for p in range(n):
                # t solves t - t0 = sum_q (a_pq - t)_+ ; the root is >= t0, so only
                # entries above t0 can be active. Prune until the set is stable.
                t0 = a[p, p]
                m = 0
                csum = 0.0
                for q in range(n):
                    if q != p and a[p, q] > t0:
                        buf[m] = a[p, q]
                        csum += buf[m]
                        m += 1
                t = (t0 + csum) / (1.0 + m)
                while m:
                    kept = 0
                    csum = 0.0
                    for j in range(m):
                        v = buf[j]
                        if v > t:
                            buf[kept] = v
                            csum += v
                            kept += 1
                    if kept == m:
                        break
                    m = kept
                    t = (t0 + csum) / (1.0 + m)
                if t < 0.0:
                    t = 0.0
                for q in range(n):
                    if q == p:
                        a[p, q] = t
                    elif a[p, q] < 0.0:
                        a[p, q] = 0.0
                    elif a[p, q] > t:
                        a[p, q] = t
    finally:
        free(buf)
    return A
