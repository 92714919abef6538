"""SDP and LP relaxations of regularised k-means and an ADMM solver for both.

Both relaxations minimise Tr(DZ) + lam * <1, y> subject to Tr Z = k and
row sums of Z plus y equal to one. The SDP adds Z >= 0 entrywise and Z PSD;
the LP drops symmetry and PSD and asks 0 <= z_pq <= z_pp instead. With
``lam = inf`` the y block disappears.

Note the factor two: on an integral solution Tr(DZ) is twice the k-means SSE.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels
from .core import NOISE, Clustering, as_array, cluster_sse, squared_distance_matrix

SDP = "SDP"
LP = "LP"


@dataclass
class RelaxedProblem:
    D: np.ndarray
    k: int
    lam: float
    kind: str = SDP

    def __post_init__(self):
        self.D = np.asarray(self.D, dtype=np.float64)
        n = self.D.shape[0]
        if self.D.shape != (n, n):
            raise ValueError("D must be square")
        if self.kind not in (SDP, LP):
            raise ValueError(f"kind must be {SDP!r} or {LP!r}")
        if not 1 <= self.k <= n:
            raise ValueError(f"need 1 <= k <= N, got k={self.k}, N={n}")
        if not self.lam > 0:
            raise ValueError("lambda must be positive (use inf for the unregularised problem)")

    @property
    def n(self):
        return self.D.shape[0]

    @property
    def has_y(self):
        return math.isfinite(self.lam)

    def objective(self, Z, y=None):
        val = float(np.sum(self.D * Z))
        if self.has_y and y is not None:
            val += self.lam * float(np.sum(y))
        return val

    def constraint_counts(self):
        """Number of scalar constraints per family, for inspection."""
        n = self.n
        counts = {"trace": 1, "row_sum": n, "Z_nonneg": n * n}
        if self.has_y:
            counts["y_nonneg"] = n
        if self.kind == SDP:
            counts["psd"] = 1
        else:
            counts["z_le_diag"] = n * n
        return counts


@dataclass
class SolverConfig:
    tol: float = 1e-5
    max_iter: int = 20000
    step: float = 1.0
    over_relaxation: float = 1.6
    gap_tol: float = 1e-6
    adapt_every: int = 50
    check_every: int = 10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.over_relaxation < 2:
            raise ValueError("over_relaxation must lie in (0, 2)")


@dataclass
class RelaxedSolution:
    Z: np.ndarray
    y: object
    objective: float
    primal_residual: float
    iterations: int
    converged: bool
    kind: str = SDP
    lower_bound: float = -math.inf
    best_objectives: list = field(default_factory=list, repr=False)


def build_problem(points, k, lam, kind=SDP) -> RelaxedProblem:
    D = squared_distance_matrix(points)
    if k > D.shape[0]:
        raise ValueError(f"k={k} exceeds N={D.shape[0]}")
    return RelaxedProblem(D, int(k), float(lam), kind)


def psd_project(M) -> np.ndarray:
    """Frobenius-nearest PSD matrix (after symmetrising)."""
    M = np.asarray(M, dtype=np.float64)
    S = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(S)
    if w[0] >= 0:
        return S
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T


def feasibility_residuals(problem: RelaxedProblem, Z, y=None) -> dict:
    """Constraint violations of (Z, y), each as a nonnegative number."""
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[0]
    yv = np.zeros(n) if (y is None or not problem.has_y) else np.asarray(y, dtype=np.float64)
    res = {
        "trace": abs(float(np.trace(Z)) - problem.k),
        "Z_nonneg": max(0.0, -float(Z.min())),
        "y_nonneg": max(0.0, -float(yv.min())) if n else 0.0,
    }
    if problem.kind == SDP:
        S = 0.5 * (Z + Z.T)
        res["symmetry"] = float(np.abs(Z - Z.T).max())
        res["row_sum"] = float(np.abs(S.sum(axis=1) + yv - 1.0).max())
        res["psd"] = max(0.0, -float(np.linalg.eigvalsh(S)[0]))
    else:
        res["row_sum"] = float(np.abs(Z.sum(axis=1) + yv - 1.0).max())
        res["z_le_diag"] = max(0.0, float((Z - Z.diagonal()[:, None]).max()))
    return res


def primal_residual(problem, Z, y=None) -> float:
    return max(feasibility_residuals(problem, Z, y).values())


def lagrangian_bound(problem: RelaxedProblem, nu, B=None) -> float:
    """Valid lower bound on the relaxation optimum from row multipliers ``nu``.

    Keeps Tr Z = k and the cone inside the inner minimisation and uses
    0 <= y <= 1. For the SDP an entrywise nonnegative ``B`` absorbs the
    orthant part, giving k * lambda_min(D - sym(nu 1^T) - B).
    """
    nu = np.asarray(nu, dtype=np.float64)
    D, k = problem.D, problem.k
    val = float(nu.sum())
    if problem.has_y:
        val += float(np.minimum(0.0, problem.lam - nu).sum())
    if problem.kind == SDP:
        M = D - 0.5 * (nu[:, None] + nu[None, :])
        if B is not None:
            M = M - np.maximum(B, 0.0)
        val += k * float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    else:
        M = D - nu[:, None]
        off = np.minimum(M, 0.0)
        np.fill_diagonal(off, 0.0)
        val += k * float((M.diagonal() + off.sum(axis=1)).min())
    return val


def _affine_sym(P, q, k, a, inv_b):
    """Weighted projection onto {Tr Z = k, sym(Z) 1 + y = 1}, P symmetric."""
    n = P.shape[0]
    trP = np.trace(P)
    r = P.sum(axis=1) - 1.0
    if q is not None:
        r = r + q
    c = n / (2.0 * a) + inv_b
    s = (r.sum() - trP + k) / ((n - 1) / a + inv_b)
    mu = (a * (trP - k) - s) / n
    nu = (r - (mu / a + s / (2.0 * a))) / c
    Z = P - (0.5 * (nu[:, None] + nu[None, :])) / a
    Z[np.diag_indices(n)] -= mu / a
    y = None if q is None else q - nu * inv_b
    return Z, y, nu


def _affine_rows(P, q, k, a, inv_b):
    """Weighted projection onto {Tr Z = k, Z 1 + y = 1} without symmetry."""
    n = P.shape[0]
    trP = np.trace(P)
    r = P.sum(axis=1) - 1.0
    if q is not None:
        r = r + q
    c2 = n / a + inv_b
    mu = (a * (trP - k) - r.sum() / c2) / (n * (1.0 - 1.0 / (a * c2)))
    nu = (r - mu / a) / c2
    Z = P - nu[:, None] / a
    Z[np.diag_indices(n)] -= mu / a
    y = None if q is None else q - nu * inv_b
    return Z, y, nu


def _start(n, k, has_y):
    if has_y:
        return (k / n) * np.eye(n), np.full(n, 1.0 - k / n)
    off = 0.0 if n == 1 else (1.0 - k / n) / (n - 1)
    Z = np.full((n, n), off)
    np.fill_diagonal(Z, k / n)
    return Z, None


def solve(problem: RelaxedProblem, config: SolverConfig = None) -> RelaxedSolution:
    """ADMM on the split x = (Z, y) in the affine set, u = x in the cone.

    The SDP carries a second copy v = Z for the PSD cone. The y penalty is
    applied in the cone step as a shifted clip, the D cost in the affine step.
    """
    config = config or SolverConfig()
    n, k, kind = problem.n, problem.k, problem.kind
    has_y = problem.has_y

    if n == 1:
        Z = np.ones((1, 1))
        y = np.zeros(1) if has_y else None
        obj = problem.objective(Z, y)
        return RelaxedSolution(Z, y, obj, primal_residual(problem, Z, y), 0, True, kind, obj, [])

    scale = float(problem.D.max()) or 1.0
    C = problem.D / scale
    lam_s = problem.lam / scale if has_y else 0.0
    alpha = config.over_relaxation
    rho = float(config.step)
    project_cone = (lambda M: np.maximum(0.5 * (M + M.T), 0.0)) if kind == SDP else _kernels.project_row_cone
    affine = _affine_sym if kind == SDP else _affine_rows

    Z0, y0 = _start(n, k, has_y)
    U, uy = Z0.copy(), (None if y0 is None else y0.copy())
    W, wy = np.zeros((n, n)), (np.zeros(n) if has_y else None)
    if kind == SDP:
        V, T = Z0.copy(), np.zeros((n, n))

    best = None  # (feasible, key, Z, y, obj, res)
    best_objectives = []
    Z, y = Z0, y0
    converged = False
    it = 0
    pri_acc = dual_acc = 0.0
    lb = -math.inf

    for it in range(1, config.max_iter + 1):
        # affine step
        if kind == SDP:
            P = 0.5 * ((U - W) + (V - T)) - C / (2.0 * rho)
            a = 2.0 * rho
        else:
            P = (U - W) - C / rho
            a = rho
        q = (uy - wy) if has_y else None
        inv_b = 1.0 / rho if has_y else 0.0
        Z, y, nu = affine(P, q, k, a, inv_b)

        # cone step with over-relaxation
        Zh = alpha * Z + (1.0 - alpha) * U
        U_old = U
        U = project_cone(Zh + W)
        W = W + Zh - U
        dnorm = np.linalg.norm(U - U_old)
        pnorm = np.linalg.norm(Z - U)
        if has_y:
            yh = alpha * y + (1.0 - alpha) * uy
            uy_old = uy
            uy = np.maximum(yh + wy - lam_s / rho, 0.0)
            wy = wy + yh - uy
            dnorm = math.hypot(dnorm, np.linalg.norm(uy - uy_old))
            pnorm = math.hypot(pnorm, np.linalg.norm(y - uy))
        if kind == SDP:
            Zh2 = alpha * Z + (1.0 - alpha) * V
            V_old = V
            V = psd_project(Zh2 + T)
            T = T + Zh2 - V
            dnorm = math.hypot(dnorm, np.linalg.norm(V - V_old))
            pnorm = math.hypot(pnorm, np.linalg.norm(Z - V))
        pri_acc, dual_acc = pnorm, rho * dnorm

        if it % config.check_every == 0 or it == config.max_iter:
            res = primal_residual(problem, Z, y)
            obj = problem.objective(Z, y)
            feasible = res <= config.tol
            key = obj if feasible else res
            if best is None or (feasible and not best[0]) or (feasible == best[0] and key < best[1]):
                best = (feasible, key, Z.copy(), None if y is None else y.copy(), obj, res)
            if best[0]:
                best_objectives.append(best[4])
            if feasible and dual_acc / n <= config.tol:
                # multipliers of the affine step, mapped back to the unscaled problem
                B = -rho * scale * W if kind == SDP else None
                lb = max(lb, lagrangian_bound(problem, -scale * nu, B))
                if abs(obj - lb) <= config.gap_tol * max(abs(obj), abs(lb), 1e-9 * scale):
                    converged = True
                    break

        if it % config.adapt_every == 0:
            new_rho = rho
            if pri_acc > 10.0 * dual_acc:
                new_rho = min(rho * 2.0, 1e3)
            elif dual_acc > 10.0 * pri_acc:
                new_rho = max(rho / 2.0, 1e-3)
            if new_rho != rho:
                W *= rho / new_rho
                if has_y:
                    wy *= rho / new_rho
                if kind == SDP:
                    T *= rho / new_rho
                rho = new_rho

    if converged:
        res = primal_residual(problem, Z, y)
        return RelaxedSolution(Z, y, problem.objective(Z, y), res, it, True, kind, lb, best_objectives)
    _, _, Zb, yb, obj, res = best
    return RelaxedSolution(Zb, yb, obj, res, it, False, kind, lb, best_objectives)


def intended_solution(clustering: Clustering, n=None):
    """Integral (Z, y): Z = sum_p 1_p 1_p^T / n_p, y the noise indicator."""
    lab = clustering.labels
    n = lab.shape[0] if n is None else n
    Z = np.zeros((n, n))
    for p in range(clustering.k):
        idx = clustering.members(p)
        if idx.size == 0:
            raise ValueError(f"structured cluster {p} is empty; its block of Z is undefined")
        Z[np.ix_(idx, idx)] = 1.0 / idx.size
    y = (lab == NOISE).astype(np.float64)
    return Z, y


@dataclass
class IntegralCheck:
    relaxed_objective: float  # Tr(DZ) + lam <1, y>
    trace_DZ: float
    sse: float  # Tr(DZ) / 2
    n_noise: int
    regularised_cost: float  # sse + lam * n_noise


def integral_objective_check(points, clustering: Clustering, lam) -> IntegralCheck:
    """Evaluate the relaxation objective at the integral point of a clustering.

    Tr(DZ) = 2 * SSE, so the relaxed objective is 2 * SSE + lam * |noise|
    while the regularised cost is SSE + lam * |noise|. Both are returned.
    """
    X = as_array(points)
    D = squared_distance_matrix(X)
    Z, y = intended_solution(clustering, X.shape[0])
    tr = float(np.sum(D * Z))
    n_noise = int(y.sum())
    pen = lam * n_noise if n_noise else 0.0
    sse = cluster_sse(X, clustering)
    if abs(tr - 2 * sse) > 1e-9 * max(1.0, abs(tr)):
        raise ArithmeticError(f"Tr(DZ)={tr!r} is not twice the SSE {sse!r}")
    return IntegralCheck(tr + pen, tr, sse, n_noise, sse + pen)
