"""Explicit dual certificates for the SDP and LP relaxations, and recovery thresholds.

A certificate is a dual-feasible point whose objective equals the primal
objective of a candidate integral clustering; when it verifies, the
candidate is optimal for the relaxation.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .core import NOISE, Clustering, as_array, squared_distance_matrix
from .relax import intended_solution

GAP_TOL = 1e-5
EIG_TOL = 1e-6
BETA_TOL = 1e-8


@dataclass
class SdpDualCertificate:
    z: float
    alpha_dual: np.ndarray
    beta: np.ndarray
    Q: np.ndarray
    lam: float = math.inf
    gamma: object = None  # alpha_dual + lam on structured points (regularised case)
    z_window: tuple = (0.0, math.inf)


@dataclass
class CertificateReport:
    duality_gap: float
    min_eig_Q: float
    min_beta: float
    lambda_feasible: bool
    slackness: float = 0.0
    noise_block_ok: bool = True
    reconstruction_error: float = 0.0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return not self.failures

    @property
    def verdict(self) -> str:
        if not self.failures:
            return "CERTIFIED"
        return "FAILED(" + ",".join(self.failures) + ")"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "duality_gap": self.duality_gap,
            "min_eig_Q": self.min_eig_Q,
            "min_beta": self.min_beta,
            "lambda_feasible": self.lambda_feasible,
            "slackness": self.slackness,
            "noise_block_ok": self.noise_block_ok,
            "reconstruction_error": self.reconstruction_error,
            "details": self.details,
        }


def _blocks(partition: Clustering):
    blocks = [partition.members(p) for p in range(partition.k)]
    for p, b in enumerate(blocks):
        if b.size == 0:
            raise ValueError(f"structured cluster {p} is empty")
    return blocks, np.flatnonzero(partition.labels == NOISE)


def _geometry(X, blocks):
    """Per-point squared distance to its own centroid and centroid-gap data."""
    cents = np.stack([X[b].mean(axis=0) for b in blocks])
    own = np.zeros(X.shape[0])
    for p, b in enumerate(blocks):
        own[b] = ((X[b] - cents[p]) ** 2).sum(axis=1)
    return cents, own


def centered_sigma_sq(X, blocks) -> float:
    """Largest squared singular value of the structured points centred by their cluster means.

    Equals max over v orthogonal to the cluster indicators of v'XX'v / v'v.
    """
    rows = np.concatenate([X[b] - X[b].mean(axis=0) for b in blocks])
    if rows.size == 0:
        return 0.0
    return float(np.linalg.norm(rows, 2) ** 2)


def z_window_noiseless(X, blocks):
    """(lo, hi): lo = 2 sigma^2 of the centred structured data, hi from the cross-cluster gaps."""
    cents, own = _geometry(X, blocks)
    lo = 2.0 * centered_sigma_sq(X, blocks)
    hi = math.inf
    sizes = [len(b) for b in blocks]
    for p, bp in enumerate(blocks):
        for q in range(len(blocks)):
            if q == p:
                continue
            gap = ((X[bp] - cents[q]) ** 2).sum(axis=1) - own[bp]
            hi = min(hi, float(gap.min()) / (1.0 / (2 * sizes[p]) + 1.0 / (2 * sizes[q])))
    return lo, hi


def _pick_z(lo, hi):
    if math.isinf(hi):
        return lo + max(1.0, lo)
    return 0.5 * (lo + hi)


def _cross_beta(M):
    """Rank-one symmetric beta block with beta 1 = M 1 and 1' beta = 1' M."""
    r = M.sum(axis=1)
    c = M.sum(axis=0)
    T = r.sum()
    if T == 0.0:
        return np.zeros_like(M)
    return np.outer(r, c) / T


def _assemble(D, z, alpha, beta):
    Q = D + z * np.eye(D.shape[0]) + 0.5 * (alpha[:, None] + alpha[None, :]) - beta
    return Q


def construct_dual_noiseless(points, partition: Clustering, z_choice=None) -> SdpDualCertificate:
    """Dual point for the unregularised SDP certifying the given k-partition."""
    X = as_array(points)
    if (partition.labels == NOISE).any():
        raise ValueError("noiseless certificate requires a partition without noise points")
    blocks, _ = _blocks(partition)
    D = squared_distance_matrix(X)
    n = X.shape[0]
    _, own = _geometry(X, blocks)
    lo, hi = z_window_noiseless(X, blocks)
    z = float(z_choice) if z_choice is not None else _pick_z(lo, hi)

    alpha = np.empty(n)
    for b in blocks:
        alpha[b] = -2.0 * own[b] - z / len(b)
    beta = np.zeros((n, n))
    for p, bp in enumerate(blocks):
        for q, bq in enumerate(blocks):
            if q <= p:
                continue
            M = D[np.ix_(bp, bq)] + 0.5 * (alpha[bp][:, None] + alpha[bq][None, :])
            B = _cross_beta(M)
            beta[np.ix_(bp, bq)] = B
            beta[np.ix_(bq, bp)] = B.T
    Q = _assemble(D, z, alpha, beta)
    return SdpDualCertificate(z, alpha, beta, Q, math.inf, None, (lo, hi))


def z_window_regularised(X, blocks, noise, lam):
    """Intersection of every interval constraint on z for the regularised certificate."""
    lo, hi = z_window_noiseless(X, blocks)
    _, own = _geometry(X, blocks)
    m = len(noise)
    if m:
        lo = max(lo, lam * m)
    for b in blocks:
        nb = len(b)
        # gamma = alpha + lam >= 0
        hi = min(hi, nb * (lam - 2.0 * float(own[b].max())))
        if m:
            cross = ((X[b][:, None, :] - X[noise][None, :, :]) ** 2).sum(axis=2)
            slack = cross - own[b][:, None] - lam / 2.0
            hi = min(hi, 2.0 * nb * float(slack.min()))
    return lo, hi


def construct_dual_regularised(points, partition: Clustering, lam, z_choice=None) -> SdpDualCertificate:
    """Dual point for the regularised SDP certifying clusters plus a noise block."""
    X = as_array(points)
    if not math.isfinite(lam):
        return construct_dual_noiseless(points, partition, z_choice)
    blocks, noise = _blocks(partition)
    D = squared_distance_matrix(X)
    n = X.shape[0]
    _, own = _geometry(X, blocks)
    lo, hi = z_window_regularised(X, blocks, noise, lam)
    z = float(z_choice) if z_choice is not None else _pick_z(lo, hi)

    alpha = np.empty(n)
    for b in blocks:
        alpha[b] = -2.0 * own[b] - z / len(b)
    alpha[noise] = -lam
    beta = np.zeros((n, n))
    for p, bp in enumerate(blocks):
        for q, bq in enumerate(blocks):
            if q <= p:
                continue
            M = D[np.ix_(bp, bq)] + 0.5 * (alpha[bp][:, None] + alpha[bq][None, :])
            B = _cross_beta(M)
            beta[np.ix_(bp, bq)] = B
            beta[np.ix_(bq, bp)] = B.T
        if len(noise):
            # zeroes the structured/noise blocks of Q exactly
            B = D[np.ix_(bp, noise)] + 0.5 * (alpha[bp][:, None] - lam)
            beta[np.ix_(bp, noise)] = B
            beta[np.ix_(noise, bp)] = B.T
    if len(noise):
        beta[np.ix_(noise, noise)] = D[np.ix_(noise, noise)]
    Q = _assemble(D, z, alpha, beta)
    structured = np.concatenate(blocks)
    gamma = np.zeros(n)
    gamma[structured] = alpha[structured] + lam
    return SdpDualCertificate(z, alpha, beta, Q, float(lam), gamma, (lo, hi))


def lambda_window(delta):
    """Admissible lambda interval [(delta-1)^2 + 1, delta^2 + 2 delta] for the regularised SDP."""
    return ((delta - 1.0) ** 2 + 1.0, delta ** 2 + 2.0 * delta)


def verify(cert: SdpDualCertificate, points, partition: Clustering, lam=None, delta=None) -> CertificateReport:
    """Numerically check dual feasibility, zero gap and slackness of a certificate."""
    X = as_array(points)
    n = X.shape[0]
    if cert.Q.shape != (n, n) or cert.beta.shape != (n, n) or cert.alpha_dual.shape != (n,):
        raise ValueError("certificate dimensions do not match the point set")
    if partition.n_points != n:
        raise ValueError("partition does not match the point set")
    lam = cert.lam if lam is None else float(lam)
    D = squared_distance_matrix(X)
    scale = max(1.0, float(D.max()))
    Zs, ys = intended_solution(partition, n)
    noise = np.flatnonzero(partition.labels == NOISE)
    m = len(noise)
    failures = []

    Q = 0.5 * (cert.Q + cert.Q.T)
    recon = float(np.abs(cert.Q - _assemble(D, cert.z, cert.alpha_dual, cert.beta)).max())
    if recon > 1e-8 * scale:
        failures.append("reconstruction")

    pen = lam * m if m else 0.0
    primal = float(np.sum(D * Zs)) + pen
    dual = -cert.z * partition.k - float(cert.alpha_dual.sum())
    gap = abs(primal - dual) / max(1.0, abs(primal))
    if gap > GAP_TOL:
        failures.append("duality_gap")

    min_eig = float(np.linalg.eigvalsh(Q)[0])
    eig_scale = max(1.0, float(np.abs(Q).max()))
    if min_eig < -EIG_TOL * eig_scale:
        failures.append("min_eig_Q")

    min_beta = float(cert.beta.min()) if n else 0.0
    if min_beta < -BETA_TOL * scale:
        failures.append("min_beta")

    lam_ok = True
    if m and not math.isfinite(lam):
        lam_ok = False
    if math.isfinite(lam):
        if cert.gamma is not None:
            structured = np.flatnonzero(partition.labels != NOISE)
            lam_ok &= bool(cert.gamma[structured].min() >= -BETA_TOL * scale) if structured.size else True
        if delta is not None:
            lo, hi = lambda_window(delta)
            tol = 1e-12 * max(1.0, hi)
            lam_ok &= bool(lo - tol <= lam <= hi + tol)
    if not lam_ok:
        failures.append("lambda")

    slack = float(np.abs(cert.beta * Zs).max()) if n else 0.0
    slack = max(slack, abs(float(np.sum(Q * Zs))))
    if slack > 1e-8 * scale * max(1, n):
        failures.append("slackness")

    noise_ok = True
    if m and math.isfinite(lam):
        noise_ok = cert.z >= lam * m - 1e-9 * max(1.0, lam * m)
        if not noise_ok:
            failures.append("noise_block")

    return CertificateReport(
        duality_gap=gap, min_eig_Q=min_eig, min_beta=min_beta, lambda_feasible=lam_ok,
        slackness=slack, noise_block_ok=bool(noise_ok), reconstruction_error=recon, failures=failures,
        details={"primal": primal, "dual": dual, "z": cert.z, "z_window": list(cert.z_window)},
    )


def certify_sdp(points, partition: Clustering, lam=math.inf, delta=None, z_choice=None) -> CertificateReport:
    if math.isfinite(lam):
        cert = construct_dual_regularised(points, partition, lam, z_choice)
    else:
        cert = construct_dual_noiseless(points, partition, z_choice)
    return verify(cert, points, partition, lam, delta)


@dataclass
class LpDual:
    alpha_dual: np.ndarray
    gamma: float
    beta: np.ndarray
    mu: np.ndarray
    eta: np.ndarray
    gamma_window: tuple


def lp_gamma_window(D, partition: Clustering, lam):
    """Interval for gamma and, per constraint family, the bound it imposes.

    Families: "within" (alpha_a >= d(a, a')), "cross" (alpha_a <= d(a, b)),
    "noise_dist" (alpha_a <= d(a, c)), "lambda" (alpha_a <= lam and the
    noise-row condition gamma >= lam + sum_q max(0, lam - d(c, q))).
    """
    blocks, noise = _blocks(partition)
    lows, highs = {"within": -math.inf, "lambda": -math.inf}, {"cross": math.inf, "noise_dist": math.inf, "lambda": math.inf}
    for p, b in enumerate(blocks):
        nb = len(b)
        S = D[np.ix_(b, b)].sum(axis=1)
        lows["within"] = max(lows["within"], float((nb * D[np.ix_(b, b)] - S[:, None]).max()))
        others = np.setdiff1d(np.flatnonzero(partition.labels != NOISE), b)
        if others.size:
            highs["cross"] = min(highs["cross"], float((nb * D[np.ix_(b, others)] - S[:, None]).min()))
        if noise.size:
            highs["noise_dist"] = min(highs["noise_dist"], float((nb * D[np.ix_(b, noise)] - S[:, None]).min()))
        if math.isfinite(lam):
            highs["lambda"] = min(highs["lambda"], float((nb * lam - S).min()))
    if noise.size:
        Dc = D[noise].copy()
        Dc[np.arange(noise.size), noise] = math.inf  # exclude q = c
        need = lam + np.maximum(0.0, lam - Dc).sum(axis=1)
        lows["lambda"] = float(need.max())
    lo = max(lows.values())
    hi = min(highs.values())
    return lo, hi, lows, highs


def construct_lp_dual(points, partition: Clustering, lam, gamma=None) -> LpDual:
    X = as_array(points)
    D = squared_distance_matrix(X)
    n = X.shape[0]
    blocks, noise = _blocks(partition)
    if noise.size and not math.isfinite(lam):
        raise ValueError("a noise block needs a finite lambda")
    lo, hi, _, _ = lp_gamma_window(D, partition, lam)
    if gamma is None:
        if math.isfinite(lo) and math.isfinite(hi):
            gamma = 0.5 * (lo + hi)
        elif math.isfinite(lo):
            gamma = lo + max(1.0, abs(lo))
        elif math.isfinite(hi):
            gamma = hi - max(1.0, abs(hi))
        else:
            gamma = 0.0
    gamma = float(gamma)
    lam_eff = lam if math.isfinite(lam) else 0.0

    alpha = np.empty(n)
    beta = np.zeros((n, n))
    for b in blocks:
        S = D[np.ix_(b, b)].sum(axis=1)
        alpha[b] = (gamma + S) / len(b)
        beta[np.ix_(b, b)] = alpha[b][:, None] - D[np.ix_(b, b)]
    if noise.size:
        alpha[noise] = lam_eff
        beta[noise] = np.maximum(0.0, lam_eff - D[noise])
    np.fill_diagonal(beta, 0.0)
    mu = D - alpha[:, None] + beta
    mu[np.diag_indices(n)] = gamma - alpha - beta.sum(axis=1)
    eta = (lam_eff - alpha) if math.isfinite(lam) else np.zeros(n)
    return LpDual(alpha, gamma, beta, mu, eta, (lo, hi))


def lp_certificate(points, partition: Clustering, lam, gamma=None) -> CertificateReport:
    """Build the LP dual for the partition and check it.

    CERTIFIED iff the gamma window is nonempty, all of beta, mu, eta are
    nonnegative and sum(alpha) - k gamma equals the primal objective.
    """
    X = as_array(points)
    n = X.shape[0]
    if partition.n_points != n:
        raise ValueError("partition does not match the point set")
    D = squared_distance_matrix(X)
    scale = max(1.0, float(D.max()))
    dual = construct_lp_dual(X, partition, lam, gamma)
    lo, hi, lows, highs = lp_gamma_window(D, partition, lam)
    failures = []
    g = dual.gamma
    gtol = 1e-12 * scale * max(1, n)
    for name, bound in lows.items():
        if g < bound - gtol:
            failures.append(name)
    for name, bound in highs.items():
        if g > bound + gtol and name not in failures:
            failures.append(name)

    Zs, ys = intended_solution(partition, n)
    m = int(ys.sum())
    pen = lam * m if m else 0.0
    primal = float(np.sum(D * Zs)) + pen
    dual_obj = float(dual.alpha_dual.sum()) - partition.k * dual.gamma
    gap = abs(primal - dual_obj) / max(1.0, abs(primal))
    if gap > 1e-9:
        failures.append("duality_gap")

    tol = 1e-9 * scale * max(1, n)
    min_beta = float(dual.beta.min())
    min_mu = float(dual.mu.min())
    min_eta = float(dual.eta.min()) if n else 0.0
    if min(min_beta, min_mu, min_eta) < -tol and not failures:
        failures.append("dual_infeasible")
    lam_ok = min_eta >= -tol and "lambda" not in failures

    slack = max(
        float(np.abs(dual.mu * Zs).max()) if n else 0.0,
        float(np.abs(dual.eta * ys).max()) if n else 0.0,
    )
    off = Zs.diagonal()[:, None] - Zs
    slack = max(slack, float(np.abs(dual.beta * off).max()) if n else 0.0)
    if slack > tol:
        failures.append("slackness")

    return CertificateReport(
        duality_gap=gap, min_eig_Q=math.nan, min_beta=min(min_beta, min_mu), lambda_feasible=bool(lam_ok),
        slackness=slack, failures=failures,
        details={"primal": primal, "dual": dual_obj, "gamma": dual.gamma, "gamma_window": [lo, hi],
                 "lower_bounds": lows, "upper_bounds": highs, "min_mu": min_mu, "min_eta": min_eta},
    )


@dataclass
class ThresholdReport:
    delta_threshold_distfree: float
    delta_threshold_stochastic: float
    alpha_threshold: float
    alpha_threshold_stochastic: float
    n2_budget: float  # bound on |N2| / n
    n2_budget_count: float  # bound on |N2|
    lambda_window: tuple
    noiseless_distfree: float
    noiseless_stochastic: float
    balanced_distfree: float
    nu_min_loose: float
    nu_min_strict: float
    lp_delta_min: float
    lp_nu_min: float
    lp_lambda_window: tuple
    valid: bool = True

    def to_dict(self):
        out = {}
        for key, val in self.__dict__.items():
            out[key] = list(val) if isinstance(val, tuple) else val
        return out


def thresholds(stats, eps, delta, d, k, lam=None) -> ThresholdReport:
    """Separation, margin, noise-budget and lambda thresholds for an instance.

    ``eps`` is |N1| / n. When eps >= 1/2 the noisy bounds are undefined and
    reported as inf with ``valid=False``.
    """
    n = stats.n_min
    rho, theta, sig = stats.rho, stats.theta, stats.sigma_max_sq
    n_struct = max(2, int(round(rho * n * k)))
    logf = (1.0 + 1.0 / math.log(n_struct)) ** 2
    lam = (delta - 1.0) ** 2 + 1.0 if lam is None else lam
    shrink = 1.0 - 4.0 * eps ** 2

    noiseless_df = 1.0 + math.sqrt(1.0 + 2.0 * sig / n)
    noiseless_st = 1.0 + math.sqrt(1.0 + 2.0 * theta * rho * k / d * logf)
    balanced = 1.0 + math.sqrt(1.0 + 2.0 * rho * k)
    if shrink > 0:
        spec_df = 2.0 * sig / (n * shrink)
        spec_st = 2.0 * rho * k * theta * logf / (d * shrink)
        lead = 2.0 + 9.0 * eps / shrink
        delta_df = lead + math.sqrt(spec_df)
        delta_st = lead + math.sqrt(spec_st)
        base = 10.0 * delta * eps + 4.0 * delta ** 2 * eps ** 2
        alpha_df = math.sqrt(base + spec_df)
        alpha_st = math.sqrt(base + spec_st)
        budget = (delta ** 2 * shrink - 2.0 * delta * (1.0 + 4.0 * eps)) / lam
        valid = True
    else:
        delta_df = delta_st = alpha_df = alpha_st = math.inf
        budget = -math.inf
        valid = False

    return ThresholdReport(
        delta_threshold_distfree=delta_df,
        delta_threshold_stochastic=delta_st,
        alpha_threshold=alpha_df,
        alpha_threshold_stochastic=alpha_st,
        n2_budget=budget,
        n2_budget_count=budget * n,
        lambda_window=lambda_window(delta),
        noiseless_distfree=noiseless_df,
        noiseless_stochastic=noiseless_st,
        balanced_distfree=balanced,
        nu_min_loose=math.sqrt(1.0 + (delta - 1.0) ** 2),
        nu_min_strict=2.0 * delta,
        lp_delta_min=4.0,
        lp_nu_min=delta - 2.0,
        lp_lambda_window=((delta - 2.0) ** 2, math.nan),
        valid=valid,
    )


def lp_lambda_window(delta, nu, m, N):
    """[(delta - 2)^2, nu^2 (1 - m/N)] with unit ball radius."""
    return ((delta - 2.0) ** 2, nu ** 2 * (1.0 - m / N))


def lp_noise_budget(n_structured, delta, nu):
    """Largest m = |I| (nu^2 / (delta - 2)^2 - 1) of far points the LP tolerates."""
    if delta <= 2:
        return math.inf
    return n_structured * (nu ** 2 / (delta - 2.0) ** 2 - 1.0)
