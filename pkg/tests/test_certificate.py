import math

import numpy as np
import pytest

from regkmeans.certificate import (
    CertificateReport, certify_sdp, construct_dual_noiseless, construct_dual_regularised, construct_lp_dual,
    lambda_window, lp_certificate, lp_lambda_window, lp_noise_budget, thresholds, verify,
)
from regkmeans.core import NOISE, Clustering, exhaustive_optimum, squared_distance_matrix
from regkmeans.relax import LP, SDP, build_problem, intended_solution, solve
from regkmeans.synth import BallModelConfig, InstanceStats, NoiseConfig, generate


def _planted(k=2, d=8, n=15, delta=3.5, seed=0, m_far=0):
    inst = generate(BallModelConfig(k=k, d=d, n=n, delta=delta, seed=seed), NoiseConfig(m_far=m_far, seed=seed))
    return inst, inst.planted_labels()


def _trace_DZ(X, part):
    Z, y = intended_solution(part)
    return float(np.sum(squared_distance_matrix(X) * Z)), int(y.sum())


class TestNoiseless:
    def test_single_block(self, rng):
        X = rng.normal(size=(6, 3))
        part = Clustering([0] * 6, 1)
        cert = construct_dual_noiseless(X, part)
        xbar = X.mean(axis=0)
        want = -2 * ((X - xbar) ** 2).sum(axis=1) - cert.z / 6
        np.testing.assert_allclose(cert.alpha_dual, want, atol=1e-12)
        np.testing.assert_allclose(cert.Q @ np.ones(6), 0, atol=1e-10)

    def test_dual_objective_matches(self, rng):
        inst, part = _planted()
        cert = construct_dual_noiseless(inst.points, part)
        tr, _ = _trace_DZ(inst.points.points, part)
        assert -cert.z * 2 - cert.alpha_dual.sum() == pytest.approx(tr, rel=1e-9)

    def test_planted_certified(self):
        inst, part = _planted()
        rep = certify_sdp(inst.points, part)
        assert rep.certified and rep.verdict == "CERTIFIED"
        assert rep.min_beta >= -1e-8 and rep.min_eig_Q >= -1e-6

    def test_rejects_noise(self, rng):
        with pytest.raises(ValueError):
            construct_dual_noiseless(rng.normal(size=(3, 2)), Clustering([0, 0, NOISE], 1))

    def test_wrong_partition_fails(self):
        inst, part = _planted()
        lab = part.labels.copy()
        lab[0] = 1 - lab[0]
        assert not certify_sdp(inst.points, Clustering(lab, 2)).certified

    def test_deterministic(self):
        inst, part = _planted()
        a, b = construct_dual_noiseless(inst.points, part), construct_dual_noiseless(inst.points, part)
        assert np.array_equal(a.Q, b.Q) and a.z == b.z


class TestRegularised:
    def test_empty_noise_reduces(self):
        inst, part = _planted()
        a = construct_dual_noiseless(inst.points, part)
        b = construct_dual_regularised(inst.points, part, 1e9)
        assert a.z == pytest.approx(b.z, rel=1e-12)
        np.testing.assert_allclose(a.Q, b.Q, atol=1e-9)

    def test_dual_objective_matches(self):
        inst, part = _planted(m_far=5)
        lam = (3.5 - 1) ** 2 + 1
        cert = construct_dual_regularised(inst.points, part, lam)
        tr, m = _trace_DZ(inst.points.points, part)
        assert m == 5
        assert -cert.z * 2 - cert.alpha_dual.sum() == pytest.approx(tr + lam * m, rel=1e-9)

    def test_far_noise_certified(self):
        inst, part = _planted(m_far=5)
        rep = certify_sdp(inst.points, part, (3.5 - 1) ** 2 + 1, delta=3.5)
        assert rep.verdict == "CERTIFIED"
        assert rep.noise_block_ok

    def test_lambda_below_window(self):
        inst, part = _planted(m_far=5)
        lo, _ = lambda_window(3.5)
        rep = certify_sdp(inst.points, part, lo - 0.5, delta=3.5)
        assert not rep.lambda_feasible and "lambda" in rep.failures

    def test_negative_beta_detected(self):
        inst, part = _planted(m_far=3)
        lam = (3.5 - 1) ** 2 + 1
        cert = construct_dual_regularised(inst.points, part, lam)
        i, j = part.members(0)[0], part.members(1)[0]
        cert.beta[i, j] = cert.beta[j, i] = -1e-3
        D = squared_distance_matrix(inst.points)
        cert.Q = D + cert.z * np.eye(D.shape[0]) + 0.5 * (cert.alpha_dual[:, None] + cert.alpha_dual[None]) - cert.beta
        rep = verify(cert, inst.points, part, lam)
        assert "min_beta" in rep.failures and rep.verdict.startswith("FAILED(")

    def test_dimension_mismatch(self):
        inst, part = _planted()
        cert = construct_dual_noiseless(inst.points, part)
        with pytest.raises(ValueError):
            verify(cert, inst.points.points[:-1], Clustering(part.labels[:-1], 2))

    def test_certified_matches_solver(self):
        inst, part = _planted(m_far=5, seed=3)
        lam = (3.5 - 1) ** 2 + 1
        rep = certify_sdp(inst.points, part, lam)
        assert rep.certified
        sol = solve(build_problem(inst.points, 2, lam))
        assert sol.objective == pytest.approx(rep.details["primal"], rel=1e-4)

    def test_report_dict(self):
        rep = CertificateReport(0.0, 0.0, 0.0, True, failures=["a", "b"])
        assert rep.to_dict()["verdict"] == "FAILED(a,b)"


def test_certified_partitions_are_optimal(rng):
    """Certified partitions minimise 2 SSE + lam |noise| (the relaxation scale)."""
    checked = 0
    for trial in range(40):
        k = int(rng.integers(1, 3))
        centers = rng.normal(size=(k, 2)) * 6
        sizes = rng.integers(2, 4, size=k)
        pts = [c + 0.3 * rng.normal(size=(s, 2)) for c, s in zip(centers, sizes)]
        n_noise = int(rng.integers(0, 3))
        pts.append(rng.normal(size=(n_noise, 2)) * 20 + 40)
        X = np.concatenate(pts)
        lab = np.concatenate([np.full(s, p) for p, s in enumerate(sizes)] + [np.full(n_noise, NOISE)])
        part = Clustering(lab, k)
        lam = float(rng.uniform(1.0, 20.0))
        if not certify_sdp(X, part, lam).certified:
            continue
        checked += 1
        best, _ = exhaustive_optimum(X, k, lam / 2)
        tr, m = _trace_DZ(X, part)
        assert tr / 2 + lam / 2 * m == pytest.approx(best, rel=1e-9, abs=1e-12)
    assert checked >= 5


class TestLp:
    def test_planted_certified(self):
        delta, nu = 4.5, 9.0
        inst, part = _planted(k=2, d=8, n=15, delta=delta, m_far=5)
        lo, hi = lp_lambda_window(delta, nu, 5, inst.points.n_points)
        rep = lp_certificate(inst.points, part, 0.5 * (lo + hi))
        assert rep.verdict == "CERTIFIED"

    def test_low_separation_fails(self):
        # below the delta > 4 requirement the sandwich breaks on a sizeable share of instances
        failed = 0
        for seed in range(10):
            inst, part = _planted(k=2, d=8, n=15, delta=2.5, seed=seed)
            rep = lp_certificate(inst.points, part, math.inf)
            if rep.certified:
                continue
            failed += 1
            assert set(rep.failures) & {"within", "cross"}
            # a failed certificate here reflects a genuinely non-tight LP
            sol = solve(build_problem(inst.points, 2, math.inf, LP))
            assert sol.objective < rep.details["primal"] * (1 - 1e-4)
        assert failed >= 2

    def test_dual_objective_identity(self, rng):
        for _ in range(10):
            X = rng.normal(size=(9, 2))
            lab = rng.integers(-1, 2, 9)
            lab[:2] = [0, 1]
            part = Clustering(lab, 2)
            lam = float(rng.uniform(0.5, 3))
            dual = construct_lp_dual(X, part, lam, gamma=float(rng.normal()))
            tr, m = _trace_DZ(X, part)
            assert dual.alpha_dual.sum() - 2 * dual.gamma == pytest.approx(tr + lam * m, rel=1e-9)

    def test_certified_matches_solver(self):
        inst, part = _planted(k=2, d=8, n=15, delta=4.5, m_far=5, seed=2)
        lo, hi = lp_lambda_window(4.5, 9.0, 5, inst.points.n_points)
        lam = 0.5 * (lo + hi)
        rep = lp_certificate(inst.points, part, lam)
        assert rep.certified
        sol = solve(build_problem(inst.points, 2, lam, LP))
        assert sol.objective == pytest.approx(rep.details["primal"], rel=1e-4)

    def test_budget(self):
        assert lp_noise_budget(30, 4.5, 9.0) == pytest.approx(30 * (81 / 6.25 - 1))
        assert lp_noise_budget(30, 2.0, 9.0) == math.inf


class TestThresholds:
    def stats(self, sig=4.0):
        return InstanceStats(n_min=20, rho=1.0, theta=0.8, sigma_max_sq=sig)

    def test_window_endpoints(self):
        for d in (2.0, 3.0, 4.5):
            assert lambda_window(d) == ((d - 1) ** 2 + 1, d * d + 2 * d)

    def test_eps_zero(self):
        rep = thresholds(self.stats(), 0.0, 3.0, 8, 3)
        assert rep.delta_threshold_distfree == pytest.approx(2 + math.sqrt(2 * 4.0 / 20))
        assert thresholds(self.stats(0.0), 0.0, 3.0, 8, 3).noiseless_distfree == 2.0

    def test_independent_transcription(self):
        st = self.stats(5.0)
        eps, delta, d, k = 0.1, 3.0, 16, 3
        rep = thresholds(st, eps, delta, d, k)
        s = 1 - 4 * eps ** 2
        lam = (delta - 1) ** 2 + 1
        assert rep.delta_threshold_distfree == pytest.approx(2 + 9 * eps / s + (2 * 5.0 / (20 * s)) ** 0.5)
        assert rep.alpha_threshold == pytest.approx((10 * delta * eps + 4 * delta ** 2 * eps ** 2 + 2 * 5.0 / (20 * s)) ** 0.5)
        assert rep.n2_budget == pytest.approx((delta ** 2 * s - 2 * delta * (1 + 4 * eps)) / lam)
        assert rep.nu_min_strict == 2 * delta and rep.nu_min_loose == pytest.approx((1 + (delta - 1) ** 2) ** 0.5)
        assert rep.valid

    def test_eps_half(self):
        rep = thresholds(self.stats(), 0.5, 3.0, 8, 3)
        assert not rep.valid and rep.delta_threshold_distfree == math.inf
