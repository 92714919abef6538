"""Planted instances under the stochastic ball model, with structured noise."""
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .core import NOISE, Clustering, PointSet


class PackingError(RuntimeError):
    """Centre placement ran out of rejection proposals."""


class RejectionError(RuntimeError):
    """A noise sampler ran out of rejection proposals."""


@dataclass
class BallModelConfig:
    k: int
    d: int
    n: int
    delta: float
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.d < 1 or self.n < 1:
            raise ValueError("k, d and n must all be at least 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass
class NoiseConfig:
    m_far: int = 0
    far_factor: float = 2.0
    m_near: int = 0
    margin_alpha: float = 0.0
    m_uniform: int = 0
    box_scale: float = 1.5
    seed: int = 1

    def __post_init__(self):
        if min(self.m_far, self.m_near, self.m_uniform) < 0:
            raise ValueError("noise counts must be nonnegative")
        if self.margin_alpha < 0:
            raise ValueError("margin_alpha must be nonnegative")
        if self.far_factor <= 0 or self.box_scale <= 0:
            raise ValueError("far_factor and box_scale must be positive")


@dataclass
class GroundTruth:
    """Planted structure. ``delta`` is the configured separation, the realised
    minimum centre distance is kept alongside it."""

    centers: np.ndarray
    ball_members: list
    near_noise: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    far_noise: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    uniform_noise: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    delta: float = 0.0
    min_center_distance: float = float("inf")

    @property
    def k(self):
        return self.centers.shape[0]

    @property
    def structured(self) -> np.ndarray:
        if not self.ball_members:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(self.ball_members)

    @property
    def n_total(self) -> int:
        return sum(len(b) for b in self.ball_members) + len(self.near_noise) + len(self.far_noise) + len(self.uniform_noise)

    def to_dict(self):
        return {
            "centers": self.centers.tolist(),
            "ball_members": [b.tolist() for b in self.ball_members],
            "near_noise": self.near_noise.tolist(),
            "far_noise": self.far_noise.tolist(),
            "uniform_noise": self.uniform_noise.tolist(),
            "delta": self.delta,
            "min_center_distance": self.min_center_distance,
        }

    @classmethod
    def from_dict(cls, d):
        ix = lambda v: np.asarray(v, dtype=np.int64)
        return cls(
            centers=np.asarray(d["centers"], dtype=np.float64).reshape(len(d["centers"]), -1),
            ball_members=[ix(b) for b in d["ball_members"]],
            near_noise=ix(d.get("near_noise", [])),
            far_noise=ix(d.get("far_noise", [])),
            uniform_noise=ix(d.get("uniform_noise", [])),
            delta=float(d["delta"]),
            min_center_distance=float(d.get("min_center_distance", float("inf"))),
        )


@dataclass
class InstanceStats:
    n_min: int
    rho: float
    theta: float
    sigma_max_sq: float


@dataclass
class Instance:
    points: PointSet
    truth: GroundTruth
    config: BallModelConfig
    noise: NoiseConfig

    def planted_labels(self) -> Clustering:
        """Balls keep their cluster, margin noise goes to the nearest centre,
        far and uniform noise are NOISE."""
        return planted_clustering(self.truth, self.points)

    def stats(self) -> InstanceStats:
        return instance_stats(self.truth, self.points)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _unit_directions(rng, n, d):
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    while np.any(norms == 0):  # measure-zero, but keep it exact
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((bad.sum(), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


def place_centers(k, d, delta, seed=0, budget=100_000) -> np.ndarray:
    """k centres with pairwise distance >= delta, by sequential rejection on a sphere."""
    if k == 1:
        return np.zeros((1, d))
    rng = _rng(seed)
    # random pairs on this sphere sit near distance delta in moderate d
    radius = delta / np.sqrt(2.0)
    centers = [radius * _unit_directions(rng, 1, d)[0]]
    proposals = failures = 0
    while len(centers) < k:
        if proposals >= budget:
            raise PackingError(f"could not place {k} centres at separation {delta} in R^{d} within {budget} proposals")
        proposals += 1
        cand = radius * _unit_directions(rng, 1, d)[0]
        if np.min(np.linalg.norm(np.asarray(centers) - cand, axis=1)) >= delta:
            centers.append(cand)
        else:
            failures += 1
            if failures % 1000 == 0:
                # grow the sphere and rescale what we have; separations only grow
                centers = [c * 1.05 for c in centers]
                radius *= 1.05
    return np.asarray(centers)


def sample_unit_ball(center, n, d, seed=0) -> np.ndarray:
    """n i.i.d. uniform points in the radius-1 ball around ``center``."""
    rng = _rng(seed)
    center = np.asarray(center, dtype=np.float64).reshape(d)
    u = _unit_directions(rng, n, d)
    r = rng.random(n) ** (1.0 / d)
    return center + u * r[:, None]


def sample_far_noise(truth: GroundTruth, structured, m_far, far_factor=2.0, seed=0, budget=100_000):
    """m_far points at distance >= far_factor * delta from every structured point.

    Proposals live in a shell around the centroid of the centres whose inner
    radius clears every ball, then each is audited against the actual points.
    """
    d = truth.centers.shape[1]
    if m_far == 0:
        return np.zeros((0, d))
    rng = _rng(seed)
    structured = np.asarray(structured, dtype=np.float64)
    mid = truth.centers.mean(axis=0)
    reach = float(np.max(np.linalg.norm(truth.centers - mid, axis=1)))
    lo = far_factor * truth.delta + 1.0 + reach
    hi = far_factor * truth.delta + 3.0 + reach
    need = far_factor * truth.delta
    out = []
    tries = 0
    while len(out) < m_far:
        if tries >= budget:
            raise RejectionError("far-noise sampling exhausted its proposal budget")
        batch = min(4 * (m_far - len(out)) + 16, budget - tries)
        tries += batch
        u = _unit_directions(rng, batch, d)
        r = lo + rng.random(batch) * (hi - lo)
        cand = mid + u * r[:, None]
        if len(structured):
            ok = cdist(cand, structured).min(axis=1) >= need
        else:
            ok = np.ones(batch, dtype=bool)
        out.extend(cand[ok][: m_far - len(out)])
    return np.asarray(out)


def _bbox(centers, pad=1.0):
    return centers.min(axis=0) - pad, centers.max(axis=0) + pad


def sample_margin_noise(truth: GroundTruth, m_near, margin_alpha, seed=0, budget=100_000):
    """m_near points in the padded bounding box of the centres whose distance
    gaps to every pair of centres are at least margin_alpha."""
    C = truth.centers
    d = C.shape[1]
    if m_near == 0:
        return np.zeros((0, d))
    rng = _rng(seed)
    lo, hi = _bbox(C)
    out = []
    tries = 0
    while len(out) < m_near:
        if tries >= budget:
            raise RejectionError("margin-noise sampling exhausted its proposal budget")
        batch = min(8 * (m_near - len(out)) + 32, budget - tries)
        tries += batch
        cand = lo + rng.random((batch, d)) * (hi - lo)
        if C.shape[0] >= 2:
            dist = cdist(cand, C)
            iu = np.triu_indices(C.shape[0], 1)
            gaps = np.abs(dist[:, iu[0]] - dist[:, iu[1]])
            ok = gaps.min(axis=1) >= margin_alpha
        else:
            ok = np.ones(batch, dtype=bool)
        out.extend(cand[ok][: m_near - len(out)])
    return np.asarray(out)


def sample_uniform_noise(truth: GroundTruth, m_uniform, box_scale=1.5, seed=0):
    """Uniform points in the centres' bounding box (padded by the ball radius), scaled about its middle."""
    C = truth.centers
    d = C.shape[1]
    if m_uniform == 0:
        return np.zeros((0, d))
    rng = _rng(seed)
    lo, hi = _bbox(C)
    mid, half = (lo + hi) / 2, box_scale * (hi - lo) / 2
    return mid - half + rng.random((m_uniform, d)) * 2 * half


def uniform_box(truth: GroundTruth, box_scale=1.5):
    lo, hi = _bbox(truth.centers)
    mid, half = (lo + hi) / 2, box_scale * (hi - lo) / 2
    return mid - half, mid + half


def generate(config: BallModelConfig, noise: NoiseConfig = None) -> Instance:
    """Balls first, then margin noise N1, far noise N2, uniform noise."""
    noise = noise or NoiseConfig()
    ss_c, ss_b = np.random.SeedSequence(config.seed).spawn(2)
    ss_near, ss_far, ss_unif = np.random.SeedSequence(noise.seed).spawn(3)
    centers = place_centers(config.k, config.d, config.delta, np.random.default_rng(ss_c))
    ball_rng = np.random.default_rng(ss_b)
    balls = [sample_unit_ball(c, config.n, config.d, ball_rng) for c in centers]
    realised = float(pdist(centers).min()) if config.k > 1 else float("inf")

    idx = 0
    members = []
    for _ in range(config.k):
        members.append(np.arange(idx, idx + config.n))
        idx += config.n
    truth = GroundTruth(centers=centers, ball_members=members, delta=float(config.delta),
                       min_center_distance=realised)
    structured = np.concatenate(balls)

    near = sample_margin_noise(truth, noise.m_near, noise.margin_alpha, np.random.default_rng(ss_near))
    truth.near_noise = np.arange(idx, idx + len(near))
    idx += len(near)
    far = sample_far_noise(truth, structured, noise.m_far, noise.far_factor, np.random.default_rng(ss_far))
    truth.far_noise = np.arange(idx, idx + len(far))
    idx += len(far)
    unif = sample_uniform_noise(truth, noise.m_uniform, noise.box_scale, np.random.default_rng(ss_unif))
    truth.uniform_noise = np.arange(idx, idx + len(unif))

    d = config.d
    X = np.concatenate([structured, near.reshape(-1, d), far.reshape(-1, d), unif.reshape(-1, d)])
    inst = Instance(PointSet(X), truth, config, noise)
    audit(inst)
    return inst


def audit(inst: Instance, tol=1e-9):
    """Raise AssertionError if the instance violates any of its generation guarantees."""
    X, t = inst.points.points, inst.truth
    all_idx = np.concatenate([t.structured, t.near_noise, t.far_noise, t.uniform_noise])
    assert np.array_equal(np.sort(all_idx), np.arange(X.shape[0])), "index sets must partition the points"
    for c, b in zip(t.centers, t.ball_members):
        assert np.all(np.linalg.norm(X[b] - c, axis=1) <= 1.0 + tol), "ball member outside unit ball"
    if t.k > 1:
        assert pdist(t.centers).min() >= t.delta - tol, "centre separation below delta"
    if len(t.far_noise) and len(t.structured):
        need = inst.noise.far_factor * t.delta
        assert cdist(X[t.far_noise], X[t.structured]).min() >= need - tol, "far noise too close"
    if len(t.near_noise) and t.k > 1:
        dist = cdist(X[t.near_noise], t.centers)
        iu = np.triu_indices(t.k, 1)
        assert np.abs(dist[:, iu[0]] - dist[:, iu[1]]).min() >= inst.noise.margin_alpha - tol, "margin violated"
    return True


def planted_clustering(truth: GroundTruth, points) -> Clustering:
    X = points.points if isinstance(points, PointSet) else np.asarray(points)
    lab = np.full(X.shape[0], NOISE, dtype=np.int64)
    for p, b in enumerate(truth.ball_members):
        lab[b] = p
    if len(truth.near_noise):
        lab[truth.near_noise] = cdist(X[truth.near_noise], truth.centers).argmin(axis=1)
    return Clustering(lab, truth.k)


def instance_stats(truth: GroundTruth, points) -> InstanceStats:
    """n, rho, theta and sigma_max^2 of the centre-subtracted structured points."""
    X = points.points if isinstance(points, PointSet) else np.asarray(points)
    sizes = np.array([len(b) for b in truth.ball_members])
    n_min = int(sizes.min())
    rho = float(sizes.sum() / (n_min * len(sizes)))
    shifted = np.concatenate([X[b] - c for c, b in zip(truth.centers, truth.ball_members)])
    theta = float((shifted ** 2).sum(axis=1).mean()) if len(shifted) else 0.0
    sigma = float(np.linalg.norm(shifted, 2)) if len(shifted) else 0.0
    return InstanceStats(n_min=n_min, rho=rho, theta=theta, sigma_max_sq=sigma ** 2)


def config_dict(config: BallModelConfig, noise: NoiseConfig):
    return {"ball": asdict(config), "noise": asdict(noise)}
