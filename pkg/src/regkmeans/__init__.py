"""Regularised k-means through SDP and LP relaxations, with dual certificates."""
from ._kernels import BACKEND
from .core import NOISE, Clustering, PairMetrics, PointSet, clustering_distance, pair_metrics, regularised_cost
from .relax import LP, SDP, RelaxedProblem, RelaxedSolution, SolverConfig, build_problem, solve
from .rounding import RoundingConfig, assign_noise_to_clusters, round_solution
from .certificate import certify_sdp, lp_certificate
from .synth import BallModelConfig, NoiseConfig, generate
from .baseline import LloydConfig, lloyd

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "NOISE", "Clustering", "PairMetrics", "PointSet", "clustering_distance", "pair_metrics",
    "regularised_cost", "LP", "SDP", "RelaxedProblem", "RelaxedSolution", "SolverConfig", "build_problem",
    "solve", "RoundingConfig", "assign_noise_to_clusters", "round_solution", "certify_sdp", "lp_certificate",
    "BallModelConfig", "NoiseConfig", "generate", "LloydConfig", "lloyd",
]
