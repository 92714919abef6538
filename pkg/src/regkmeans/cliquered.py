"""MAX-CLIQUE to regularised 1-means reduction, with a brute-force oracle.

Vertices become points with squared distance 1 across an edge and
1 + Delta across a non-edge. With lambda0 = m/2 + 1/(4 n^3), a clique of
size q exists iff the best regularised 1-means cost is at most
CLIQUE_CONSTANT * (q - 1) + lambda0 * (n - q).
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np

from . import _kernels
from .core import PointSet, as_array

# within-cluster cost of q mutually unit-distance points is (q - 1) / 2;
# confirmed by calibrate_clique_constant
CLIQUE_CONSTANT = 0.5
MAX_BRUTE_FORCE = 20
AUDIT_TOL = 1e-8


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) out of range for {self.n_vertices} vertices")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n, edges):
        return cls(int(n), frozenset(map(tuple, edges)))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n_vertices, self.n_vertices), dtype=bool)
        for u, v in self.edges:
            A[u, v] = A[v, u] = True
        return A


@dataclass
class ReducedInstance:
    points: PointSet
    lambda0: float
    delta_param: float
    target: np.ndarray  # intended squared-distance matrix


def graph_distance_matrix(graph: Graph, delta_param) -> np.ndarray:
    A = graph.adjacency()
    D = np.where(A, 1.0, 1.0 + delta_param)
    np.fill_diagonal(D, 0.0)
    return D


def embed_squared_distances(D) -> np.ndarray:
    """Classical multidimensional scaling keeping every nonnegative direction (N coordinates)."""
    n = D.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    G = -0.5 * J @ D @ J
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    return V * np.sqrt(np.maximum(w, 0.0))


def build_instance(graph: Graph, delta_param=None) -> ReducedInstance:
    n = graph.n_vertices
    if n < 1:
        raise ValueError("graph must have at least one vertex")
    if delta_param is None:
        delta_param = 1.0 / (2 * n)
    if not 0 < n * delta_param < 1:
        raise ValueError("need 0 < n * delta_param < 1")
    D = graph_distance_matrix(graph, delta_param)
    X = embed_squared_distances(D)
    realised = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    err = float(np.abs(realised - D).max())
    if err > AUDIT_TOL:
        raise ArithmeticError(f"embedding audit failed: max distance error {err:.3e}")
    # a single vertex has no pairs; treat its minimum distance as 1
    m = float(D[~np.eye(n, dtype=bool)].min()) if n > 1 else 1.0
    lam0 = m / 2.0 + 1.0 / (4.0 * n ** 3)
    return ReducedInstance(PointSet(X), lam0, float(delta_param), D)


def brute_force_reg_1means(points, lam):
    """Minimise SSE(S) + lam (N - |S|) over nonempty subsets S.

    Ties go to the larger subset, then the lexicographically smallest.
    Returns (cost, sorted tuple of indices).
    """
    X = as_array(points)
    n = X.shape[0]
    if n > MAX_BRUTE_FORCE:
        raise ValueError(f"brute force limited to {MAX_BRUTE_FORCE} points, got {n}")
    if n == 0:
        raise ValueError("no points")
    cost, mask = _kernels.best_subset_1means(X, float(lam))
    return float(cost), tuple(i for i in range(n) if mask >> i & 1)


def clique_threshold(n, q, lam0, constant=CLIQUE_CONSTANT):
    return constant * (q - 1) + lam0 * (n - q)


@lru_cache(maxsize=65536)
def _optimum(n, edges):
    inst = build_instance(Graph(n, edges))
    cost, subset = brute_force_reg_1means(inst.points, inst.lambda0)
    return cost, subset, inst.lambda0


def clique_decision(graph: Graph, q) -> bool:
    """True iff the reduction says the graph has a clique of size q."""
    n = graph.n_vertices
    if n > MAX_BRUTE_FORCE:
        raise ValueError(f"graph too large for brute force ({n} > {MAX_BRUTE_FORCE})")
    if q <= 1:
        return q <= n
    if q > n:
        return False
    cost, _, lam0 = _optimum(n, graph.edges)
    return cost <= clique_threshold(n, q, lam0) + 1e-9


def calibrate_clique_constant(q_values=range(2, 8)):
    """Per-q ratio (optimum - lambda0 (n - q)) / (q - 1) on complete graphs K_q."""
    out = {}
    for q in q_values:
        g = Graph(q, frozenset(itertools.combinations(range(q), 2)))
        inst = build_instance(g)
        cost, _ = brute_force_reg_1means(inst.points, inst.lambda0)
        out[q] = cost / (q - 1)
    return out


def has_clique(graph: Graph, q) -> bool:
    """Exhaustive clique search, independent of the reduction."""
    if q <= 0:
        return True
    if q > graph.n_vertices:
        return False
    A = graph.adjacency()
    for combo in itertools.combinations(range(graph.n_vertices), q):
        if all(A[u, v] for u, v in itertools.combinations(combo, 2)):
            return True
    return False


def read_edge_list(path) -> Graph:
    """First line "n m", then m lines "u v" with 1-indexed vertices."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: header must be 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"{path}: header announces {m} edges, found {len(body)}")
    edges = []
    for parts in body:
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed edge line {' '.join(parts)!r}")
        edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
    return Graph.from_edges(n, edges)


def write_edge_list(graph: Graph, path):
    with open(path, "w") as fh:
        fh.write(f"{graph.n_vertices} {len(graph.edges)}\n")
        for u, v in sorted(graph.edges):
            fh.write(f"{u + 1} {v + 1}\n")
