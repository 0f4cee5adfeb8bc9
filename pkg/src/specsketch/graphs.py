"""Graph containers, Laplacians, synthetic generators, and file ingestion."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.io import mmread

__all__ = [
    "Graph",
    "PointCloud",
    "LaplacianOperator",
    "laplacian",
    "estimate_lambda_max",
    "build_knn_graph",
    "generate_sbm",
    "generate_swissroll",
    "generate_sensor_cloud",
    "sensor_graph",
    "swissroll_graph",
    "cycle_graph",
    "path_graph",
    "complete_graph",
    "load_graph",
    "save_graph",
]

_SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph stored as a symmetric CSR adjacency.

    Invariants enforced on construction: symmetric weights, strictly
    positive stored entries, zero diagonal.
    """

    adjacency: sparse.csr_array

    def __post_init__(self):
        w = self.adjacency
        if not sparse.issparse(w):
            raise TypeError("adjacency must be a scipy sparse matrix")
        if w.shape[0] != w.shape[1]:
            raise ValueError(f"adjacency must be square, got {w.shape}")
        w = sparse.csr_array(w)
        w.eliminate_zeros()
        if w.nnz and w.data.min() <= 0:
            raise ValueError("edge weights must be strictly positive")
        if w.diagonal().any():
            raise ValueError("self-loops are not allowed (nonzero diagonal)")
        asym = abs(w - w.T)
        if asym.nnz and asym.max() > _SYMMETRY_RTOL * max(w.data.max(), 1.0):
            raise ValueError("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", w)

    @property
    def n_vertices(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()


@dataclass(frozen=True)
class PointCloud:
    """N points in R^p with optional per-point labels (class ids or a
    scalar proxy such as the swissroll angle)."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape[0] != pts.shape[0]:
                raise ValueError("labels length must match number of points")
            object.__setattr__(self, "labels", lab)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class LaplacianOperator:
    """Sparse PSD Laplacian with a certified spectral upper bound."""

    variant: str
    matrix: sparse.csr_array
    lambda_max_bound: float
    degrees: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.matrix.shape[0]


def _graph_from_coo(rows, cols, vals, n) -> Graph:
    w = sparse.coo_array((vals, (rows, cols)), shape=(n, n))
    w = sparse.csr_array(w)
    w = w.maximum(w.T)
    return Graph(w)


def laplacian(graph: Graph, variant: str = "normalized", tol: float = 1e-4) -> LaplacianOperator:
    """Assemble the combinatorial (D - W) or symmetric normalized Laplacian.

    The normalized variant carries the exact spectral bound 2; the
    combinatorial one gets a power-iteration bound with a 1.01 safety
    factor (Gershgorin fallback on non-convergence).
    """
    w = graph.adjacency
    deg = graph.degrees()
    n = graph.n_vertices
    if variant == "combinatorial":
        lap = sparse.csr_array(sparse.diags_array(deg) - w)
        op = LaplacianOperator("combinatorial", lap, 0.0, deg)
        bound = estimate_lambda_max(op, tol)
        return LaplacianOperator("combinatorial", lap, bound, deg)
    if variant == "normalized":
        if np.any(deg == 0):
            bad = int(np.flatnonzero(deg == 0)[0])
            raise ValueError(
                f"normalized Laplacian undefined for isolated vertex {bad} (zero degree)"
            )
        dinv = 1.0 / np.sqrt(deg)
        wn = sparse.csr_array(w.multiply(dinv[:, None]).multiply(dinv[None, :]))
        lap = sparse.csr_array(sparse.eye_array(n) - wn)
        return LaplacianOperator("normalized", lap, 2.0, deg)
    raise ValueError(f"unknown Laplacian variant {variant!r}")


def estimate_lambda_max(op: LaplacianOperator, tol: float = 1e-4, max_iter: int = 500) -> float:
    """Upper bound on the largest eigenvalue via power iteration x 1.01.

    Returns exactly 2 for the normalized variant. Falls back to the
    Gershgorin bound (2 * max degree for the combinatorial Laplacian)
    when power iteration fails to converge within the iteration cap.
    """
    if op.variant == "normalized":
        return 2.0
    lap = op.matrix
    n = lap.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([0x5EC5, n]))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rho_prev = 0.0
    for _ in range(max_iter):
        u = lap @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        rho = float(v @ (lap @ v))
        if abs(rho - rho_prev) <= tol * max(rho, 1e-300):
            return 1.01 * rho
        rho_prev = rho
    return float(2.0 * op.degrees.max())


def build_knn_graph(cloud: PointCloud, k_nn: int, kernel: str = "binary",
                    sigma: float | None = None) -> Graph:
    """Symmetrized k-nearest-neighbor graph from a point cloud.

    An edge is kept when either endpoint selects the other. Distances are
    computed by exact pairwise search (chunked O(N^2), fine at desk
    scale). ``kernel="gaussian"`` weighs edges exp(-dist^2 / sigma^2)
    with sigma defaulting to the mean k_nn-th neighbor distance;
    ``"binary"`` uses unit weights.
    """
    pts = cloud.points
    n = pts.shape[0]
    if k_nn >= n:
        raise ValueError(f"k_nn={k_nn} must be smaller than the number of points {n}")
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    if kernel not in ("binary", "gaussian"):
        raise ValueError(f"unknown kernel {kernel!r}")

    sq = np.einsum("ij,ij->i", pts, pts)
    chunk = max(1, min(n, int(2e7) // max(n, 1)))
    nbr_idx = np.empty((n, k_nn), dtype=np.int64)
    nbr_d2 = np.empty((n, k_nn), dtype=np.float64)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (pts[lo:hi] @ pts.T)
        np.maximum(d2, 0.0, out=d2)
        d2[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
        part = np.argpartition(d2, k_nn - 1, axis=1)[:, :k_nn]
        pd = np.take_along_axis(d2, part, axis=1)
        order = np.argsort(pd, axis=1)
        nbr_idx[lo:hi] = np.take_along_axis(part, order, axis=1)
        nbr_d2[lo:hi] = np.take_along_axis(pd, order, axis=1)

    rows = np.repeat(np.arange(n), k_nn)
    cols = nbr_idx.ravel()
    if kernel == "binary":
        vals = np.ones(rows.size)
    else:
        if sigma is None:
            sigma = float(np.sqrt(nbr_d2[:, -1]).mean())
        if sigma <= 0:
            sigma = 1.0
        vals = np.exp(-nbr_d2.ravel() / sigma**2)
        vals = np.minimum(vals, 1.0)
    return _graph_from_coo(rows, cols, vals, n)


def _sample_pairs_within(rng, members, prob):
    """Bernoulli(prob) edges among unordered pairs of one vertex group."""
    m = members.size
    n_pairs = m * (m - 1) // 2
    if n_pairs == 0 or prob <= 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    count = rng.binomial(n_pairs, prob)
    if count == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    lin = rng.choice(n_pairs, size=count, replace=False)
    # decode triangular linear index t -> (i, j), i < j, row-major upper triangle
    i = (2 * m - 1 - np.sqrt((2 * m - 1) ** 2 - 8 * lin.astype(np.float64))) / 2
    i = np.floor(i).astype(np.int64)
    # guard against float rounding at block boundaries
    base = i * (2 * m - i - 1) // 2
    too_big = base > lin
    i[too_big] -= 1
    base = i * (2 * m - i - 1) // 2
    j = lin - base + i + 1
    return members[i], members[j]


def _sample_pairs_between(rng, members_a, members_b, prob):
    na, nb = members_a.size, members_b.size
    n_pairs = na * nb
    if n_pairs == 0 or prob <= 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    count = rng.binomial(n_pairs, prob)
    if count == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    lin = rng.choice(n_pairs, size=count, replace=False)
    return members_a[lin // nb], members_b[lin % nb]


def generate_sbm(n: int, k: int, eps: float, s: float, seed: int) -> tuple[Graph, np.ndarray]:
    """Stochastic block model with k classes and expected mean degree s.

    Classes are drawn uniformly at random. The intra-class probability p
    solves s = (n/k - 1) p + (n - n/k) q with q = eps * p, so the
    expected average degree equals s regardless of eps. Deterministic
    given the seed.
    """
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= n")
    nc = n / k
    p = s / ((nc - 1.0) + (n - nc) * eps)
    if p > 1.0:
        raise ValueError(
            f"requested mean degree {s} needs intra-class probability {p:.3f} > 1"
        )
    q = eps * p
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, k]))
    labels = rng.integers(0, k, size=n)
    groups = [np.flatnonzero(labels == c) for c in range(k)]
    rows, cols = [], []
    for a in range(k):
        i, j = _sample_pairs_within(rng, groups[a], p)
        rows.append(i)
        cols.append(j)
        for b in range(a + 1, k):
            i, j = _sample_pairs_between(rng, groups[a], groups[b], q)
            rows.append(i)
            cols.append(j)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    graph = _graph_from_coo(rows, cols, np.ones(rows.size), n)
    return graph, labels


def generate_swissroll(n: int, a: float = 1.0, b: float = 4.0, seed: int = 0) -> PointCloud:
    """Swissroll point cloud: x = theta cos(theta), z = theta sin(theta),
    theta uniform in [a*pi, b*pi], y uniform in [0, 1]. The angle theta is
    kept as the per-point label proxy (colormap export)."""
    if not a < b:
        raise ValueError("need a < b")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    theta = rng.uniform(a * np.pi, b * np.pi, size=n)
    y = rng.uniform(0.0, 1.0, size=n)
    pts = np.column_stack([theta * np.cos(theta), y, theta * np.sin(theta)])
    return PointCloud(pts, labels=theta)


def generate_sensor_cloud(n: int, seed: int = 0) -> PointCloud:
    """Randomly positioned sensors: uniform points in the unit square."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, 0x5E50]))
    return PointCloud(rng.uniform(0.0, 1.0, size=(n, 2)))


def sensor_graph(n: int, k_nn: int = 10, seed: int = 0, kernel: str = "binary") -> Graph:
    return build_knn_graph(generate_sensor_cloud(n, seed), k_nn, kernel)


def swissroll_graph(n: int, k_nn: int = 10, seed: int = 0, kernel: str = "binary") -> Graph:
    return build_knn_graph(generate_swissroll(n, seed=seed), k_nn, kernel)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    i = np.arange(n)
    return _graph_from_coo(i, (i + 1) % n, np.ones(n), n)


def path_graph(n: int) -> Graph:
    if n < 2:
        raise ValueError("path needs at least 2 vertices")
    i = np.arange(n - 1)
    return _graph_from_coo(i, i + 1, np.ones(n - 1), n)


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise ValueError("complete graph needs at least 2 vertices")
    i, j = np.triu_indices(n, k=1)
    return _graph_from_coo(i, j, np.ones(i.size), n)


def _load_edge_list(path) -> sparse.coo_array:
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            parts = line.split("#", 1)[0].split("%", 1)[0].split()
            if not parts:
                continue
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{ln}: expected 'src dst [weight]'")
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]) if len(parts) == 3 else 1.0)
    if not rows:
        raise ValueError(f"{path}: no edges found")
    n = max(max(rows), max(cols)) + 1
    return sparse.coo_array((vals, (rows, cols)), shape=(n, n))


def load_graph(path, fmt: str | None = None) -> Graph:
    """Read a graph from Matrix Market or a whitespace edge list.

    The adjacency is symmetrized as max(W, W^T) (with a warning when the
    input is asymmetric beyond tolerance), self-loops are dropped with a
    warning, explicit zeros are discarded, and any negative weight is an
    error. ``fmt`` is inferred from the extension when omitted.
    """
    path = str(path)
    if fmt is None:
        fmt = "matrix-market" if path.endswith((".mtx", ".mm", ".mtx.gz")) else "edge-list"
    if fmt == "matrix-market":
        coo = sparse.coo_array(mmread(path))
        if coo.shape[0] != coo.shape[1]:
            raise ValueError(f"{path}: adjacency must be square, got {coo.shape}")
    elif fmt == "edge-list":
        coo = _load_edge_list(path)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")

    if coo.nnz and coo.data.min() < 0:
        raise ValueError(f"{path}: negative edge weights are not allowed")
    w = sparse.csr_array(coo)
    w.eliminate_zeros()
    if w.diagonal().any():
        warnings.warn(f"{path}: dropping self-loop entries", stacklevel=2)
        w = sparse.csr_array(w - sparse.diags_array(w.diagonal()))
        w.eliminate_zeros()
    asym = abs(w - w.T)
    if asym.nnz and asym.max() > _SYMMETRY_RTOL * max(w.data.max(), 1.0):
        warnings.warn(f"{path}: asymmetric input, symmetrizing as max(W, W^T)", stacklevel=2)
    return Graph(w.maximum(w.T))


def save_graph(graph: Graph, path) -> None:
    from scipy.io import mmwrite

    mmwrite(str(path), sparse.coo_matrix(graph.adjacency), symmetry="symmetric")
