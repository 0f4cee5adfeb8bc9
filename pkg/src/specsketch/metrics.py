"""Embedding quality metrics, k-means assignment, and partition scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "Partition",
    "mean_energy",
    "kmeans",
    "adjusted_rand",
    "modularity",
]


@dataclass(frozen=True)
class Partition:
    """Cluster labels in [0, k). Empty clusters are permitted."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise ValueError("labels must be one dimensional")
        if lab.size and (lab.min() < 0 or lab.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def mean_energy(basis: np.ndarray, reference: np.ndarray) -> float:
    """Fraction of the reference eigenspace captured by the basis:
    (1/k) ||basis^T reference||_F^2, in [0, 1] for orthonormal inputs and
    invariant to right-rotation of either argument."""
    basis = np.asarray(basis)
    reference = np.asarray(reference)
    if basis.shape != reference.shape:
        raise ValueError(f"shape mismatch: {basis.shape} vs {reference.shape}")
    k = basis.shape[1]
    overlap = basis.T @ reference
    return float(np.sum(overlap * overlap)) / k


def _squared_distances(rows, centers):
    d2 = (
        np.einsum("ij,ij->i", rows, rows)[:, None]
        - 2.0 * (rows @ centers.T)
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeans_pp_init(rows, k, rng):
    n = rows.shape[0]
    centers = np.empty((k, rows.shape[1]))
    centers[0] = rows[rng.integers(n)]
    closest = _squared_distances(rows, centers[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[c] = rows[rng.integers(n)]
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(closest), r))
        idx = min(idx, n - 1)
        centers[c] = rows[idx]
        closest = np.minimum(closest, _squared_distances(rows, centers[c : c + 1]).ravel())
    return centers


def _lloyd(rows, centers, max_iter):
    """Lloyd iterations; returns (labels, wcss, wcss_history).

    Empty clusters keep their previous centroid. The history is the WCSS
    after each assignment step and is non-increasing.
    """
    k = centers.shape[0]
    labels = np.zeros(rows.shape[0], dtype=np.int64)
    history = []
    for _ in range(max_iter):
        d2 = _squared_distances(rows, centers)
        new_labels = d2.argmin(axis=1)
        wcss = float(d2[np.arange(rows.shape[0]), new_labels].sum())
        history.append(wcss)
        if history[:-1] and new_labels.shape == labels.shape and (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = rows[mask].mean(axis=0)
    return labels, history[-1], history


def kmeans(rows: np.ndarray, k: int, seed: int = 0, max_iter: int = 300,
           restarts: int = 10) -> Partition:
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts`` by
    within-cluster sum of squares (ties broken by lowest restart index).
    Deterministic given the seed. Degenerate inputs (all rows identical)
    collapse into one effective cluster; the others stay empty.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if k > rows.shape[0]:
        raise ValueError(f"k={k} exceeds number of rows {rows.shape[0]}")
    if k < 1:
        raise ValueError("k must be >= 1")
    best_labels, best_wcss = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        centers = _kmeans_pp_init(rows, k, rng)
        labels, wcss, _ = _lloyd(rows, centers, max_iter)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return Partition(best_labels, k)


def adjusted_rand(a: Partition, b: Partition) -> float:
    """Adjusted Rand index between two partitions of the same items.

    1 for identical partitions up to relabeling, ~0 in expectation for
    independent ones. Computed from the contingency table.
    """
    if a.n != b.n:
        raise ValueError("partitions must cover the same number of items")
    n = a.n
    contingency = np.bincount(a.labels * b.k + b.labels, minlength=a.k * b.k)
    contingency = contingency.reshape(a.k, b.k).astype(np.float64)

    def comb2(x):
        return x * (x - 1.0) / 2.0

    sum_cells = comb2(contingency).sum()
    sum_rows = comb2(contingency.sum(axis=1)).sum()
    sum_cols = comb2(contingency.sum(axis=0)).sum()
    total = comb2(np.float64(n))
    expected = sum_rows * sum_cols / total if total > 0 else 0.0
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def modularity(graph: Graph, partition: Partition) -> float:
    """Newman modularity of a weighted partition:
    Q = sum_c [ intra_c / total - (degree_sum_c / (2 total))^2 ]
    with total the sum of all edge weights."""
    if partition.n != graph.n_vertices:
        raise ValueError("partition must label every vertex")
    w = graph.adjacency
    total = w.sum() / 2.0
    if total <= 0:
        raise ValueError("modularity undefined for an empty graph")
    deg = graph.degrees()
    labels = partition.labels
    onehot = np.zeros((graph.n_vertices, partition.k))
    onehot[np.arange(graph.n_vertices), labels] = 1.0
    intra = np.einsum("ic,ic->c", onehot, w @ onehot) / 2.0
    deg_sum = np.array([deg[labels == c].sum() for c in range(partition.k)])
    return float(np.sum(intra / total - (deg_sum / (2.0 * total)) ** 2))
