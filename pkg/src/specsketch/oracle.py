"""Exact dense eigendecomposition used as the verification reference.

Everything here is O(N^3)/O(N^2) dense work, capped by default at
N = 2000 (override with the ``SPECSKETCH_ORACLE_CAP`` environment
variable). The rest of the library never calls into this module except
when explicitly run in exact-filter mode.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graphs import LaplacianOperator

ORACLE_CAP_ENV = "SPECSKETCH_ORACLE_CAP"
DEFAULT_CAP = 2000


def oracle_cap() -> int:
    raw = os.environ.get(ORACLE_CAP_ENV, "")
    return int(raw) if raw.strip() else DEFAULT_CAP


@dataclass(frozen=True)
class ExactSpectrum:
    """Full ascending spectrum with a deterministic eigenvector sign
    convention (first nonzero component positive)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def basis(self, k: int) -> np.ndarray:
        """First k eigenvectors as columns (smallest eigenvalues)."""
        return self.eigenvectors[:, :k]

    def lambda_k(self, k: int) -> float:
        """k-th smallest eigenvalue (1-indexed, so k=1 gives the smallest)."""
        if not 1 <= k <= self.n:
            raise ValueError(f"k={k} out of range 1..{self.n}")
        return float(self.eigenvalues[k - 1])


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    n = vecs.shape[0]
    thresh = 1e-12 * np.abs(vecs).max(axis=0)
    first = (np.abs(vecs) > thresh[None, :]).argmax(axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs[None, :]


def dense_eigendecomposition(op: LaplacianOperator) -> ExactSpectrum:
    """Full symmetric eigendecomposition of the Laplacian (ascending)."""
    n = op.n_vertices
    cap = oracle_cap()
    if n > cap:
        raise ValueError(
            f"oracle refuses N={n} > cap {cap}; raise {ORACLE_CAP_ENV} to override"
        )
    dense = op.matrix.toarray()
    vals, vecs = np.linalg.eigh(dense)
    vals = np.maximum(vals, 0.0) if vals.min() > -1e-10 else vals
    return ExactSpectrum(vals, _fix_signs(vecs))


def true_count(spectrum: ExactSpectrum, lam: float) -> int:
    """Exact number of eigenvalues <= lam (inclusive)."""
    return int(np.searchsorted(spectrum.eigenvalues, lam, side="right"))
