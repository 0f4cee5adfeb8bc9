"""Low-pass polynomial filters and their fast application to signal blocks.

The ideal low-pass (indicator of [0, cutoff]) is expanded in the
Chebyshev basis over [0, lam_max] via Chebyshev-Gauss quadrature, with
optional damping factors that trade transition sharpness for the
suppression of the oscillatory overshoot of the plain truncated series.
Application to a dense block costs exactly ``degree`` sparse
matrix-block products through the three-term recurrence and never forms
a dense N x N operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counters import OpCounter
from .graphs import LaplacianOperator
from .kernels import cheb_step

__all__ = [
    "PolyFilter",
    "gaussian_signals",
    "jackson_coefficients",
    "ideal_lowpass_coeffs",
    "apply_filter",
    "exact_filter",
]


def gaussian_signals(n: int, d: int, seed) -> np.ndarray:
    """(n, d) block of i.i.d. Gaussian entries with mean 0, variance 1/d.

    Each column is generated from its own seed stream derived from
    (seed, column index), so columns are independent and any column can
    be reproduced in isolation. ``seed`` may be an int or a sequence of
    ints (a sub-stream key).
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    base = list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]
    out = np.empty((n, d))
    scale = 1.0 / np.sqrt(d)
    for j in range(d):
        rng = np.random.default_rng(np.random.SeedSequence(base + [j]))
        out[:, j] = rng.standard_normal(n) * scale
    return out


def jackson_coefficients(m: int) -> np.ndarray:
    """Damping factors g_0..g_m for a degree-m Chebyshev expansion.

    g_j = ((m+2-j) cos(j a) + sin(j a) cot(a)) / (m+2) with a = pi/(m+2);
    g_0 = 1 and the factors decay smoothly to ~0 at j = m, which keeps
    the damped partial sum inside [0, 1] up to quadrature error.
    """
    a = np.pi / (m + 2)
    j = np.arange(m + 1)
    return ((m + 2 - j) * np.cos(j * a) + np.sin(j * a) / np.tan(a)) / (m + 2)


@dataclass(frozen=True)
class PolyFilter:
    """Degree-m Chebyshev approximation of a spectral kernel on [0, lam_max].

    ``coeffs`` follow the half-c0 convention: the evaluated series is
    0.5 * coeffs[0] + sum_{j>=1} coeffs[j] * T_j(x) with
    x = (2 lam - lam_max) / lam_max.
    """

    degree: int
    coeffs: np.ndarray
    lam_max: float
    cutoff: float
    damping: str

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.degree + 1,):
            raise ValueError("coeffs must have degree + 1 entries")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, lam):
        """Evaluate the polynomial at scalar or array eigenvalue(s)."""
        lam = np.asarray(lam, dtype=np.float64)
        x = (2.0 * lam - self.lam_max) / self.lam_max
        c = self.coeffs
        t_old = np.ones_like(x)
        acc = 0.5 * c[0] * t_old
        if self.degree >= 1:
            t_cur = x.copy()
            acc = acc + c[1] * t_cur
            for j in range(2, self.degree + 1):
                t_new = 2.0 * x * t_cur - t_old
                acc = acc + c[j] * t_new
                t_old, t_cur = t_cur, t_new
        return acc if acc.shape else float(acc)


def ideal_lowpass_coeffs(cutoff: float, lam_max: float, m: int,
                         damping: str = "jackson") -> PolyFilter:
    """Chebyshev expansion of the indicator of [0, cutoff] on [0, lam_max].

    Coefficients come from Chebyshev-Gauss quadrature at 2(m+1) nodes;
    ``damping="jackson"`` multiplies coefficient j by the order-m damping
    factor, ``"none"`` keeps the raw truncated series.
    """
    if not 0 < cutoff < lam_max:
        raise ValueError(f"need 0 < cutoff < lam_max, got cutoff={cutoff}, lam_max={lam_max}")
    if m < 1:
        raise ValueError("polynomial degree must be >= 1")
    if damping not in ("none", "jackson"):
        raise ValueError(f"unknown damping {damping!r}")
    n_nodes = 2 * (m + 1)
    theta = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    lam_nodes = 0.5 * lam_max * (np.cos(theta) + 1.0)
    g = (lam_nodes <= cutoff).astype(np.float64)
    j = np.arange(m + 1)
    coeffs = (2.0 / n_nodes) * (np.cos(np.outer(j, theta)) @ g)
    if damping == "jackson":
        coeffs = coeffs * jackson_coefficients(m)
    return PolyFilter(m, coeffs, float(lam_max), float(cutoff), damping)


def apply_filter(op: LaplacianOperator, filt: PolyFilter, x: np.ndarray,
                 counter: OpCounter | None = None, backend: str | None = None) -> np.ndarray:
    """Apply the filter polynomial of the Laplacian to a signal block.

    Computes p(L) @ x by the shifted Chebyshev recurrence: exactly
    ``filt.degree`` sparse matrix-block products, each recorded on
    ``counter`` when given.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.shape[0] != op.n_vertices:
        raise ValueError(
            f"signal block has {x.shape[0]} rows, Laplacian has {op.n_vertices} vertices"
        )
    if filt.lam_max < op.lambda_max_bound * (1.0 - 1e-12):
        raise ValueError("filter interval does not cover the Laplacian spectrum bound")

    half = 0.5 * filt.lam_max  # shift a2 and scale a1 coincide for [0, lam_max]
    c = filt.coeffs
    m = filt.degree
    d = x.shape[1]
    lap = op.matrix

    acc = (0.5 * c[0]) * x
    if m == 0:
        return acc[:, 0] if squeeze else acc
    # T1 = L~ x obtained by passing t_old = x with beta = 0
    buffers = [np.empty_like(x) for _ in range(3)]
    t_old = x
    t_cur = cheb_step(lap, x, x, 1.0 / half, 0.0, out=buffers[0], backend=backend,
                      acc=acc, acc_coeff=c[1])
    if counter is not None:
        counter.record_spmm(d)
    ptr = 1
    for jj in range(2, m + 1):
        out = buffers[ptr]
        cheb_step(lap, t_cur, t_old, 2.0 / half, -2.0, out=out, backend=backend,
                  acc=acc, acc_coeff=c[jj])
        if counter is not None:
            counter.record_spmm(d)
        t_old, t_cur = t_cur, out
        ptr = (ptr + 1) % 3
    return acc[:, 0] if squeeze else acc


def exact_filter(basis: np.ndarray, eigenvalues: np.ndarray, g, x: np.ndarray) -> np.ndarray:
    """Dense oracle for graph filtering: U g(Lambda) U^T x.

    ``g`` is a scalar function applied elementwise to the eigenvalues.
    Only valid below the oracle size cap.
    """
    from .oracle import ORACLE_CAP_ENV, oracle_cap

    n = basis.shape[0]
    if n > oracle_cap():
        raise ValueError(
            f"exact_filter refuses N={n} > cap {oracle_cap()}; raise {ORACLE_CAP_ENV}"
        )
    gvals = np.asarray(g(np.asarray(eigenvalues, dtype=np.float64)), dtype=np.float64)
    return basis @ (gvals[:, None] * (basis.T @ x))
