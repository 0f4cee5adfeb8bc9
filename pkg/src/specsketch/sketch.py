"""Eigenspace approximation from filtered Gaussian random signals.

Pipeline: draw d >= k Gaussian signals, estimate the k-th eigenvalue
unless given, low-pass filter the block at that cutoff, and orthonormalize
the filtered block. With an exact ideal filter the resulting basis spans
the true k-dimensional eigenspace up to a rotation whenever the signal
block is in general position, which fails only on a null set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counters import OpCounter
from .eigencount import estimate_lambda_k_dichotomy, estimate_lambda_k_fast
from .filters import apply_filter, exact_filter, gaussian_signals, ideal_lowpass_coeffs
from .graphs import LaplacianOperator
from .oracle import ExactSpectrum, dense_eigendecomposition

__all__ = [
    "EigenspaceApprox",
    "approximate_eigenspace",
    "raw_sketch",
    "ProjectionStats",
    "gaussian_projection_stats",
]

_RANK_RTOL = 1e-13
_SIGNAL_STREAM = 0xA0


@dataclass(frozen=True)
class EigenspaceApprox:
    """Orthonormal N x k basis approximating the low eigenspace."""

    basis: np.ndarray
    singular_values: np.ndarray
    lambda_k_used: float
    diagnostics: dict

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def _filtered_block(op, lam_k, signals, m, damping, filter_mode, spectrum, counter,
                    backend):
    if filter_mode == "exact":
        if spectrum is None:
            spectrum = dense_eigendecomposition(op)
        return spectrum, exact_filter(
            spectrum.eigenvectors, spectrum.eigenvalues,
            lambda lams: (lams <= lam_k).astype(np.float64), signals,
        )
    lam_c = min(lam_k, op.lambda_max_bound * (1.0 - 1e-12))
    filt = ideal_lowpass_coeffs(lam_c, op.lambda_max_bound, m, damping)
    return spectrum, apply_filter(op, filt, signals, counter=counter, backend=backend)


def _resolve_lambda_k(op, k, d, m, seed, lambda_k, lambda_method, max_iter, tol_eps,
                      damping, filter_mode, spectrum, counter, backend):
    if lambda_k is not None:
        return float(lambda_k), {"lambda_method": "fixed", "lambda_iterations": 0,
                                 "lambda_converged": True, "lambda_history": []}
    if lambda_method == "exact":
        if spectrum is None:
            spectrum = dense_eigendecomposition(op)
        return spectrum.lambda_k(k), {"lambda_method": "exact", "lambda_iterations": 0,
                                      "lambda_converged": True, "lambda_history": []}
    if lambda_method == "fast":
        est = estimate_lambda_k_fast(op, k, d, m, max_iter, seed, damping=damping,
                                     counter=counter, filter_mode=filter_mode,
                                     spectrum=spectrum, backend=backend)
    elif lambda_method == "dichotomy":
        est = estimate_lambda_k_dichotomy(op, k, d, m, tol_eps, seed, damping=damping,
                                          counter=counter, filter_mode=filter_mode,
                                          spectrum=spectrum, backend=backend)
    else:
        raise ValueError(f"unknown lambda_method {lambda_method!r}")
    return est.lambda_est, {"lambda_method": lambda_method,
                            "lambda_iterations": est.iterations,
                            "lambda_converged": est.converged,
                            "lambda_history": est.history}


def approximate_eigenspace(op: LaplacianOperator, k: int, *, d: int | None = None,
                           m: int = 500, seed: int = 0, lambda_k: float | None = None,
                           lambda_method: str = "fast", max_iter: int = 10,
                           tol_eps: float = 0.1, damping: str = "jackson",
                           filter_mode: str = "chebyshev",
                           orthonormalize: str = "svd",
                           spectrum: ExactSpectrum | None = None,
                           backend: str | None = None) -> EigenspaceApprox:
    """Approximate the first k Laplacian eigenvectors up to a rotation.

    Parameters
    ----------
    op : LaplacianOperator
        Laplacian with a certified spectral upper bound.
    k : int
        Target eigenspace dimension (1 <= k <= N).
    d : int, optional
        Number of random signals, default k (must be >= k). Extra
        signals concentrate the sketch's singular values around 1; the
        basis is truncated back to the top-k directions.
    m : int
        Polynomial order of the low-pass approximation.
    lambda_k : float, optional
        Fixed cutoff. When omitted it is estimated per ``lambda_method``
        ("fast", "dichotomy", or "exact" for the dense-oracle value).
    filter_mode : str
        "chebyshev" (sparse recurrence) or "exact" (dense oracle filter,
        for verification at small N).
    orthonormalize : str
        "svd" (default: best rank-k basis of the sketch) or "qr"
        (matches the exact-recovery statement; meaningful with d = k).

    Returns
    -------
    EigenspaceApprox
        Basis (N x k), singular values of the sketch, the cutoff used,
        and run diagnostics including operation counts.
    """
    n = op.n_vertices
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    if d is None:
        d = k
    if d < k:
        raise ValueError(f"need d >= k, got d={d}, k={k}")

    counter = OpCounter()
    signals = gaussian_signals(n, d, [int(seed), _SIGNAL_STREAM])
    lam_k, lam_diag = _resolve_lambda_k(op, k, k, m, seed, lambda_k, lambda_method,
                                        max_iter, tol_eps, damping, filter_mode,
                                        spectrum, counter, backend)
    spectrum, sketch = _filtered_block(op, lam_k, signals, m, damping, filter_mode,
                                       spectrum, counter, backend)

    if orthonormalize == "svd":
        left, svals, _ = np.linalg.svd(sketch, full_matrices=False)
        counter.record_svd(*sketch.shape)
        basis = left[:, :k]
        svals = svals[: min(k, svals.size)]
    elif orthonormalize == "qr":
        basis, r = np.linalg.qr(sketch)
        basis = basis[:, :k]
        svals = np.sort(np.abs(np.diag(r)))[::-1][:k]
    else:
        raise ValueError(f"unknown orthonormalize {orthonormalize!r}")

    if svals.size and svals[-1] <= _RANK_RTOL * max(svals[0], 1e-300):
        raise np.linalg.LinAlgError(
            "filtered sketch is numerically rank deficient; a Gaussian block in "
            "general position avoids this with probability 1, so check the cutoff"
        )

    diagnostics = {
        "m": m, "d": d, "k": k, "seed": seed, "damping": damping,
        "filter_mode": filter_mode, "orthonormalize": orthonormalize,
        **lam_diag, **counter.as_dict(),
    }
    return EigenspaceApprox(basis, svals, lam_k, diagnostics)


def raw_sketch(op: LaplacianOperator, k: int, d: int | None = None,
               lambda_k: float | None = None, m: int = 500, seed: int = 0, *,
               lambda_method: str = "fast", damping: str = "jackson",
               filter_mode: str = "chebyshev", spectrum: ExactSpectrum | None = None,
               counter: OpCounter | None = None,
               backend: str | None = None) -> np.ndarray:
    """Filtered signal block (the pipeline stopped before orthonormalization).

    Its column space already matches the target eigenspace; only the
    column scaling differs, with singular values spread per the
    Marchenko-Pastur quarter circle at d = k and concentrating around 1
    as d grows.
    """
    n = op.n_vertices
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    if d is None:
        d = k
    if d < k:
        raise ValueError(f"need d >= k, got d={d}, k={k}")
    own_counter = counter if counter is not None else OpCounter()
    signals = gaussian_signals(n, d, [int(seed), _SIGNAL_STREAM])
    lam_k, _ = _resolve_lambda_k(op, k, k, m, seed, lambda_k, lambda_method, 10, 0.1,
                                 damping, filter_mode, spectrum, own_counter, backend)
    _, sketch = _filtered_block(op, lam_k, signals, m, damping, filter_mode, spectrum,
                                own_counter, backend)
    return sketch


@dataclass(frozen=True)
class ProjectionStats:
    """Empirical first/second moments of a projected Gaussian block."""

    mean: float
    mean_window: float
    variance: float
    variance_expected: float
    variance_window: float
    covariances: dict
    covariance_window: float
    n_samples: int
    trials: int

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean) < self.mean_window

    @property
    def variance_ok(self) -> bool:
        return abs(self.variance - self.variance_expected) < self.variance_window

    @property
    def covariance_ok(self) -> bool:
        return all(abs(c) < self.covariance_window for c in self.covariances.values())

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.variance_ok and self.covariance_ok

    def as_dict(self) -> dict:
        return {
            "mean": self.mean, "mean_window": self.mean_window,
            "variance": self.variance, "variance_expected": self.variance_expected,
            "variance_window": self.variance_window,
            "covariances": {f"{a}-{b}": c for (a, b), c in self.covariances.items()},
            "covariance_window": self.covariance_window,
            "n_samples": self.n_samples, "trials": self.trials,
            "passed": self.passed,
        }


def gaussian_projection_stats(basis: np.ndarray, d: int, trials: int,
                              seed: int = 0, n_se: float = 4.0) -> ProjectionStats:
    """Check that projecting Gaussian signals onto an orthonormal basis
    preserves their entrywise statistics.

    Draws fresh (N, d) blocks with entry variance 1/d, projects each
    through ``basis`` (rows must be orthonormal, e.g. a square
    eigenvector matrix), and accumulates the empirical mean and variance
    over all entries plus the cross-covariance of a few fixed entry
    pairs. Windows are ``n_se`` standard errors around the exact values
    (mean 0, variance 1/d, covariance 0).
    """
    basis = np.asarray(basis, dtype=np.float64)
    gram = basis @ basis.T
    if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-8):
        raise ValueError("basis rows must be orthonormal")
    n_in = basis.shape[1]
    rows_out = basis.shape[0]
    if d < 1 or trials < 2:
        raise ValueError("need d >= 1 and trials >= 2")
    sigma2 = 1.0 / d

    pair_specs = [((0, 0), (1, 0)), ((0, 0), (0, 1)), ((1, 1), (2, 0))]
    pair_specs = [
        (a, b) for a, b in pair_specs
        if max(a[0], b[0]) < rows_out and max(a[1], b[1]) < d
    ]

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB0]))
    scale = 1.0 / np.sqrt(d)
    total = 0.0
    total_sq = 0.0
    pair_sums = np.zeros(len(pair_specs))
    batch = max(1, min(trials, 200))
    done = 0
    while done < trials:
        nb = min(batch, trials - done)
        block = rng.standard_normal((n_in, d * nb)) * scale
        proj = basis @ block
        total += proj.sum()
        total_sq += float(np.sum(proj * proj))
        cube = proj.reshape(rows_out, nb, d)
        for idx, ((i1, j1), (i2, j2)) in enumerate(pair_specs):
            pair_sums[idx] += float(np.sum(cube[i1, :, j1] * cube[i2, :, j2]))
        done += nb

    n_samples = trials * rows_out * d
    mean = total / n_samples
    variance = total_sq / n_samples - mean**2
    covs = {spec: pair_sums[i] / trials for i, spec in enumerate(pair_specs)}
    return ProjectionStats(
        mean=mean,
        mean_window=n_se * np.sqrt(sigma2 / n_samples),
        variance=variance,
        variance_expected=sigma2,
        variance_window=n_se * sigma2 * np.sqrt(2.0 / (n_samples - 1)),
        covariances=covs,
        covariance_window=n_se * sigma2 / np.sqrt(trials),
        n_samples=n_samples,
        trials=trials,
    )
