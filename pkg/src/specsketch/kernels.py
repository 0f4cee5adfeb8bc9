"""Hot numeric kernels with a numba fast path and a numpy/scipy fallback.

The single hot loop of the whole library is the three-term Chebyshev
recurrence step, which is a CSR sparse-matrix times dense-block product
fused with two axpy updates and an optional accumulation:

    out = alpha * (A @ t_cur) + beta * t_cur - t_old
    acc += acc_coeff * out          (when acc is given)

The numba implementation parallelizes over rows; each output row is
computed by exactly one thread with a fixed summation order, so results
are bit-identical regardless of the thread count.

Backend selection: the ``SPECSKETCH_NO_NUMBA`` environment variable (any
value other than empty/``0``) forces the numpy path. Otherwise numba is
used when importable. Individual calls may override via ``backend=``,
which is what the kernel benchmark does to time both paths.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import sparse

DISABLE_ENV = "SPECSKETCH_NO_NUMBA"

try:
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def numba_disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip() not in ("", "0")


def default_backend() -> str:
    if HAS_NUMBA and not numba_disabled_by_env():
        return "numba"
    return "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def set_num_threads(n: int) -> None:
    """Cap the numba worker count (no-op on the numpy path)."""
    if HAS_NUMBA:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def _cheb_step_numba(indptr, indices, data, t_cur, t_old, alpha, beta, out,
                         acc, acc_coeff):
        n, d = t_cur.shape
        for i in prange(n):
            for j in range(d):
                out[i, j] = beta * t_cur[i, j] - t_old[i, j]
            for p in range(indptr[i], indptr[i + 1]):
                w = alpha * data[p]
                col = indices[p]
                for j in range(d):
                    out[i, j] += w * t_cur[col, j]
            if acc_coeff != 0.0:
                for j in range(d):
                    acc[i, j] += acc_coeff * out[i, j]


def _cheb_step_numpy(matrix, t_cur, t_old, alpha, beta, out, acc, acc_coeff):
    tmp = matrix @ t_cur
    np.multiply(tmp, alpha, out=out)
    out += beta * t_cur
    out -= t_old
    if acc_coeff != 0.0:
        acc += acc_coeff * out
    return out


def cheb_step(matrix, t_cur, t_old, alpha, beta, out=None, backend=None,
              acc=None, acc_coeff=0.0):
    """One fused recurrence step ``alpha*(A @ t_cur) + beta*t_cur - t_old``.

    `matrix` is a scipy CSR array/matrix; `t_cur`, `t_old` are dense
    C-contiguous (n, d) float64 blocks. Counts as a single sparse
    matrix-block product. When ``acc`` is given, ``acc_coeff * out`` is
    folded into it in the same pass.
    """
    if backend is None:
        backend = default_backend()
    if out is None:
        out = np.empty_like(t_cur)
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        acc_arr = out if acc is None else acc
        _cheb_step_numba(
            matrix.indptr, matrix.indices, matrix.data, t_cur, t_old,
            float(alpha), float(beta), out, acc_arr,
            0.0 if acc is None else float(acc_coeff),
        )
        return out
    if backend == "numpy":
        return _cheb_step_numpy(matrix, t_cur, t_old, alpha, beta, out,
                                acc, 0.0 if acc is None else float(acc_coeff))
    raise ValueError(f"unknown backend {backend!r}")


def warmup(backend=None) -> None:
    """Trigger JIT compilation on a tiny problem so timings are clean."""
    a = sparse.csr_array(np.array([[0.0, 1.0], [1.0, 0.0]]))
    x = np.ones((2, 2))
    acc = np.zeros_like(x)
    cheb_step(a, x, x, 1.0, 0.0, backend=backend, acc=acc, acc_coeff=0.5)
