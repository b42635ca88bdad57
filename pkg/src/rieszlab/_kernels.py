"""Hot numeric kernels: batch quasi-norms and pairwise singular-kernel blocks.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy twin.
The active backend is chosen once at import time from the environment
variable ``RIESZLAB_NUMBA`` ("0" forces the numpy path); if numba is not
importable the numpy path is used automatically.

Parallel numba kernels iterate with ``prange`` over independent output rows
and accumulate each row sequentially, so results are bit-identical for any
thread count.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("RIESZLAB_NUMBA", "1") in ("0", "false", "no")
USE_NUMBA = _HAVE_NUMBA and not _DISABLED

# integer codes shared by both backends
LAW_ABELIAN = 0
LAW_HEISENBERG = 1

NORM_EUCLIDEAN = 0
NORM_MAX = 1
NORM_SUM = 2
NORM_KORANYI = 3


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    """Set the numba thread count; a no-op on the numpy backend."""
    if USE_NUMBA and n >= 1:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ----------------------------------------------------------------- numpy twins


def _norm_batch_np(X, kind, nu, param):
    X = np.atleast_2d(X)
    if kind == NORM_EUCLIDEAN:
        return np.sqrt(np.einsum("ij,ij->i", X, X))
    if kind == NORM_MAX:
        return np.max(np.abs(X) ** (1.0 / nu), axis=1)
    if kind == NORM_SUM:
        return np.sum(np.abs(X) ** (param / nu), axis=1) ** (1.0 / param)
    if kind == NORM_KORANYI:
        n = (X.shape[1] - 1) // 2
        s = np.einsum("ij,ij->i", X[:, : 2 * n], X[:, : 2 * n])
        return (s * s + param * X[:, -1] ** 2) ** 0.25
    raise ValueError(f"unknown norm kind code {kind}")


def _left_diff_np(law, nh, X, Y):
    """Pairwise y^{-1} x for eval points X (M,N) and samples Y (c,N) -> (M,c,N)."""
    Z = X[:, None, :] - Y[None, :, :]
    if law == LAW_HEISENBERG:
        a_x, b_x = X[:, :nh], X[:, nh : 2 * nh]
        a_y, b_y = Y[:, :nh], Y[:, nh : 2 * nh]
        # t component of (-y) . x gains -(1/2)(a_y . b_x - b_y . a_x)
        Z[:, :, -1] -= 0.5 * (a_y @ b_x.T - b_y @ a_x.T).T
    return Z


def _kernel_block_np(X, xnorm, Y, ynorm, law, nh, kind, nu, param,
                     lam, d_min, d_max, zone):
    Z = _left_diff_np(law, nh, X, Y)
    d = _norm_batch_np(Z.reshape(-1, X.shape[1]), kind, nu, param)
    d = d.reshape(X.shape[0], Y.shape[0])
    mask = (d > d_min) & (d <= d_max)
    if zone == 1:
        mask &= ynorm[None, :] <= 0.5 * xnorm[:, None]
    elif zone == 2:
        mask &= (ynorm[None, :] > 0.5 * xnorm[:, None]) & (
            ynorm[None, :] < 2.0 * xnorm[:, None]
        )
    elif zone == 3:
        mask &= ynorm[None, :] >= 2.0 * xnorm[:, None]
    with np.errstate(divide="ignore"):
        K = np.where(mask, d, 1.0) ** (-lam)
    K[~mask] = 0.0
    return K


def _translate_norm_block_np(X, W, law, nh, kind, nu, param):
    """Norms |x_i . w_k^{-1}| for eval points X (M,N), rule nodes W (K,N)."""
    Z = X[:, None, :] + (-W)[None, :, :]
    if law == LAW_HEISENBERG:
        a_x, b_x = X[:, :nh], X[:, nh : 2 * nh]
        a_w, b_w = W[:, :nh], W[:, nh : 2 * nh]
        # x . (-w): t component gains +(1/2)(a_x . (-b_w) - b_x . (-a_w))
        Z[:, :, -1] += 0.5 * (-(a_x @ b_w.T) + b_x @ a_w.T)
    return Z, _norm_batch_np(Z.reshape(-1, X.shape[1]), kind, nu, param).reshape(
        X.shape[0], W.shape[0]
    )


# ----------------------------------------------------------------- numba path

if USE_NUMBA:

    @njit(cache=True)
    def _norm_one(row, kind, nu, param):
        N = row.shape[0]
        if kind == NORM_EUCLIDEAN:
            s = 0.0
            for j in range(N):
                s += row[j] * row[j]
            return np.sqrt(s)
        if kind == NORM_MAX:
            m = 0.0
            for j in range(N):
                v = abs(row[j]) ** (1.0 / nu[j])
                if v > m:
                    m = v
            return m
        if kind == NORM_SUM:
            s = 0.0
            for j in range(N):
                s += abs(row[j]) ** (param / nu[j])
            return s ** (1.0 / param)
        # Koranyi
        n = (N - 1) // 2
        s = 0.0
        for j in range(2 * n):
            s += row[j] * row[j]
        return (s * s + param * row[N - 1] * row[N - 1]) ** 0.25

    @njit(parallel=True, cache=True)
    def _norm_batch_nb(X, kind, nu, param):
        m = X.shape[0]
        out = np.empty(m)
        for i in prange(m):
            out[i] = _norm_one(X[i], kind, nu, param)
        return out

    @njit(parallel=True, cache=True)
    def _kernel_block_nb(X, xnorm, Y, ynorm, law, nh, kind, nu, param,
                         lam, d_min, d_max, zone):
        M, N = X.shape
        c = Y.shape[0]
        out = np.zeros((M, c))
        for i in prange(M):
            z = np.empty(N)
            for j in range(c):
                yn = ynorm[j]
                if zone == 1 and yn > 0.5 * xnorm[i]:
                    continue
                if zone == 2 and (yn <= 0.5 * xnorm[i] or yn >= 2.0 * xnorm[i]):
                    continue
                if zone == 3 and yn < 2.0 * xnorm[i]:
                    continue
                for k in range(N):
                    z[k] = X[i, k] - Y[j, k]
                if law == LAW_HEISENBERG:
                    tcorr = 0.0
                    for k in range(nh):
                        tcorr += Y[j, k] * X[i, nh + k] - Y[j, nh + k] * X[i, k]
                    z[N - 1] -= 0.5 * tcorr
                d = _norm_one(z, kind, nu, param)
                if d > d_min and d <= d_max:
                    out[i, j] = d ** (-lam)
        return out

    @njit(parallel=True, cache=True)
    def _translate_norm_block_nb(X, W, law, nh, kind, nu, param):
        M, N = X.shape
        K = W.shape[0]
        Z = np.empty((M, K, N))
        norms = np.empty((M, K))
        for i in prange(M):
            for j in range(K):
                for k in range(N):
                    Z[i, j, k] = X[i, k] - W[j, k]
                if law == LAW_HEISENBERG:
                    tcorr = 0.0
                    for k in range(nh):
                        tcorr += X[i, k] * W[j, nh + k] - X[i, nh + k] * W[j, k]
                    Z[i, j, N - 1] -= 0.5 * tcorr
                norms[i, j] = _norm_one(Z[i, j], kind, nu, param)
        return Z, norms


# ----------------------------------------------------------------- dispatchers


def norm_batch(X, kind, nu, param):
    """Quasi-norm of each row of X (m, N) -> (m,)."""
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    if USE_NUMBA:
        return _norm_batch_nb(X, kind, nu, float(param))
    return _norm_batch_np(X, kind, nu, float(param))


def kernel_block(X, xnorm, Y, ynorm, law, nh, kind, nu, param, lam,
                 d_min=0.0, d_max=np.inf, zone=0):
    """Masked pairwise kernel values |y_j^{-1} x_i|^{-lam}, shape (M, c).

    Entries with distance outside (d_min, d_max] are zero; ``zone`` further
    restricts sample norms relative to the eval-point norm (1: |y|<=|x|/2,
    2: |x|/2<|y|<2|x|, 3: |y|>=2|x|, 0: unrestricted).
    """
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    Y = np.ascontiguousarray(np.atleast_2d(Y), dtype=np.float64)
    xnorm = np.ascontiguousarray(xnorm, dtype=np.float64)
    ynorm = np.ascontiguousarray(ynorm, dtype=np.float64)
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    args = (X, xnorm, Y, ynorm, int(law), int(nh), int(kind), nu,
            float(param), float(lam), float(d_min), float(d_max), int(zone))
    if USE_NUMBA:
        return _kernel_block_nb(*args)
    return _kernel_block_np(*args)


def translate_norm_block(X, W, law, nh, kind, nu, param):
    """Points x_i . w_j^{-1} (M, K, N) and their quasi-norms (M, K)."""
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    W = np.ascontiguousarray(np.atleast_2d(W), dtype=np.float64)
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    if USE_NUMBA:
        return _translate_norm_block_nb(X, W, int(law), int(nh), int(kind), nu,
                                        float(param))
    return _translate_norm_block_np(X, W, int(law), int(nh), int(kind), nu,
                                    float(param))


# Exported twins for the benchmark and for cross-backend tests.
def numpy_impls():
    return {
        "norm_batch": _norm_batch_np,
        "kernel_block": _kernel_block_np,
        "translate_norm_block": _translate_norm_block_np,
    }


def numba_impls():
    if not USE_NUMBA:
        return None
    return {
        "norm_batch": _norm_batch_nb,
        "kernel_block": _kernel_block_nb,
        "translate_norm_block": _translate_norm_block_nb,
    }
