"""Dense linear-algebra kernels: truncated SVD, GSVD of a (diagonal, dense)
pair, and Lawson-Hanson nonnegative least squares.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. All functions
are pure; inputs are never modified.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TruncatedSvd",
    "GsvdResult",
    "NnlsError",
    "as_matrix",
    "truncated_svd",
    "gsvd_pair",
    "numerical_rank",
    "nnls",
]


class NnlsError(RuntimeError):
    """Raised when the active-set NNLS solver exceeds its iteration cap."""


def as_matrix(x, name="x", ndim=2):
    """Return `x` as a finite float64 array with `ndim` dimensions."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class TruncatedSvd:
    """Top-`rank` singular triplets ``x ~= u @ diag(sigma) @ v.T``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def _fix_signs(u, v):
    # largest-magnitude entry of each column of u made positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def truncated_svd(x, r):
    """Best rank-`r` approximation of `x` via its top singular triplets.

    Parameters
    ----------
    x : (m, n) array_like
        Finite real matrix.
    r : int
        Number of triplets, ``1 <= r <= min(m, n)``.

    Returns
    -------
    TruncatedSvd
        ``u`` (m, r) and ``v`` (n, r) with orthonormal columns and ``sigma``
        non-increasing. Signs are fixed so the entry of largest magnitude in
        each column of ``u`` is positive.
    """
    x = as_matrix(x)
    r = int(r)
    if not 1 <= r <= min(x.shape):
        raise ValueError(f"rank {r} out of range [1, {min(x.shape)}]")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    u, v = _fix_signs(u[:, :r], vt[:r].T)
    return TruncatedSvd(u=np.ascontiguousarray(u), sigma=s[:r].copy(), v=np.ascontiguousarray(v))


def numerical_rank(b):
    """Rank of `b` with threshold ``100 * n * ||b||_2 * eps``."""
    s = np.linalg.svd(b, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = 100.0 * max(b.shape) * s[0] * np.finfo(np.float64).eps
    return int(np.count_nonzero(s > tol))


@dataclass(frozen=True)
class GsvdResult:
    """Shared-factor decomposition ``a = m1 d1 q.T``, ``b = m2 d2 q.T``.

    ``d1 = diag(I, C)`` and ``d2 = [[0, G], [0, 0]]`` with ``C``, ``G`` the
    trailing ``l`` diagonal entries stored in ``c`` and ``g``. The first
    ``n - l`` generalized singular values are infinite; the finite ones are
    ``c / g`` and appear in non-increasing order.
    """

    m1: np.ndarray
    m2: np.ndarray
    q: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    c: np.ndarray
    g: np.ndarray
    l: int

    @property
    def lambdas(self):
        """Squared generalized singular values, infinite entries first."""
        n = self.q.shape[0]
        return np.concatenate([np.full(n - self.l, np.inf), (self.c / self.g) ** 2])


def gsvd_pair(a, b):
    """GSVD of a positive diagonal matrix `a` and a square matrix `b`.

    Because `a` is invertible, the pair is reduced to the SVD of
    ``T = b a^-1 = P S R^T``. With ``c = 1/sqrt(1+s^2)``, ``g = s c`` and
    ``q^T = diag(1/c) R^T a`` both identities hold with ``m1 = R`` and
    ``m2 = P`` (columns permuted into the block layout). The rank ``l`` of
    `b` is decided by :func:`numerical_rank`; the ``n - l`` smallest
    singular values of ``T`` are treated as exact zeros.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n, n):
        raise ValueError(f"need two square matrices of equal size, got {a.shape} and {b.shape}")
    diag = np.diag(a)
    if np.any(a - np.diag(diag)) or np.any(diag <= 0):
        raise ValueError("first operand must be diagonal with positive diagonal")

    l = numerical_rank(b)
    t = b / diag[np.newaxis, :]
    p, s, rt = np.linalg.svd(t)
    r = rt.T
    # svd orders s descending: finite block is s[:l], null block s[l:]
    s = s.copy()
    s[l:] = 0.0
    # infinite values first, then finite ones with lambda = 1/s^2 descending
    null_idx = np.arange(l, n)
    fin_idx = np.arange(l)[::-1]
    perm = np.concatenate([null_idx, fin_idx])

    c_all = 1.0 / np.sqrt(1.0 + s**2)
    g_all = s * c_all
    d1_diag = np.where(s > 0, c_all, 1.0)[perm]

    m1 = r[:, perm]
    qt = (m1.T * diag[np.newaxis, :]) / d1_diag[:, np.newaxis]
    m2 = np.concatenate([p[:, fin_idx], p[:, null_idx]], axis=1)

    c = c_all[fin_idx]
    g = g_all[fin_idx]
    d1 = np.diag(d1_diag)
    d2 = np.zeros((n, n))
    d2[np.arange(l), np.arange(n - l, n)] = g
    return GsvdResult(m1=m1, m2=m2, q=qt.T.copy(), d1=d1, d2=d2, c=c, g=g, l=l)


def nnls(a, b, max_iter=None):
    """Solve ``min ||a x - b||_2`` subject to ``x >= 0``.

    Lawson-Hanson active-set method. The entering variable is the one with
    the largest positive gradient component; ties go to the lowest index.

    Parameters
    ----------
    a : (m, n) array_like
    b : (m,) array_like
    max_iter : int, optional
        Cap on the number of variables entering the passive set. Defaults to
        ``3 * n``.

    Returns
    -------
    x : (n,) ndarray
        Entrywise nonnegative solution (exact zeros on the active set).

    Raises
    ------
    NnlsError
        If the iteration cap is exceeded.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b", ndim=1)
    m, n = a.shape
    if b.shape[0] != m:
        raise ValueError(f"dimension mismatch: a is {a.shape}, b has length {b.shape[0]}")
    if max_iter is None:
        max_iter = 3 * n

    atb = a.T @ b
    scale = np.max(np.abs(atb))
    if scale == 0.0:
        return np.zeros(n)
    tol = 1e-10 * scale

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    # variables whose entry failed immediately; cleared whenever x changes
    blocked = np.zeros(n, dtype=bool)
    w = atb.copy()
    n_iter = 0

    while True:
        cand = np.where(~passive & ~blocked, w, -np.inf)
        j = int(np.argmax(cand))
        if cand[j] <= tol:
            break
        n_iter += 1
        if n_iter > max_iter:
            raise NnlsError(f"NNLS exceeded {max_iter} iterations")
        passive[j] = True

        while True:
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = np.linalg.lstsq(a[:, idx], b, rcond=None)[0]
            if np.all(z[idx] > 0):
                x = z
                break
            neg = idx[z[idx] <= 0]
            if neg.size == 1 and neg[0] == j and x[j] == 0.0:
                # entering variable cannot move off zero; rounding artefact
                passive[j] = False
                blocked[j] = True
                j = -1
                break
            ratios = x[neg] / (x[neg] - z[neg])
            k = int(np.argmin(ratios))
            x = x + ratios[k] * (z - x)
            x[neg[k]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            if not passive.any():
                break

        if j >= 0:
            blocked[:] = False
        w = atb - a.T @ (a @ x)

    x[x < 0] = 0.0
    return x
