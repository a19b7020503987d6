"""GSVD-based recovery of components missing from an under-complete NMF.

Given a rank-``r0`` factorization ``(W0, H0)`` of ``X`` and the truncated SVD
``U S V^T`` of ``X``, the pair ``(S, U^T W0 H0 V)`` is decomposed by
:func:`gsvd_pair`. Large generalized singular values mark directions the SVD
covers and the NMF does not; infinite values mark directions absent from
``W0 H0`` altogether. The top ``k`` directions become new rows of ``H``; new
columns of ``W`` and amplitudes of the old components come from a convex
least-squares problem, followed by nonnegative truncation and a joint NNLS
amplitude fit.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, gsvd_pair, nnls
from .nmf import NmfFactors, truncate_pair

__all__ = [
    "SingularDirectionsError",
    "LambdaSpectrum",
    "QuadraticForm",
    "RecoveryCandidate",
    "AugmentedFactors",
    "lambda_spectrum",
    "select_directions",
    "quadratic_form",
    "solve_s_alpha",
    "truncate_pairs",
    "rescale_beta",
    "recover",
]


class SingularDirectionsError(np.linalg.LinAlgError):
    """The selected directions are (numerically) linearly dependent."""


@dataclass(frozen=True)
class LambdaSpectrum:
    """Squared generalized singular values aligned with the direction columns.

    ``order`` sorts ``values`` descending, infinite entries first and ties
    resolved toward the lower index.
    """

    values: np.ndarray
    order: np.ndarray
    l: int

    @property
    def n_infinite(self):
        return int(np.count_nonzero(np.isinf(self.values)))

    @property
    def finite(self):
        return self.values[np.isfinite(self.values)]

    def sorted(self):
        return self.values[self.order]


@dataclass(frozen=True)
class QuadraticForm:
    """Pieces of ``E(alpha, m) = a'Ta - 2 xi'a + phi - 2 gamma'm + 2 a'Pm + m'Psi m``.

    ``m`` stacks the columns of ``S`` (length ``m*k``). ``Psi`` is never
    formed in the solver; it equals ``kron(gram, I_m)`` where ``gram`` is the
    Gram matrix of the direction rows.
    """

    theta: np.ndarray
    xi: np.ndarray
    phi: float
    gamma: np.ndarray
    p: np.ndarray
    gram: np.ndarray
    m: int

    def psi(self):
        return np.kron(self.gram, np.eye(self.m))

    def psi_inv_apply(self, v):
        """``Psi^-1 v`` through the k-by-k Gram inverse."""
        k = self.gram.shape[0]
        if k == 0:
            return v.copy()
        blocks = v.reshape(k, self.m)
        return np.linalg.solve(self.gram, blocks).reshape(-1)

    def full(self, alpha, mvec):
        return float(
            alpha @ self.theta @ alpha
            - 2 * self.xi @ alpha
            + self.phi
            - 2 * self.gamma @ mvec
            + 2 * alpha @ self.p @ mvec
            + mvec @ self.psi_apply(mvec)
        )

    def psi_apply(self, mvec):
        k = self.gram.shape[0]
        if k == 0:
            return mvec.copy()
        return (self.gram @ mvec.reshape(k, self.m)).reshape(-1)

    def optimal_m(self, alpha):
        return self.psi_inv_apply(self.gamma - self.p.T @ alpha)

    def reduced_matrix(self):
        if self.gram.shape[0] == 0:
            return self.theta.copy()
        pinv_pt = np.column_stack([self.psi_inv_apply(row) for row in self.p])
        return self.theta - self.p @ pinv_pt

    def reduced(self, alpha):
        """Objective after eliminating ``m`` at its stationary point."""
        pig = self.psi_inv_apply(self.gamma)
        lin = self.xi - self.p @ pig
        return float(alpha @ self.reduced_matrix() @ alpha - 2 * lin @ alpha + self.phi - self.gamma @ pig)


@dataclass(frozen=True)
class RecoveryCandidate:
    y: np.ndarray
    s: np.ndarray
    alpha: np.ndarray
    quadratic: QuadraticForm


@dataclass(frozen=True)
class AugmentedFactors:
    """Recovered factors ``w_g = W diag(beta)``, ``h_g = H``."""

    w_g: np.ndarray
    h_g: np.ndarray
    beta: np.ndarray
    spectrum: LambdaSpectrum = None
    candidate: RecoveryCandidate = None
    dropped: tuple = ()

    @property
    def factors(self):
        return NmfFactors(self.w_g, self.h_g)


def lambda_spectrum(svd, f, return_gsvd=False):
    """Generalized singular value spectrum of ``(Sigma, U^T W0 H0 V)``.

    Parameters
    ----------
    svd : TruncatedSvd
        Rank ``r_svd >= f.rank`` truncated SVD of the data.
    f : NmfFactors
        Under-complete factorization, rank at least 2.

    Returns
    -------
    spectrum : LambdaSpectrum
    directions : (n, r_svd) ndarray
        ``V (Q^T)^-1``; column ``i`` is the direction paired with
        ``spectrum.values[i]``.
    """
    if f.rank < 2:
        raise ValueError("rank-1 factorizations are already globally optimal; nothing to recover")
    if svd.rank < f.rank:
        raise ValueError(f"SVD rank {svd.rank} is below the factorization rank {f.rank}")
    if svd.u.shape[0] != f.w.shape[0] or svd.v.shape[0] != f.h.shape[1]:
        raise ValueError("SVD and factorization shapes differ")
    if np.any(svd.sigma <= 0):
        raise ValueError("SVD rank exceeds the numerical rank of the data")

    projected = (svd.u.T @ f.w) @ (f.h @ svd.v)
    g = gsvd_pair(np.diag(svd.sigma), projected)
    values = g.lambdas
    order = np.argsort(-values, kind="stable")
    directions = np.linalg.solve(g.q, svd.v.T).T
    spectrum = LambdaSpectrum(values=values, order=order, l=g.l)
    if return_gsvd:
        return spectrum, directions, g
    return spectrum, directions


def select_directions(spectrum, directions, k):
    """The `k` directions with the largest lambda, as unit-norm rows."""
    r = spectrum.values.shape[0]
    if not 1 <= k <= r:
        raise ValueError(f"k={k} out of range [1, {r}]")
    y = directions[:, spectrum.order[:k]].T
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def quadratic_form(x, f, y):
    """Assemble the quadratic-form pieces for the S/alpha problem."""
    x = as_matrix(x)
    y = np.asarray(y, dtype=np.float64).reshape(-1, x.shape[1])
    w0, h0 = f.w, f.h
    m = x.shape[0]
    k = y.shape[0]
    theta = (w0.T @ w0) * (h0 @ h0.T)
    xi = np.einsum("ip,ij,pj->p", w0, x, h0)
    phi = float(np.sum(x**2))
    gamma = (x @ y.T).T.reshape(-1)
    hy = h0 @ y.T
    # P[p, p'*m:(p'+1)*m] = (h_p . y_p') w_p^T
    p = (hy[:, :, None] * w0.T[:, None, :]).reshape(w0.shape[1], k * m)
    return QuadraticForm(theta=theta, xi=xi, phi=phi, gamma=gamma, p=p, gram=y @ y.T, m=m)


def solve_s_alpha(x, f, y, return_quadratic=False):
    """Companion columns `s` and amplitudes `alpha` for the directions `y`.

    Minimizes ``||X - W0 diag(alpha) H0 - S Y||^2`` with ``alpha >= 0`` and
    ``S`` free. Eliminating ``S`` leaves
    ``||(X - W0 diag(alpha) H0)(I - Pi_Y)||^2`` where ``Pi_Y`` projects onto
    the row space of ``Y``; this is solved by NNLS on the projected
    rank-1 terms, after which ``S = (X - W0 diag(alpha) H0) Y^T (Y Y^T)^-1``.

    Raises
    ------
    SingularDirectionsError
        If the rows of `y` are numerically dependent.
    """
    x = as_matrix(x)
    w0, h0 = f.w, f.h
    if f.shape != x.shape:
        raise ValueError(f"factor product shape {f.shape} does not match x {x.shape}")
    y = np.asarray(y, dtype=np.float64).reshape(-1, x.shape[1])
    k = y.shape[0]

    if k:
        gram = y @ y.T
        if np.linalg.cond(gram) > 1e12:
            raise SingularDirectionsError("selected directions are linearly dependent; reduce k")
        coef = np.linalg.solve(gram, y)
        proj = lambda a: a - (a @ y.T) @ coef
    else:
        proj = lambda a: a

    h_perp = proj(h0)
    x_perp = proj(x)
    design = np.einsum("ip,pj->ijp", w0, h_perp).reshape(-1, w0.shape[1])
    alpha = nnls(design, x_perp.reshape(-1))

    if k:
        resid = x - (w0 * alpha) @ h0
        s = np.linalg.solve(gram, y @ resid.T).T
    else:
        s = np.zeros((x.shape[0], 0))
    if return_quadratic:
        return s, alpha, quadratic_form(x, f, y)
    return s, alpha


def truncate_pairs(s, y):
    """Nonnegative truncation of each rank-1 pair ``(s[:, j], y[j])``."""
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if s.shape[1] != y.shape[0]:
        raise ValueError(f"shape mismatch: s {s.shape}, y {y.shape}")
    w = np.zeros_like(s)
    h = np.zeros_like(y)
    for j in range(s.shape[1]):
        w[:, j], h[j] = truncate_pair(s[:, j], y[j])
        if not np.any(w[:, j]):
            warnings.warn(f"pair {j} truncated to zero", RuntimeWarning, stacklevel=2)
    return w, h


def rescale_beta(x, w, h):
    """Nonnegative amplitudes ``beta`` minimizing ``||X - W diag(beta) H||^2``."""
    x = as_matrix(x)
    design = np.einsum("ip,pj->ijp", w, h).reshape(-1, w.shape[1])
    return nnls(design, x.reshape(-1))


def recover(x, f, svd, k=1):
    """Propose `k` new components for `f` and return the augmented factors.

    Chains :func:`lambda_spectrum`, :func:`select_directions`,
    :func:`solve_s_alpha`, :func:`truncate_pairs` and :func:`rescale_beta`.
    Pairs that truncate to zero are dropped, so the result can have fewer
    than ``f.rank + k`` components (listed in ``dropped``).
    """
    x = as_matrix(x)
    spectrum, directions = lambda_spectrum(svd, f)
    y = select_directions(spectrum, directions, k)
    s, alpha, quad = solve_s_alpha(x, f, y, return_quadratic=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        w_new, h_new = truncate_pairs(s, y)
    alive = np.any(w_new, axis=0) & np.any(h_new, axis=1)
    dropped = tuple(int(j) for j in np.flatnonzero(~alive))
    if dropped:
        warnings.warn(f"dropping {len(dropped)} new component(s) that truncated to zero", RuntimeWarning, stacklevel=2)

    w = np.concatenate([f.w * alpha, w_new[:, alive]], axis=1)
    h = np.concatenate([f.h, h_new[alive]], axis=0)
    beta = rescale_beta(x, w, h)
    return AugmentedFactors(
        w_g=w * beta,
        h_g=h,
        beta=beta,
        spectrum=spectrum,
        candidate=RecoveryCandidate(y=y, s=s, alpha=alpha, quadratic=quad),
        dropped=dropped,
    )
