"""HALS nonnegative matrix factorization, initializers and fit metrics."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, truncated_svd

__all__ = [
    "NmfFactors",
    "SolverSettings",
    "HalsResult",
    "objective",
    "relative_fitting_error",
    "random_scale",
    "init_random",
    "init_nndsvd",
    "truncate_pair",
    "run_hals",
]


@dataclass(frozen=True)
class NmfFactors:
    """Nonnegative factor pair ``x ~= w @ h``."""

    w: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        w = as_matrix(self.w, "w")
        h = as_matrix(self.h, "h")
        if w.shape[1] != h.shape[0]:
            raise ValueError(f"inner dimensions differ: w {w.shape}, h {h.shape}")
        if np.any(w < 0) or np.any(h < 0):
            raise ValueError("factors must be entrywise nonnegative")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "h", h)

    @property
    def rank(self):
        return self.w.shape[1]

    @property
    def shape(self):
        return self.w.shape[0], self.h.shape[1]

    def product(self):
        return self.w @ self.h

    def head(self, r):
        """The first `r` components."""
        return NmfFactors(self.w[:, :r].copy(), self.h[:r].copy())


@dataclass(frozen=True)
class SolverSettings:
    epsilon: float = 1e-4
    max_iters: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")


@dataclass
class HalsResult:
    factors: NmfFactors
    n_iter: int
    objective: float
    converged: bool
    history: list = field(default_factory=list)


def _check_shapes(x, f):
    if f.shape != x.shape:
        raise ValueError(f"factor product shape {f.shape} does not match x {x.shape}")


def objective(x, f):
    """Half the squared Frobenius norm of ``x - w h``."""
    x = as_matrix(x)
    _check_shapes(x, f)
    return 0.5 * float(np.sum((x - f.product()) ** 2))


def relative_fitting_error(x, f):
    """``100 * ||x - w h||_F^2 / ||x||_F^2`` in percent."""
    x = as_matrix(x)
    _check_shapes(x, f)
    denom = float(np.sum(x**2))
    if denom == 0.0:
        raise ValueError("relative fitting error undefined for a zero matrix")
    return 100.0 * float(np.sum((x - f.product()) ** 2)) / denom


def random_scale(x, r):
    """Default entry scale ``sqrt(mean(x) / r)`` for random initializations."""
    return float(np.sqrt(np.mean(x) / r))


def init_random(m, n, r, seed, scale=1.0):
    """Uniform random factors with entries in ``(0, scale]``.

    Components are drawn one at a time, column ``w_j`` then row ``h_j``,
    from a single ``numpy.random.default_rng(seed)`` stream. A rank-`r`
    draw therefore starts with the rank-``r - 1`` draw of the same seed
    bit for bit, which is what lets a lower-rank run share an
    initialization with a higher-rank one.
    """
    rng = np.random.default_rng(seed)
    w = np.empty((m, r))
    h = np.empty((r, n))
    for j in range(r):
        w[:, j] = 1.0 - rng.random(m)
        h[j] = 1.0 - rng.random(n)
    return NmfFactors(w * scale, h * scale)


def truncate_pair(s, y):
    """Nonnegative rank-1 truncation of ``s y^T`` (NNDSVD rule).

    Splits both vectors into positive and negated-negative parts and keeps the
    sign pair with the larger ``mu = ||s_part|| ||y_part||``, ties going to the
    positive pair. Returns ``sqrt(mu) * unit(s_part), sqrt(mu) * unit(y_part)``,
    or two zero vectors when the kept pair is empty.
    """
    sp, sn = np.maximum(s, 0.0), np.maximum(-s, 0.0)
    yp, yn = np.maximum(y, 0.0), np.maximum(-y, 0.0)
    nsp, nsn = np.linalg.norm(sp), np.linalg.norm(sn)
    nyp, nyn = np.linalg.norm(yp), np.linalg.norm(yn)
    mu_p, mu_n = nsp * nyp, nsn * nyn
    if mu_p >= mu_n:
        mu, a, b, na, nb = mu_p, sp, yp, nsp, nyp
    else:
        mu, a, b, na, nb = mu_n, sn, yn, nsn, nyn
    if mu == 0.0:
        return np.zeros_like(s), np.zeros_like(y)
    root = np.sqrt(mu)
    return root * a / na, root * b / nb


def init_nndsvd(x, r, variant="plain", seed=0):
    """NNDSVD initialization (Boutsidis & Gallopoulos, 2008).

    Every singular pair ``(sqrt(sigma_j) u_j, sqrt(sigma_j) v_j)`` goes
    through :func:`truncate_pair`; for a nonnegative matrix the leading pair is
    already nonnegative and passes through unchanged.

    ``variant`` is one of ``"plain"``, ``"a"`` (zeros filled with ``mean(x)``)
    or ``"ar"`` (zeros filled with uniform values in ``(0, mean(x)/100]``
    drawn from `seed`).
    """
    x = as_matrix(x)
    if variant not in ("plain", "a", "ar"):
        raise ValueError(f"unknown NNDSVD variant {variant!r}")
    svd = truncated_svd(x, r)
    m, n = x.shape
    w = np.zeros((m, r))
    h = np.zeros((r, n))
    for j in range(r):
        root = np.sqrt(svd.sigma[j])
        w[:, j], h[j] = truncate_pair(root * svd.u[:, j], root * svd.v[:, j])

    avg = float(np.mean(x))
    if variant == "a":
        w[w == 0] = avg
        h[h == 0] = avg
    elif variant == "ar":
        rng = np.random.default_rng(seed)
        zw, zh = w == 0, h == 0
        w[zw] = (1.0 - rng.random(np.count_nonzero(zw))) * avg / 100
        h[zh] = (1.0 - rng.random(np.count_nonzero(zh))) * avg / 100
    return NmfFactors(w, h)


def _reseed(x, w, h, j):
    """Replace a dead component ``j`` by a nonnegative piece of the residual.

    Picks the residual column with the largest positive part, so the
    objective cannot increase.
    """
    w[:, j] = 0.0
    h[j] = 0.0
    resid = np.maximum(x - w @ h, 0.0)
    norms = np.einsum("ij,ij->j", resid, resid)
    c = int(np.argmax(norms))
    if norms[c] > 0:
        col = resid[:, c]
        scale = np.sqrt(np.linalg.norm(col))
        w[:, j] = col / scale
        h[j, c] = scale
    else:
        # residual has no positive part; keep the component alive at a
        # negligible amplitude
        w[:, j] = np.sqrt(np.finfo(float).eps) * np.sqrt(max(np.mean(x), 0.0) + 1e-300)
        h[j, c] = np.sqrt(np.finfo(float).eps) * np.sqrt(max(np.mean(x), 0.0) + 1e-300)


def _converged(new, old, eps, axis):
    diff = np.sum((new - old) ** 2, axis=axis)
    tot = np.sum((new + old) ** 2, axis=axis)
    return bool(np.all(diff <= eps * tot))


def run_hals(x, init, settings=None, record_objective=False):
    """Fit ``x ~= w h`` with hierarchical alternating least squares.

    Each sweep updates every column of ``w`` in turn and then every row of
    ``h`` with the closed-form nonnegative block minimizer. Iteration stops
    after the first sweep in which, for every component ``j``,
    ``||w_j' - w_j||^2 <= eps ||w_j' + w_j||^2`` and likewise for ``h_j``,
    or when ``settings.max_iters`` sweeps have run.

    Parameters
    ----------
    x : (m, n) array_like
        Nonnegative data.
    init : NmfFactors
        Starting point; not modified.
    settings : SolverSettings, optional
    record_objective : bool
        Store the objective after every sweep in ``result.history``
        (the first entry is the objective at `init`).

    Returns
    -------
    HalsResult
    """
    settings = settings or SolverSettings()
    x = as_matrix(x)
    _check_shapes(x, init)
    if not np.any(init.w) or not np.any(init.h):
        raise ValueError("initialization is identically zero")
    eps = settings.epsilon
    w = init.w.copy()
    h = init.h.copy()
    r = w.shape[1]

    for j in range(r):
        if not np.any(w[:, j]) and not np.any(h[j]):
            _reseed(x, w, h, j)

    history = []
    if record_objective:
        history.append(0.5 * float(np.sum((x - w @ h) ** 2)))

    converged = False
    n_iter = 0
    while n_iter < settings.max_iters:
        n_iter += 1
        w_old = w.copy()
        h_old = h.copy()

        xht = x @ h.T
        hht = h @ h.T
        for j in range(r):
            if hht[j, j] <= 0:
                _reseed(x, w, h, j)
                xht = x @ h.T
                hht = h @ h.T
            w[:, j] = np.maximum(w[:, j] + (xht[:, j] - w @ hht[:, j]) / hht[j, j], 0.0)
            if not np.any(w[:, j]):
                _reseed(x, w, h, j)
                xht = x @ h.T
                hht = h @ h.T

        wtx = w.T @ x
        wtw = w.T @ w
        for j in range(r):
            if wtw[j, j] <= 0:
                _reseed(x, w, h, j)
                wtx = w.T @ x
                wtw = w.T @ w
            h[j] = np.maximum(h[j] + (wtx[j] - wtw[j] @ h) / wtw[j, j], 0.0)
            if not np.any(h[j]):
                _reseed(x, w, h, j)
                wtx = w.T @ x
                wtw = w.T @ w

        if record_objective:
            history.append(0.5 * float(np.sum((x - w @ h) ** 2)))
        if _converged(w, w_old, eps, 0) and _converged(h, h_old, eps, 1):
            converged = True
            break

    factors = NmfFactors(w, h)
    return HalsResult(
        factors=factors,
        n_iter=n_iter,
        objective=0.5 * float(np.sum((x - w @ h) ** 2)),
        converged=converged,
        history=history,
    )
