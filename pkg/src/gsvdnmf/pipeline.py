"""Two-stage GSVD-NMF pipeline and the random-restart comparison harness."""

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, truncated_svd
from .nmf import (
    NmfFactors,
    SolverSettings,
    init_nndsvd,
    init_random,
    random_scale,
    relative_fitting_error,
    run_hals,
)
from .recovery import recover

__all__ = [
    "INIT_METHODS",
    "PipelineConfig",
    "PipelineResult",
    "StandardResult",
    "TrialResult",
    "make_init",
    "run_pipeline",
    "run_standard",
    "run_trial",
    "run_comparison",
    "diagonal_histogram",
]

INIT_METHODS = ("random", "nndsvd", "nndsvda", "nndsvdar")


@dataclass(frozen=True)
class PipelineConfig:
    r0: int
    k: int = 1
    epsilon0: float = 1e-4
    epsilon: float = 1e-4
    svd_rank: str = "r0"
    init: str = "random"
    seed: int = 0
    max_iters: int = 10_000

    def __post_init__(self):
        if self.r0 < 2:
            raise ValueError("r0 must be at least 2")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not (self.epsilon0 > 0 and self.epsilon > 0):
            raise ValueError("tolerances must be positive")
        if self.svd_rank not in ("r0", "r0+k"):
            raise ValueError("svd_rank must be 'r0' or 'r0+k'")
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}")

    @property
    def rank(self):
        """Final rank ``r0 + k``."""
        return self.r0 + self.k

    @property
    def svd_components(self):
        return self.r0 if self.svd_rank == "r0" else self.r0 + self.k


@dataclass
class StandardResult:
    factors: NmfFactors
    fit: float
    n_iter: int
    wall_time: float


@dataclass
class PipelineResult:
    factors: NmfFactors
    augmented: object
    stage1: NmfFactors
    fit: float
    fit_stage1: float
    fit_recovered: float
    iters_stage1: int
    iters_stage2: int
    wall_time: float


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    seed: int
    fit_standard: float
    fit_gsvd: float
    iters_standard: int
    iters_gsvd_stage1: int
    iters_gsvd_stage2: int
    time_standard: float = 0.0
    time_gsvd: float = 0.0

    @property
    def delta(self):
        return self.fit_standard - self.fit_gsvd


def make_init(x, r, method="random", seed=0):
    """Initial factors of rank `r` by name.

    ``"random"`` uses :func:`init_random` scaled by ``sqrt(mean(x)/r)``;
    the NNDSVD names map onto :func:`init_nndsvd` variants.
    """
    m, n = x.shape
    if method == "random":
        return init_random(m, n, r, seed, random_scale(x, r))
    variants = {"nndsvd": "plain", "nndsvda": "a", "nndsvdar": "ar"}
    if method not in variants:
        raise ValueError(f"unknown init {method!r}")
    return init_nndsvd(x, r, variants[method], seed)


def _check_input(x, r):
    x = as_matrix(x)
    if np.any(x < 0):
        raise ValueError("input matrix has negative entries")
    if not 1 <= r <= min(x.shape):
        raise ValueError(f"rank {r} out of range [1, {min(x.shape)}]")
    return x


def run_standard(x, r, init="random", settings=None, seed=0):
    """Plain HALS at rank `r` from a named or explicit initialization."""
    x = _check_input(x, r)
    settings = settings or SolverSettings(seed=seed)
    start = time.perf_counter()
    f0 = init if isinstance(init, NmfFactors) else make_init(x, r, init, seed)
    res = run_hals(x, f0, settings)
    return StandardResult(
        factors=res.factors,
        fit=relative_fitting_error(x, res.factors),
        n_iter=res.n_iter,
        wall_time=time.perf_counter() - start,
    )


def run_pipeline(x, cfg, init=None, svd=None):
    """Under-complete HALS, GSVD recovery of ``cfg.k`` components, then HALS.

    Parameters
    ----------
    x : (m, n) array_like
        Nonnegative data.
    cfg : PipelineConfig
    init : NmfFactors, optional
        Rank-``cfg.r0`` starting point for stage 1. By default a random
        start is the first ``r0`` components of the rank ``r0 + k`` draw for
        ``cfg.seed`` (so it matches :func:`run_standard` at the final rank),
        and NNDSVD starts are computed at rank ``r0``.
    svd : TruncatedSvd, optional
        Precomputed truncated SVD of rank ``cfg.svd_components``.
    """
    x = _check_input(x, cfg.rank)
    start = time.perf_counter()
    if init is None:
        if cfg.init == "random":
            init = make_init(x, cfg.rank, "random", cfg.seed).head(cfg.r0)
        else:
            init = make_init(x, cfg.r0, cfg.init, cfg.seed)
    if init.rank != cfg.r0:
        raise ValueError(f"initialization rank {init.rank} != r0 {cfg.r0}")
    if svd is None:
        svd = truncated_svd(x, cfg.svd_components)
    elif svd.rank != cfg.svd_components:
        raise ValueError(f"SVD rank {svd.rank} != {cfg.svd_components}")

    stage1 = run_hals(x, init, SolverSettings(cfg.epsilon0, cfg.max_iters, cfg.seed))
    aug = recover(x, stage1.factors, svd, cfg.k)
    stage2 = run_hals(x, aug.factors, SolverSettings(cfg.epsilon, cfg.max_iters, cfg.seed))
    return PipelineResult(
        factors=stage2.factors,
        augmented=aug,
        stage1=stage1.factors,
        fit=relative_fitting_error(x, stage2.factors),
        fit_stage1=relative_fitting_error(x, stage1.factors),
        fit_recovered=relative_fitting_error(x, aug.factors),
        iters_stage1=stage1.n_iter,
        iters_stage2=stage2.n_iter,
        wall_time=time.perf_counter() - start,
    )


def run_trial(x, r, cfg, trial_id, seed, svd=None):
    """One shared-initialization comparison at final rank `r`.

    Standard HALS starts from the rank-`r` random draw for `seed`; the
    pipeline starts from the first ``r - k`` components of that same draw.
    """
    cfg = dataclasses.replace(cfg, r0=r - cfg.k, seed=seed, init="random")
    full = make_init(x, r, "random", seed)
    std = run_standard(x, r, full, SolverSettings(cfg.epsilon, cfg.max_iters, seed))
    gs = run_pipeline(x, cfg, init=full.head(cfg.r0), svd=svd)
    return TrialResult(
        trial_id=trial_id,
        seed=seed,
        fit_standard=std.fit,
        fit_gsvd=gs.fit,
        iters_standard=std.n_iter,
        iters_gsvd_stage1=gs.iters_stage1,
        iters_gsvd_stage2=gs.iters_stage2,
        time_standard=std.wall_time,
        time_gsvd=gs.wall_time,
    )


def _trial_job(args):
    return run_trial(*args)


def run_comparison(x, r, n_trials, cfg, seed_base=0, seeds=None, n_jobs=1):
    """Random-restart comparison of standard HALS and GSVD-NMF.

    Trial ``i`` uses seed ``seed_base + i`` unless `seeds` is given. Results
    are ordered by trial id regardless of `n_jobs`.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    x = _check_input(x, r)
    if seeds is None:
        seeds = [seed_base + i for i in range(n_trials)]
    if len(seeds) != n_trials:
        raise ValueError("need one seed per trial")
    probe = dataclasses.replace(cfg, r0=r - cfg.k)
    svd = truncated_svd(x, probe.svd_components)
    jobs = [(x, r, cfg, i, int(s), svd) for i, s in enumerate(seeds)]
    if n_jobs == 1:
        results = [_trial_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_trial_job, jobs))
    return sorted(results, key=lambda t: t.trial_id)


def diagonal_histogram(results, bins=40):
    """Signed distances of ``(fit_gsvd, fit_standard)`` points to the diagonal.

    Returns ``(distances, counts, edges)`` with
    ``distance = (fit_standard - fit_gsvd) / sqrt(2)``; positive values mean
    GSVD-NMF reached the lower error.
    """
    if len(results) == 0:
        raise ValueError("no results to bin")
    d = np.array([(t.fit_standard - t.fit_gsvd) / np.sqrt(2.0) for t in results])
    lo, hi = float(d.min()), float(d.max())
    if lo == hi:
        counts = np.array([d.size])
        edges = np.array([lo - 0.5, lo + 0.5])
        return d, counts, edges
    counts, edges = np.histogram(d, bins=bins, range=(lo, hi))
    return d, counts, edges
