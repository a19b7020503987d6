"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL|SKIP ...`` line, and the
lines are repeated in the terminal summary.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from gsvdnmf.cli import main
from gsvdnmf.linalg import gsvd_pair, nnls, truncated_svd
from gsvdnmf.io import load_matrix
from gsvdnmf.nmf import SolverSettings, init_random, objective, random_scale, run_hals
from gsvdnmf.pipeline import PipelineConfig, run_comparison, run_pipeline, run_standard
from gsvdnmf.recovery import quadratic_form
from gsvdnmf.synthetic import gen_synthetic, match_components

from oracles import brute_nnls, pencil_lambdas

RESULTS = []


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def synthetic_run():
    data = gen_synthetic(n_features=10, noise_level=0.0, seed=0)
    start = time.perf_counter()
    res = run_pipeline(data.x, PipelineConfig(r0=9, k=1, epsilon0=1e-4, epsilon=1e-4, init="random", seed=0))
    return data, res, time.perf_counter() - start


def test_criterion_1_synthetic_recovery(synthetic_run):
    data, res, elapsed = synthetic_run
    _, scores = match_components(res.factors, data.truth)
    ok = res.fit < 0.5 and scores.min() >= 0.9 and elapsed < 30 and res.factors.rank == 10
    _report(1, ok, f"fit={res.fit:.4g}% min_similarity={scores.min():.4f} time={elapsed:.1f}s")
    assert res.fit < 0.5
    assert res.factors.rank == 10
    assert scores.min() >= 0.9
    assert elapsed < 30


def test_criterion_2_single_dominant_lambda(synthetic_run):
    _, res, _ = synthetic_run
    spectrum = res.augmented.spectrum
    finite = spectrum.finite
    med = np.median(finite)
    n_big = int(np.count_nonzero(spectrum.values > 10 * med))
    _report(2, n_big == 1, f"values above 10x median={n_big} top ratio={spectrum.sorted()[0] / med:.3g}")
    assert n_big == 1


def test_criterion_3_aggregate_comparison():
    data = gen_synthetic(noise_level=0.01, seed=0)
    start = time.perf_counter()
    results = run_comparison(data.x, 10, 50, PipelineConfig(r0=9, k=1), seed_base=0)
    elapsed = time.perf_counter() - start
    delta = np.array([t.fit_standard - t.fit_gsvd for t in results])
    frac = float(np.mean([t.fit_gsvd <= t.fit_standard + 0.01 for t in results]))
    med = float(np.median(delta))
    ok = med >= 0 and frac >= 0.6 and elapsed < 600
    _report(3, ok, f"median delta={med:.4g} fraction within 0.01={frac:.2f} time={elapsed:.1f}s")
    assert med >= 0
    assert frac >= 0.6
    assert elapsed < 600


def _mhll_path():
    env = os.environ.get("GSVDNMF_MHLL")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parents[1] / "datasets" / "MHLL.csv")
    return next((p for p in candidates if p.is_file()), None)


def test_criterion_4_real_spectrogram():
    path = _mhll_path()
    if path is None:
        line = "criterion 4: SKIP  MHLL spectrogram not supplied (set GSVDNMF_MHLL or add datasets/MHLL.csv)"
        RESULTS.append(line)
        print(line)
        pytest.skip("MHLL dataset not available")
    x = load_matrix(path, nonnegative=True)
    std = run_standard(x, 3, init="nndsvd")
    gs = run_pipeline(x, PipelineConfig(r0=2, k=1, init="nndsvd"))
    ok = abs(std.fit - 3.08) <= 0.05 and abs(gs.fit - 3.08) <= 0.05
    _report(4, ok, f"shape={x.shape} standard={std.fit:.3f}% gsvd={gs.fit:.3f}%")
    assert abs(std.fit - 3.08) <= 0.05
    assert abs(gs.fit - 3.08) <= 0.05


def test_criterion_5_nnls_oracle():
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 10))
        n = int(rng.integers(1, 7))
        a = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        x = nnls(a, b)
        _, best = brute_nnls(a, b)
        worst = max(worst, abs(float(np.sum((a @ x - b) ** 2)) - best))
        assert np.all(x >= 0)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10
    _report(5, ok, f"max objective gap={worst:.2e} time={elapsed:.2f}s")
    assert worst <= 1e-8
    assert elapsed < 10


def test_criterion_6_gsvd_identities():
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    worst_rec, worst_lam, bad_count, n_deficient = 0.0, 0.0, 0, 0
    for i in range(100):
        n = int(rng.integers(1, 9))
        rank = n if i % 2 == 0 else int(rng.integers(0, n + 1))
        n_deficient += rank < n
        sigma = np.diag(np.sort(rng.uniform(0.1, 10.0, n))[::-1])
        a = rng.standard_normal((n, rank)) @ rng.standard_normal((rank, n))
        g = gsvd_pair(sigma, a)
        worst_rec = max(
            worst_rec,
            np.linalg.norm(g.m1 @ g.d1 @ g.q.T - sigma) / np.linalg.norm(sigma),
            np.linalg.norm(g.m2 @ g.d2 @ g.q.T - a) / max(np.linalg.norm(a), 1e-300) if rank else 0.0,
        )
        if rank == 0:
            worst_rec = max(worst_rec, np.abs(g.m2 @ g.d2 @ g.q.T).max())
        finite = np.sort(g.lambdas[np.isfinite(g.lambdas)])
        mu = np.sort(pencil_lambdas(sigma, a))[::-1][: g.l]
        if g.l:
            worst_lam = max(worst_lam, np.max(np.abs(finite - np.sort(1 / mu)) / np.sort(1 / mu)))
        bad_count += int(np.count_nonzero(np.isinf(g.lambdas)) != n - g.l or g.l != rank)
    elapsed = time.perf_counter() - start
    ok = worst_rec <= 1e-8 and worst_lam <= 1e-6 and bad_count == 0 and elapsed < 10
    _report(
        6,
        ok,
        f"reconstruction={worst_rec:.1e} lambda rel err={worst_lam:.1e} "
        f"infinite-count mismatches={bad_count} rank-deficient pairs={n_deficient} time={elapsed:.2f}s",
    )
    assert worst_rec <= 1e-8
    assert worst_lam <= 1e-6
    assert bad_count == 0
    assert elapsed < 10


def _stop_rule(new, old, eps):
    dw = np.sum((new.w - old.w) ** 2, axis=0) <= eps * np.sum((new.w + old.w) ** 2, axis=0)
    dh = np.sum((new.h - old.h) ** 2, axis=1) <= eps * np.sum((new.h + old.h) ** 2, axis=1)
    return bool(dw.all() and dh.all())


def test_criterion_7_hals_monotone_and_stopping():
    rng = np.random.default_rng(7)
    n_mono, n_stop = 0, 0
    for i in range(20):
        m, n, r = int(rng.integers(5, 30)), int(rng.integers(5, 30)), int(rng.integers(1, 5))
        x = rng.random((m, n))
        init = init_random(m, n, r, i, random_scale(x, r))
        res = run_hals(x, init, SolverSettings(1e-4), record_objective=True)
        hist = np.asarray(res.history)
        n_mono += bool(np.all(np.diff(hist) <= 1e-10))
        prev = run_hals(x, init, SolverSettings(1e-4, max_iters=res.n_iter - 1)).factors if res.n_iter > 1 else init
        n_stop += res.converged and _stop_rule(res.factors, prev, 1e-4)
    ok = n_mono == 20 and n_stop == 20
    _report(7, ok, f"monotone={n_mono}/20 stopping rule at termination={n_stop}/20")
    assert n_mono == 20
    assert n_stop == 20


def test_criterion_8_reduced_form():
    rng = np.random.default_rng(8)
    worst, worst_eig = 0.0, -np.inf
    for i in range(20):
        m, n, r0, k = int(rng.integers(4, 12)), int(rng.integers(4, 12)), int(rng.integers(1, 4)), int(rng.integers(1, 3))
        x = rng.random((m, n))
        f = run_hals(x, init_random(m, n, r0, i, random_scale(x, r0)), SolverSettings(1e-3)).factors
        y = rng.standard_normal((k, n))
        q = quadratic_form(x, f, y)
        for _ in range(10):
            alpha = rng.random(r0) * 2
            full = q.full(alpha, q.optimal_m(alpha))
            worst = max(worst, abs(q.reduced(alpha) - full) / max(abs(full), 1e-300))
        kmat = q.reduced_matrix()
        worst_eig = max(worst_eig, -np.min(np.linalg.eigvalsh((kmat + kmat.T) / 2)) / np.trace(kmat))
    ok = worst <= 1e-8 and worst_eig <= 1e-8
    _report(8, ok, f"max relative gap={worst:.1e} worst -min_eig/trace={worst_eig:.1e}")
    assert worst <= 1e-8
    assert worst_eig <= 1e-8


def test_criterion_9_bench_determinism(tmp_path):
    data_dir = tmp_path / "data"
    assert main(["synth", "--features", "6", "--rows", "40", "--cols", "50", "--noise", "0.01", "--out", str(data_dir)]) == 0
    args = ["bench", "--input", str(data_dir / "X.csv"), "--rank", "6", "--k", "1", "--trials", "3", "--seed-base", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = ["trials.csv", "histogram.csv", "manifest.json"]
    same = [(tmp_path / "a" / nm).read_bytes() == (tmp_path / "b" / nm).read_bytes() for nm in names]
    ok = all(same[:2])
    _report(9, ok, "identical: " + ", ".join(f"{nm}={s}" for nm, s in zip(names, same)))
    assert all(same[:2])
