"""Command-line interface.

Exit status is 0 on success, 1 on usage or input errors and 2 when a
numerical routine fails.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io
from .linalg import NnlsError, truncated_svd
from .nmf import SolverSettings, run_hals
from .pipeline import INIT_METHODS, PipelineConfig, diagonal_histogram, make_init, run_comparison, run_pipeline, run_standard
from .recovery import lambda_spectrum
from .synthetic import gen_synthetic

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser():
    p = _Parser(prog="gsvdnmf", description="GSVD-NMF feature recovery for nonnegative matrix factorization")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    nmf = sub.add_parser("nmf", help="plain HALS NMF")
    nmf.add_argument("--input", required=True)
    nmf.add_argument("--rank", type=int, required=True)
    nmf.add_argument("--init", choices=INIT_METHODS, default="random")
    nmf.add_argument("--seed", type=int, default=0)
    nmf.add_argument("--eps", type=float, default=1e-4)
    nmf.add_argument("--max-iters", type=int, default=10_000)
    nmf.add_argument("--out", required=True)

    g = sub.add_parser("gsvd-nmf", help="two-stage GSVD-NMF at final rank R = r0 + k")
    g.add_argument("--input", required=True)
    g.add_argument("--rank", type=int, required=True, help="final rank; stage 1 runs at rank - k")
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--eps0", type=float, default=1e-4)
    g.add_argument("--eps", type=float, default=1e-4)
    g.add_argument("--svd-rank", choices=("r0", "r0+k"), default="r0")
    g.add_argument("--init", choices=INIT_METHODS, default="random")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-iters", type=int, default=10_000)
    g.add_argument("--out", required=True)

    s = sub.add_parser("spectrum", help="print the generalized singular value spectrum of a rank-R fit")
    s.add_argument("--input", required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--init", choices=INIT_METHODS, default="random")
    s.add_argument("--eps", type=float, default=1e-4)
    s.add_argument("--max-iters", type=int, default=10_000)

    b = sub.add_parser("bench", help="random-restart comparison of standard NMF and GSVD-NMF")
    b.add_argument("--input", required=True)
    b.add_argument("--rank", type=int, required=True)
    b.add_argument("--k", type=int, default=1)
    b.add_argument("--trials", type=int, required=True)
    b.add_argument("--seed-base", type=int, default=0)
    b.add_argument("--eps0", type=float, default=1e-4)
    b.add_argument("--eps", type=float, default=1e-4)
    b.add_argument("--svd-rank", choices=("r0", "r0+k"), default="r0")
    b.add_argument("--bins", type=int, default=40)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--max-iters", type=int, default=10_000)
    b.add_argument("--out", required=True)

    y = sub.add_parser("synth", help="write a synthetic Gaussian-bump dataset")
    y.add_argument("--features", type=int, default=10)
    y.add_argument("--rows", type=int, default=200)
    y.add_argument("--cols", type=int, default=300)
    y.add_argument("--noise", type=float, default=0.0)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--out", required=True)
    return p


def _load(path):
    if not Path(path).is_file():
        raise UsageError(f"input file not found: {path}")
    try:
        return io.load_matrix(path, nonnegative=True)
    except io.MatrixFormatError as exc:
        raise UsageError(str(exc)) from None


def _check_rank(x, r):
    if not 1 <= r <= min(x.shape):
        raise UsageError(f"rank {r} out of range for a {x.shape[0]}x{x.shape[1]} matrix (max {min(x.shape)})")


def _cmd_nmf(a):
    x = _load(a.input)
    _check_rank(x, a.rank)
    res = run_standard(x, a.rank, a.init, SolverSettings(a.eps, a.max_iters, a.seed), seed=a.seed)
    config = {"rank": a.rank, "init": a.init, "seed": a.seed, "epsilon": a.eps, "max_iters": a.max_iters}
    io.save_factors(
        res.factors,
        a.out,
        manifest=dict(command="nmf", config=config, seeds=[a.seed], dataset=a.input,
                      extra={"fit": res.fit, "iterations": res.n_iter}),
    )
    print(f"relative fitting error: {res.fit:.6g}%  iterations: {res.n_iter}")


def _cmd_gsvd(a):
    x = _load(a.input)
    _check_rank(x, a.rank)
    try:
        cfg = PipelineConfig(r0=a.rank - a.k, k=a.k, epsilon0=a.eps0, epsilon=a.eps, svd_rank=a.svd_rank,
                             init=a.init, seed=a.seed, max_iters=a.max_iters)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.svd_components > min(x.shape):
        raise UsageError("SVD rank exceeds the matrix dimensions")
    res = run_pipeline(x, cfg)
    spectrum = res.augmented.spectrum
    io.save_factors(
        res.factors,
        a.out,
        manifest=dict(
            command="gsvd-nmf",
            config=dataclasses.asdict(cfg),
            seeds=[a.seed],
            dataset=a.input,
            extra={
                "fit": res.fit,
                "fit_stage1": res.fit_stage1,
                "iterations_stage1": res.iters_stage1,
                "iterations_stage2": res.iters_stage2,
                "lambda": [_lam(v) for v in spectrum.sorted()],
                "beta": res.augmented.beta.tolist(),
            },
        ),
    )
    print(f"stage 1 ({cfg.r0} components): {res.fit_stage1:.6g}%")
    print(f"final ({res.factors.rank} components): {res.fit:.6g}%")


def _lam(v):
    return "inf" if np.isinf(v) else float(v)


def _cmd_spectrum(a):
    x = _load(a.input)
    _check_rank(x, a.rank)
    if a.rank < 2:
        raise UsageError("spectrum needs rank >= 2")
    f0 = make_init(x, a.rank, a.init, a.seed)
    fit = run_hals(x, f0, SolverSettings(a.eps, a.max_iters, a.seed))
    spectrum, _ = lambda_spectrum(truncated_svd(x, a.rank), fit.factors)
    finite = spectrum.finite
    med = float(np.median(finite)) if finite.size else float("nan")
    print("rank,index,lambda,ratio_to_median")
    for pos, idx in enumerate(spectrum.order, start=1):
        v = spectrum.values[idx]
        ratio = v / med if finite.size else float("nan")
        print(f"{pos},{idx},{format(v, '.10g')},{format(ratio, '.6g')}")


def _cmd_bench(a):
    x = _load(a.input)
    _check_rank(x, a.rank)
    if a.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        cfg = PipelineConfig(r0=a.rank - a.k, k=a.k, epsilon0=a.eps0, epsilon=a.eps, svd_rank=a.svd_rank,
                             init="random", seed=a.seed_base, max_iters=a.max_iters)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    results = run_comparison(x, a.rank, a.trials, cfg, seed_base=a.seed_base, n_jobs=a.jobs)
    _, counts, edges = diagonal_histogram(results, bins=a.bins)
    io.write_trials(out / "trials.csv", results)
    io.write_histogram(out / "histogram.csv", counts, edges)
    io.write_timings(out / "timings.csv", results)
    io.write_manifest(
        out,
        command="bench",
        config={**dataclasses.asdict(cfg), "rank": a.rank, "trials": a.trials, "bins": a.bins},
        seeds=[t.seed for t in results],
        dataset=a.input,
        outputs=["trials.csv", "histogram.csv", "timings.csv"],
    )
    deltas = np.array([t.delta for t in results])
    print(f"trials: {len(results)}  median(fit_standard - fit_gsvd): {np.median(deltas):.6g}")


def _cmd_synth(a):
    if a.features < 2:
        raise UsageError("--features must be at least 2")
    data = gen_synthetic(a.features, a.rows, a.cols, a.noise, a.seed)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_matrix(out / "X.csv", data.x)
    io.save_matrix(out / "W_true.csv", data.truth.w)
    io.save_matrix(out / "H_true.csv", data.truth.h)
    config = {"features": a.features, "rows": a.rows, "cols": a.cols, "noise": a.noise, "seed": a.seed}
    io.write_manifest(out, command="synth", config=config, seeds=[a.seed],
                      outputs=["X.csv", "W_true.csv", "H_true.csv"])
    print(f"wrote {out / 'X.csv'} ({a.rows}x{a.cols})")


_COMMANDS = {
    "nmf": _cmd_nmf,
    "gsvd-nmf": _cmd_gsvd,
    "spectrum": _cmd_spectrum,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
}


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, NnlsError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
