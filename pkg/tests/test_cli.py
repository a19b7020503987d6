import subprocess
import sys

import numpy as np
import pytest

from gsvdnmf.cli import main
from gsvdnmf.io import load_matrix, save_matrix
from gsvdnmf.linalg import truncated_svd
from gsvdnmf.nmf import SolverSettings, run_hals
from gsvdnmf.pipeline import make_init
from gsvdnmf.recovery import lambda_spectrum
from gsvdnmf.synthetic import gen_synthetic


@pytest.fixture
def small_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.random((12, 3)) @ rng.random((3, 10)) + 0.01 * rng.random((12, 10))
    p = tmp_path / "x.csv"
    save_matrix(p, x)
    return p


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--features", "10", "--noise", "0", "--seed", "0", "--out", str(out)]) == 0
    return out / "X.csv"


def test_synth_writes_ground_truth(synth_csv):
    x = load_matrix(synth_csv)
    w = load_matrix(synth_csv.parent / "W_true.csv")
    h = load_matrix(synth_csv.parent / "H_true.csv")
    np.testing.assert_array_equal(x, gen_synthetic(seed=0).x)
    np.testing.assert_allclose(w @ h, x, rtol=1e-14)
    assert (synth_csv.parent / "manifest.json").exists()


def test_nmf_rank_too_big(small_csv, tmp_path, capsys):
    assert main(["nmf", "--input", str(small_csv), "--rank", "11", "--out", str(tmp_path / "o")]) == 1
    assert "rank 11" in capsys.readouterr().err


def test_nmf_writes_factors(small_csv, tmp_path):
    out = tmp_path / "o"
    assert main(["nmf", "--input", str(small_csv), "--rank", "3", "--init", "nndsvd", "--out", str(out)]) == 0
    assert load_matrix(out / "W.csv").shape == (12, 3)
    assert load_matrix(out / "H.csv").shape == (3, 10)


def test_gsvd_nmf_writes_factors(small_csv, tmp_path):
    out = tmp_path / "g"
    assert main(["gsvd-nmf", "--input", str(small_csv), "--rank", "3", "--k", "1", "--out", str(out)]) == 0
    assert load_matrix(out / "W.csv").shape[0] == 12
    assert "lambda" in (out / "manifest.json").read_text()


def test_unknown_flag_and_missing_input(small_csv, tmp_path):
    assert main(["nmf", "--input", str(small_csv), "--rank", "2", "--bogus", "--out", str(tmp_path)]) == 1
    assert main(["nmf", "--input", str(tmp_path / "nope.csv"), "--rank", "2", "--out", str(tmp_path)]) == 1
    assert main(["nmf", "--rank", "2", "--out", str(tmp_path)]) == 1
    assert main([]) == 1


def test_negative_input_rejected(tmp_path):
    p = tmp_path / "neg.csv"
    p.write_text("1,2\n-3,4\n")
    assert main(["nmf", "--input", str(p), "--rank", "1", "--out", str(tmp_path / "o")]) == 1


def test_bench_deterministic(small_csv, tmp_path):
    args = ["bench", "--input", str(small_csv), "--rank", "3", "--k", "1", "--trials", "2", "--seed-base", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("trials.csv", "histogram.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "trials.csv").read_text().splitlines()[0]
    assert header.startswith("trial_id,seed,fit_standard,fit_gsvd")


def test_spectrum_matches_library(synth_csv, capsys):
    assert main(["spectrum", "--input", str(synth_csv), "--rank", "9", "--seed", "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "rank,index,lambda,ratio_to_median"
    printed = np.array([float(r.split(",")[2]) for r in lines[1:]])
    x = load_matrix(synth_csv)
    fit = run_hals(x, make_init(x, 9, "random", 0), SolverSettings())
    spectrum, _ = lambda_spectrum(truncated_svd(x, 9), fit.factors)
    np.testing.assert_allclose(printed, spectrum.sorted(), rtol=1e-9)
    ratios = np.array([float(r.split(",")[3]) for r in lines[1:]])
    assert np.count_nonzero(ratios > 10) == 1


def test_module_entry_point(small_csv, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gsvdnmf", "nmf", "--input", str(small_csv), "--rank", "0", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
