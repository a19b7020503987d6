"""Matrix and result files: dense CSV, MatrixMarket, run manifests."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import scipy.io

from . import __version__

__all__ = [
    "MatrixFormatError",
    "load_matrix",
    "save_matrix",
    "save_factors",
    "file_checksum",
    "write_manifest",
    "write_trials",
    "write_histogram",
    "write_timings",
    "TRIAL_COLUMNS",
]

TRIAL_COLUMNS = (
    "trial_id",
    "seed",
    "fit_standard",
    "fit_gsvd",
    "iters_standard",
    "iters_gsvd_stage1",
    "iters_gsvd_stage2",
)


class MatrixFormatError(ValueError):
    """Unreadable or invalid matrix file."""


def _fmt(v):
    # +0.0 turns -0.0 into 0.0
    return format(float(v) + 0.0, ".17g")


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _read_csv(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            tokens = [f.strip() for f in fields]
            if not rows and width is None and not all(_is_number(t) for t in tokens):
                # header line
                width = len(tokens)
                continue
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                raise MatrixFormatError(f"{path}:{lineno}: non-numeric entry") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise MatrixFormatError(f"{path}:{lineno}: expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise MatrixFormatError(f"{path}: no data")
    return np.array(rows, dtype=np.float64)


def _read_mm(path):
    try:
        data = scipy.io.mmread(path)
    except Exception as exc:
        raise MatrixFormatError(f"{path}: invalid MatrixMarket file ({exc})") from None
    if hasattr(data, "toarray"):
        data = data.toarray()
    data = np.asarray(data)
    if np.iscomplexobj(data):
        raise MatrixFormatError(f"{path}: complex matrices are not supported")
    return data.astype(np.float64)


def load_matrix(path, nonnegative=False):
    """Read a dense matrix from CSV or MatrixMarket.

    The format is chosen from the first line: a ``%%MatrixMarket`` banner
    selects MatrixMarket (array or coordinate; absent coordinate entries
    are zero), anything else is read as comma-separated rows with an
    optional non-numeric header line.

    Raises
    ------
    MatrixFormatError
        For empty files, malformed lines (with line number), non-finite
        entries, or negative entries when `nonnegative` is set.
    """
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
    if not first:
        raise MatrixFormatError(f"{path}: empty file")
    if first.startswith("%%MatrixMarket"):
        x = _read_mm(path)
    else:
        x = _read_csv(path)
    if x.ndim != 2 or x.size == 0:
        raise MatrixFormatError(f"{path}: no data")
    if not np.all(np.isfinite(x)):
        raise MatrixFormatError(f"{path}: non-finite entries")
    if nonnegative and np.any(x < 0):
        i, j = np.argwhere(x < 0)[0]
        raise MatrixFormatError(f"{path}: negative entry {x[i, j]!r} at row {i + 1}, column {j + 1}")
    return x


def save_matrix(path, x):
    """Write `x` as CSV with 17 significant digits."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        for row in x:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")


def file_checksum(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command, config, seeds, dataset=None, outputs=(), extra=None):
    """Write ``manifest.json`` describing a run well enough to replay it."""
    out_dir = Path(out_dir)
    manifest = {
        "tool": "gsvdnmf",
        "version": __version__,
        "command": command,
        "config": config,
        "seeds": [int(s) for s in seeds],
        "dataset": None,
        "outputs": sorted(str(p) for p in outputs),
    }
    if dataset is not None:
        manifest["dataset"] = {"path": str(dataset), "sha256": file_checksum(dataset)}
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_factors(factors, out_dir, manifest=None):
    """Write ``W.csv`` and ``H.csv`` (and a manifest if given) to `out_dir`.

    `manifest` is a dict of keyword arguments for :func:`write_manifest`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "W.csv", out_dir / "H.csv"]
    save_matrix(paths[0], factors.w)
    save_matrix(paths[1], factors.h)
    if manifest is not None:
        kw = dict(manifest)
        kw["outputs"] = [p.name for p in paths] + list(kw.get("outputs", ()))
        paths.append(write_manifest(out_dir, **kw))
    return paths


def write_trials(path, results):
    """Trial table as CSV. Wall-clock times are left out so the file is
    reproducible byte for byte."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRIAL_COLUMNS) + "\n")
        for t in results:
            fh.write(
                ",".join(
                    [
                        str(t.trial_id),
                        str(t.seed),
                        _fmt(t.fit_standard),
                        _fmt(t.fit_gsvd),
                        str(t.iters_standard),
                        str(t.iters_gsvd_stage1),
                        str(t.iters_gsvd_stage2),
                    ]
                )
                + "\n"
            )


def write_timings(path, results):
    with open(path, "w", newline="") as fh:
        fh.write("trial_id,time_standard,time_gsvd\n")
        for t in results:
            fh.write(f"{t.trial_id},{t.time_standard:.6f},{t.time_gsvd:.6f}\n")


def write_histogram(path, counts, edges):
    with open(path, "w", newline="") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{_fmt(lo)},{_fmt(hi)},{int(c)}\n")
