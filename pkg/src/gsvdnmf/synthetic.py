"""Synthetic mixtures of Gaussian-bump components with known ground truth."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .nmf import NmfFactors

__all__ = ["SyntheticData", "gen_synthetic", "component_similarity", "match_components"]


@dataclass(frozen=True)
class SyntheticData:
    x: np.ndarray
    truth: NmfFactors
    noise_level: float
    seed: int


def _bumps(length, centers, width):
    grid = np.arange(length)[:, None]
    return np.exp(-0.5 * ((grid - centers[None, :]) / width) ** 2)


def gen_synthetic(n_features=10, m=200, n=300, noise_level=0.0, seed=0):
    """Data ``x = W H + |noise|`` built from Gaussian-bump components.

    Bump centers are spread evenly with a small seeded jitter; the order of
    the ``H`` centers is a seeded permutation. Amplitudes of the ``W``
    columns fall linearly from 1 to 0.5. Features 0 and 1 overlap (centers
    1.5 widths apart in both factors), the pair that rank-deficient fits
    tend to blend. The noise is ``noise_level * mean(W H) * |N(0, 1)|``.

    Returns
    -------
    SyntheticData
        Data matrix plus the ground-truth factors.
    """
    if n_features < 2:
        raise ValueError("need at least two features")
    rng = np.random.default_rng(seed)

    def centers(length):
        step = length / n_features
        c = step * (np.arange(n_features) + 0.5)
        return c + rng.uniform(-0.15, 0.15, n_features) * step

    width_w = m / (3.0 * n_features)
    width_h = n / (3.0 * n_features)
    cw = centers(m)
    ch = centers(n)[rng.permutation(n_features)]
    cw[1] = cw[0] + 1.5 * width_w
    ch[1] = ch[0] + 1.5 * width_h

    w = _bumps(m, cw, width_w) * np.linspace(1.0, 0.5, n_features)
    h = _bumps(n, ch, width_h).T
    x = w @ h
    if noise_level > 0:
        x = x + noise_level * float(np.mean(x)) * np.abs(rng.standard_normal(x.shape))
    return SyntheticData(x=x, truth=NmfFactors(w, h), noise_level=float(noise_level), seed=seed)


def component_similarity(a, b):
    """Cosine similarities between the rank-1 terms of two factorizations.

    Entry ``(i, j)`` is the cosine between ``a.w[:, i] a.h[i]`` and
    ``b.w[:, j] b.h[j]``, which factors into the product of the column and
    row cosines.
    """

    def unit(v, axis):
        norm = np.linalg.norm(v, axis=axis, keepdims=True)
        return v / np.where(norm > 0, norm, 1.0)

    cw = unit(a.w, 0).T @ unit(b.w, 0)
    ch = unit(a.h, 1) @ unit(b.h, 1).T
    return cw * ch


def match_components(recovered, truth):
    """Best one-to-one assignment of recovered to true components.

    Returns ``(assignment, scores)``: ``assignment[i]`` is the recovered
    component matched to truth component ``i`` and ``scores[i]`` its cosine
    similarity.
    """
    sim = component_similarity(truth, recovered)
    rows, cols = linear_sum_assignment(sim, maximize=True)
    return cols[np.argsort(rows)], sim[rows, cols][np.argsort(rows)]
