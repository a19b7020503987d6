"""
Reading the generalized singular value spectrum
================================================

The spectrum compares a rank-r NMF with the rank-r truncated SVD of the
same data. Values near 1 mean the NMF already spans that direction; a value
far above the rest points at structure the NMF is missing. Counting such
outliers suggests how many components to add.
"""

import numpy as np

from gsvdnmf import gen_synthetic, lambda_spectrum, run_hals, truncated_svd
from gsvdnmf.pipeline import make_init

x = gen_synthetic(seed=0).x

for r in (8, 9, 10):
    fit = run_hals(x, make_init(x, r, "random", seed=0)).factors
    spectrum, _ = lambda_spectrum(truncated_svd(x, r), fit)
    finite = spectrum.finite
    ratio = spectrum.sorted() / np.median(finite)
    print(f"rank {r:2d}: outliers={np.count_nonzero(ratio > 10)}  top ratios={np.array2string(ratio[:3], precision=3)}")

# the directions can also be checked by hand: they solve a symmetric pencil
svd = truncated_svd(x, 9)
fit = run_hals(x, make_init(x, 9, "random", seed=0)).factors
spectrum, dirs = lambda_spectrum(svd, fit)
a = (svd.u.T @ fit.w) @ (fit.h @ svd.v)
y = svd.v.T @ dirs[:, spectrum.order[1]]
lam = spectrum.values[spectrum.order[1]]
resid = np.diag(svd.sigma**2) @ y - lam * a.T @ a @ y
print("pencil residual for the second value:", np.linalg.norm(resid) / np.linalg.norm(y))
