"""
Building blocks: NNDSVD starts and nonnegative least squares
=============================================================

NNDSVD turns the leading singular pairs into a nonnegative starting point.
The zero entries it leaves can be filled with the data mean ("a") or with
small random values ("ar"). NNLS is the small convex solver used to rescale
components after recovery.
"""

import numpy as np

from gsvdnmf import init_nndsvd, nnls, relative_fitting_error, run_hals

rng = np.random.default_rng(1)
x = rng.random((40, 4)) @ rng.random((4, 50))

for variant in ("plain", "a", "ar"):
    f0 = init_nndsvd(x, 4, variant, seed=0)
    res = run_hals(x, f0)
    print(f"{variant:5s}: zeros in W={np.count_nonzero(f0.w == 0):3d}  "
          f"start {relative_fitting_error(x, f0):7.3f}%  end {relative_fitting_error(x, res.factors):.2e}%  "
          f"sweeps {res.n_iter}")

# NNLS clamps what plain least squares would make negative
a = rng.standard_normal((8, 3))
b = a @ np.array([1.0, -0.5, 2.0])
print("least squares:", np.round(np.linalg.lstsq(a, b, rcond=None)[0], 4))
print("nnls:         ", np.round(nnls(a, b), 4))
