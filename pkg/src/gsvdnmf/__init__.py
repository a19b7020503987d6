"""GSVD-NMF: recover components missing from under-complete NMF fits."""

__version__ = "0.1.0"

from .linalg import GsvdResult, NnlsError, TruncatedSvd, gsvd_pair, nnls, truncated_svd
from .nmf import (
    HalsResult,
    NmfFactors,
    SolverSettings,
    init_nndsvd,
    init_random,
    objective,
    relative_fitting_error,
    run_hals,
)
from .pipeline import (
    PipelineConfig,
    TrialResult,
    diagonal_histogram,
    run_comparison,
    run_pipeline,
    run_standard,
)
from .recovery import (
    AugmentedFactors,
    LambdaSpectrum,
    SingularDirectionsError,
    lambda_spectrum,
    recover,
    rescale_beta,
    select_directions,
    solve_s_alpha,
    truncate_pairs,
)
from .synthetic import gen_synthetic, match_components
