"""Low-rank, graph-smooth similarity kernel estimation from binary pair labels."""

from simkernel.symmat import (
    EigenConvergenceError,
    SpectralDecomposition,
    SupportInfo,
    schatten_norm,
    sign_and_support,
    spectral_soft_threshold,
    sym_eig,
)
from simkernel.graph import (
    Graph,
    SmoothingOperator,
    SpectralConditionReport,
    check_spectral_conditions,
    generate,
    laplacian,
    make_smoothing,
)
from simkernel.kernels import (
    CoherenceProfile,
    SimilarityKernel,
    coherence_coefficients,
    coherence_function,
    l2_pi2_inner,
    l2_pi2_norm_sq,
    make_target,
    sobolev_norm_sq,
)
from simkernel.sampling import (
    Dataset,
    bernstein_hilbert_rhs,
    bernstein_operator_rhs,
    design_stat,
    noise_matrix,
    sample_dataset,
    verify_xi_concentration,
)
from simkernel.estimator import (
    EstimatorConfig,
    EstimatorResult,
    choose_epsbar,
    choose_epsilon,
    choose_s_rate,
    error_l2,
    fit,
    kkt_residual,
    objective,
)

__version__ = "0.1.0"
