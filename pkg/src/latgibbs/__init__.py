"""Lattice Gaussian sampling by systematic-scan Gibbs MCMC, LLL-aided
mixing, and sampler decoding for CVP and MIMO detection."""

from .dgauss import (
    Gaussian1D,
    GaussianParams,
    default_box,
    lattice_pmf_exact,
    rho,
    sample_1d,
)
from .decoder import (
    SIGMA_FLOOR,
    DecodeOutcome,
    SigmaStrategy,
    correct_radius,
    cvp_complexity,
    sampler_decode,
    sigma_distance,
    sigma_hassibi,
    sigma_statistic,
    startup_decide,
)
from .diagnostics import (
    CorrelationReport,
    FiniteChain,
    build_sweep_kernel,
    enumerate_cvp,
    hgr_correlation,
    marginal_detailed_balance,
    reduction_improves_gamma,
    shortest_vector,
    tv_decay,
    convergence_rate_report,
)
from .errors import (
    DomainError,
    EnumerationLimitError,
    LatGibbsError,
    SchemaError,
    SingularBasisError,
    SupportError,
)
from .gibbs import (
    ChainConfig,
    ChainState,
    conditional_1d,
    finite_alphabet_chain,
    lr_aided_chain,
    run_chain,
    sweep,
)
from .lattice import (
    Basis,
    LatticePoint,
    babai_nearest_plane,
    gram_schmidt,
    orthogonality_defect,
    zero_forcing,
)
from .lll import ReductionResult, is_lll_reduced, lll_reduce, size_reduce
from .mimo import (
    BerRecord,
    MimoConfig,
    complexify_to_real,
    qam_demodulate,
    qam_modulate,
    run_ber_experiment,
    snr_to_noise_variance,
)

__version__ = "0.1.0"
