"""Kernel two-sample testing with unequal sample sizes.

Squared-MMD estimators with exact finite-sample variances, min(nx, ny)
scaled limiting distributions, exactly valid permutation tests, and
power-oriented kernel tuning, all validated against a brute-force
enumeration oracle over small discrete distributions.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AltLimit,
    SpectralModel,
    alt_limit,
    estimate_null_eigenvalues,
    group_ratios,
    normal_cdf,
    null_quantile,
    power_approx,
    sample_null_limit,
)
from .checks import CorpusInstance, OracleCheckReport, random_corpus, run_oracle_checks
from .errors import (
    DataError,
    DistributionError,
    EnumerationTooLargeError,
    IncompleteTableError,
    InsufficientSamplesError,
    MMDTestError,
    PairingError,
    ParameterError,
    ShapeError,
)
from .estimators import EstimatorValue, gap_bound, mmd_unbiased, mmd_ustat
from .genustat import (
    GenUSpec,
    ZetaTable,
    check_block_symmetry,
    degeneracy_order,
    gen_u_evaluate,
    mmd_gen_u_spec,
    mmd_zeta_table,
    sen_variance,
)
from .io import config_hash, read_matrix_csv, write_matrix_csv
from .kernels import FAMILIES, GramBlocks, KernelSpec, eval_kernel, gram_blocks, gram_matrix
from .oracle import (
    Degeneracy,
    DiscreteDistribution,
    Moments,
    PopulationFunctionals,
    brute_force_moments,
    classify_degeneracy,
    covariance_quadratic_form,
    population_functionals,
)
from .permtest import (
    CurvePoint,
    RejectionCurveConfig,
    TestResult,
    permutation_test,
    rejection_rate,
)
from .samples import SampleSet
from .simulate import (
    ks_one_sample,
    ks_to_normal,
    ks_two_sample,
    laplace_sampler,
    normal_sampler,
    qq_pairs,
    replicate_mmd,
)
from .tuner import TuneConfig, TuneResult, snr_objective, split_samples, tune
from .variance import (
    VarianceReport,
    mmd_unbiased_variance,
    mmd_ustat_variance,
    plugin_zetas,
    sigma_hat,
    ustat_variance,
)

__all__ = [
    "__version__",
    "AltLimit",
    "CorpusInstance",
    "CurvePoint",
    "DataError",
    "Degeneracy",
    "DiscreteDistribution",
    "DistributionError",
    "EnumerationTooLargeError",
    "EstimatorValue",
    "FAMILIES",
    "GenUSpec",
    "GramBlocks",
    "IncompleteTableError",
    "InsufficientSamplesError",
    "KernelSpec",
    "MMDTestError",
    "Moments",
    "OracleCheckReport",
    "PairingError",
    "ParameterError",
    "PopulationFunctionals",
    "RejectionCurveConfig",
    "SampleSet",
    "ShapeError",
    "SpectralModel",
    "TestResult",
    "TuneConfig",
    "TuneResult",
    "VarianceReport",
    "ZetaTable",
    "alt_limit",
    "brute_force_moments",
    "check_block_symmetry",
    "classify_degeneracy",
    "config_hash",
    "covariance_quadratic_form",
    "degeneracy_order",
    "estimate_null_eigenvalues",
    "eval_kernel",
    "gap_bound",
    "gen_u_evaluate",
    "gram_blocks",
    "gram_matrix",
    "group_ratios",
    "ks_one_sample",
    "ks_to_normal",
    "ks_two_sample",
    "laplace_sampler",
    "mmd_gen_u_spec",
    "mmd_unbiased",
    "mmd_unbiased_variance",
    "mmd_ustat",
    "mmd_ustat_variance",
    "mmd_zeta_table",
    "normal_cdf",
    "normal_sampler",
    "null_quantile",
    "permutation_test",
    "plugin_zetas",
    "population_functionals",
    "power_approx",
    "qq_pairs",
    "random_corpus",
    "read_matrix_csv",
    "rejection_rate",
    "replicate_mmd",
    "run_oracle_checks",
    "sample_null_limit",
    "sen_variance",
    "sigma_hat",
    "snr_objective",
    "split_samples",
    "tune",
    "ustat_variance",
    "write_matrix_csv",
]
