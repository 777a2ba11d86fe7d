"""Shannon entropy estimation for short-memory linear processes.

Core pipeline: simulate a one-sided moving-average process, estimate its
marginal density with a compactly supported kernel, integrate
-f_n log f_n over the level set where the estimate clears a shrinking
threshold, and compare against exact entropy oracles in reproducible
Monte Carlo experiments.
"""

from .entropy import (
    ConvergenceError,
    DensityTable,
    EntropyEstimate,
    LevelSet,
    ThresholdOrderWarning,
    ThresholdRule,
    gaussian_density,
    integral_estimator,
    level_set,
    marginal_density_by_convolution,
    quadrature_entropy,
    threshold,
    true_entropy_gaussian,
    truncated_true_term,
)
from .experiments import (
    ConvergenceReport,
    ExperimentConfig,
    parse_config,
    render_csv,
    run_convergence,
    run_rate_check,
)
from .innovations import (
    InnovationModel,
    innovation_density,
    sample_innovations,
    validate_density_conditions,
)
from .kde import (
    BandwidthRule,
    DensityEstimate,
    Grid,
    bandwidth,
    default_grid,
    kde_on_grid,
    kde_on_grid_naive,
    sup_error,
    symmetric_grid,
)
from .kernels import KERNELS, Kernel, get_kernel, kernel_eval, validate_kernel
from .linear_process import (
    CoefficientSequence,
    Finite,
    Geometric,
    Hyperbolic,
    MemoryClassification,
    SampleSeries,
    classify_memory,
    materialize_coefficients,
    simulate,
    stationary_variance,
)
from .reports import ConditionCheck, ConditionReport

__version__ = "0.1.0"

__all__ = [
    "BandwidthRule",
    "CoefficientSequence",
    "ConditionCheck",
    "ConditionReport",
    "ConvergenceError",
    "ConvergenceReport",
    "DensityEstimate",
    "DensityTable",
    "EntropyEstimate",
    "ExperimentConfig",
    "Finite",
    "Geometric",
    "Grid",
    "Hyperbolic",
    "InnovationModel",
    "KERNELS",
    "Kernel",
    "LevelSet",
    "MemoryClassification",
    "SampleSeries",
    "ThresholdOrderWarning",
    "ThresholdRule",
    "bandwidth",
    "classify_memory",
    "default_grid",
    "gaussian_density",
    "get_kernel",
    "innovation_density",
    "integral_estimator",
    "kde_on_grid",
    "kde_on_grid_naive",
    "kernel_eval",
    "level_set",
    "marginal_density_by_convolution",
    "materialize_coefficients",
    "parse_config",
    "quadrature_entropy",
    "render_csv",
    "run_convergence",
    "run_rate_check",
    "sample_innovations",
    "simulate",
    "stationary_variance",
    "sup_error",
    "symmetric_grid",
    "threshold",
    "true_entropy_gaussian",
    "truncated_true_term",
    "validate_density_conditions",
    "__version__",
]
