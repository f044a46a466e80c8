"""Kernel density and distribution estimation for dependent Gaussian data.

The package pairs exact estimators (finite kernel sums, quadrature
expectations) with a deterministic simulation harness that checks
distributional limits, convergence rates, almost-sure uniform bounds, and
block-moment inequalities for iid, AR(1), and moving-average sequences.
"""

__version__ = "0.1.0"

from .bandwidth import BandwidthSchedule, ConditionVerdict, bandwidth_at, check_conditions
from .blocking import BlockPartition, block_sums, bracket_threshold, build_partition, moment_bound_check
from .estimator import (
    DEFAULT_GRID,
    EstimateCurve,
    Grid,
    bias,
    cdf_clt_statistic,
    cdf_estimate,
    clt_statistic,
    density_estimate,
    expected_cdf,
    expected_density,
    lp_deviation,
    sup_deviation,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    GateError,
    check_gates,
    fit_loglog_slope,
    ks_statistic,
    run_experiment,
)
from .kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    TRIANGULAR,
    UNIFORM,
    KernelSpec,
    evaluate,
    kernel_cdf,
    kernel_constants,
    kernel_from_name,
)
from .processes import (
    ProcessModel,
    SamplePath,
    conditional_mean,
    generate_path,
    marginal_cdf,
    marginal_density,
    rho_mixing_coefficient,
)

__all__ = [
    "BandwidthSchedule",
    "BlockPartition",
    "ConditionVerdict",
    "DEFAULT_GRID",
    "EPANECHNIKOV",
    "EstimateCurve",
    "ExperimentConfig",
    "ExperimentReport",
    "GAUSSIAN",
    "GateError",
    "Grid",
    "KernelSpec",
    "ProcessModel",
    "SamplePath",
    "TRIANGULAR",
    "UNIFORM",
    "bandwidth_at",
    "bias",
    "block_sums",
    "bracket_threshold",
    "build_partition",
    "cdf_clt_statistic",
    "cdf_estimate",
    "check_conditions",
    "check_gates",
    "clt_statistic",
    "conditional_mean",
    "density_estimate",
    "evaluate",
    "expected_cdf",
    "expected_density",
    "fit_loglog_slope",
    "generate_path",
    "kernel_cdf",
    "kernel_constants",
    "kernel_from_name",
    "ks_statistic",
    "lp_deviation",
    "marginal_cdf",
    "marginal_density",
    "moment_bound_check",
    "rho_mixing_coefficient",
    "run_experiment",
    "sup_deviation",
]
