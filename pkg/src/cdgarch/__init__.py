"""Simulation and analysis of the CDGARCH(p, q) continuous-time GARCH model with delay."""

from .errors import ConditionError, ConfigError, ContourTooCoarseError
from .euler import euler_coefficients, euler_returns, euler_simulate
from .events import EnsembleGrid, event_simulate, simulate_ensemble, xi_evaluate
from .kernels import (
    DelayModel,
    ExponentialKernel,
    TabulatedKernel,
    combine,
    kernel_norms,
    volterra_F,
)
from .mean import MeanPath, renewal_kernel_zeta, solve_mean_fde, solve_mean_renewal
from .noise import (
    IncrementSeries,
    JumpLog,
    NoiseSpec,
    derive_moments,
    sample_increments,
    sample_jump_events,
    truncate_jumps,
)
from .paths import HistorySegment, SamplePath, compare_paths
from .stability import (
    StabilityReport,
    analyze,
    characteristic_delta,
    moment_bound_report,
    positivity_floor,
    scan_roots,
    stationary_mean,
    theoretical_return_autocov,
)
from .stats import empirical_autocov, ensemble_mean, weak_dependence_check

__version__ = "0.1.0"

__all__ = [
    "ConditionError",
    "ConfigError",
    "ContourTooCoarseError",
    "DelayModel",
    "EnsembleGrid",
    "ExponentialKernel",
    "HistorySegment",
    "IncrementSeries",
    "JumpLog",
    "MeanPath",
    "NoiseSpec",
    "SamplePath",
    "StabilityReport",
    "TabulatedKernel",
    "analyze",
    "characteristic_delta",
    "combine",
    "compare_paths",
    "derive_moments",
    "empirical_autocov",
    "ensemble_mean",
    "euler_coefficients",
    "euler_returns",
    "euler_simulate",
    "event_simulate",
    "kernel_norms",
    "moment_bound_report",
    "positivity_floor",
    "renewal_kernel_zeta",
    "sample_increments",
    "sample_jump_events",
    "scan_roots",
    "simulate_ensemble",
    "solve_mean_fde",
    "solve_mean_renewal",
    "stationary_mean",
    "theoretical_return_autocov",
    "truncate_jumps",
    "volterra_F",
    "weak_dependence_check",
    "xi_evaluate",
]
