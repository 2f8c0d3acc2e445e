"""Geometric median with certified error bounds and geometric median-of-means."""

from .core import CovarianceSummary, Dataset, center, covariance_summary, sample_mean, top_eigenvalue
from .growth import (
    CollinearData,
    GrowthCertificate,
    error_certificate,
    growth_constants,
    growth_lower_bound,
    stop_threshold,
)
from .objective import eval_f, eval_f_delta, grad_f, grad_f_delta, hessian_f_delta
from .robust import MomConfig, coordinatewise_median, geometric_mom, replicated_mom, spatial_sign_covariance
from .solvers import MedianResult, SolverConfig, charbonnier_agd, newton_charbonnier, solve, weiszfeld

__all__ = [
    "CollinearData",
    "CovarianceSummary",
    "Dataset",
    "GrowthCertificate",
    "MedianResult",
    "MomConfig",
    "SolverConfig",
    "center",
    "charbonnier_agd",
    "coordinatewise_median",
    "covariance_summary",
    "error_certificate",
    "eval_f",
    "eval_f_delta",
    "geometric_mom",
    "grad_f",
    "grad_f_delta",
    "growth_constants",
    "growth_lower_bound",
    "hessian_f_delta",
    "newton_charbonnier",
    "replicated_mom",
    "sample_mean",
    "solve",
    "spatial_sign_covariance",
    "stop_threshold",
    "top_eigenvalue",
    "weiszfeld",
]

__version__ = "0.1.0"
