"""Directions of movement on probability simplices.

Extraction of (arc length, direction) observations from proportion pairs,
scenario simulation, spatially varying directional mixture fitting by MCMC,
posterior-predictive scoring, and circular summaries. The heavy lifting lives
in the compiled extension; this package re-exports its public surface.
"""

from ._core import (
    Dataset,
    DataError,
    FitResult,
    NumericError,
    ValidationError,
    arctan_star,
    cartesian_to_spherical,
    chi_square_quantile,
    circular_interval,
    circular_interval_contains,
    circular_mean,
    extract_direction,
    fit,
    log_bessel_i,
    posterior_predictive,
    reconstruct_endpoint,
    resultant_length,
    rhat,
    simulate,
    spherical_to_cartesian,
    vmf_log_normalizer,
)

__all__ = [
    "Dataset",
    "DataError",
    "FitResult",
    "NumericError",
    "ValidationError",
    "arctan_star",
    "cartesian_to_spherical",
    "chi_square_quantile",
    "circular_interval",
    "circular_interval_contains",
    "circular_mean",
    "extract_direction",
    "fit",
    "log_bessel_i",
    "posterior_predictive",
    "reconstruct_endpoint",
    "resultant_length",
    "rhat",
    "simulate",
    "spherical_to_cartesian",
    "vmf_log_normalizer",
]
