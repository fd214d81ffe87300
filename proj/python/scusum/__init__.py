"""Spectral CUSUM for emerging communities in dynamic Gaussian-weighted graphs."""

from ._core import (
    ValidityError,
    calibrate,
    estimate_arl,
    estimate_edd,
    indicator,
    mean_matrix,
    run_detector,
    simulate,
    theory,
    top_m_eigs,
)

__all__ = [
    "ValidityError",
    "calibrate",
    "estimate_arl",
    "estimate_edd",
    "indicator",
    "mean_matrix",
    "run_detector",
    "simulate",
    "theory",
    "top_m_eigs",
]
