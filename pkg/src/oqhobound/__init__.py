"""Robust performance bounds for open quantum harmonic oscillators.

Builds physically realizable linear quantum stochastic models, certifies
exponential decay of their weighted covariance, and bounds the worst-case
infinite-horizon quadratic cost over relative-entropy balls of system-field
states together with the optimal risk-sensitivity parameter.
"""

__version__ = "0.1.0"

from .bounds import (
    RobustBound,
    qef_rate_bound_closed,
    qef_rate_bound_integral,
    sweep,
    worst_case_bound_closed,
    worst_case_bound_numeric,
)
from .certificate import DecayCertificate, make_certificate, optimize_mu, verify_certificate
from .oqho import (
    InvariantModel,
    OqhoParams,
    StateSpace,
    build_state_space,
    ccr_kernel,
    check_physical_realizability,
    covariance_kernel,
    invariant_model,
    weighted_covariance,
)

__all__ = [
    "DecayCertificate",
    "InvariantModel",
    "OqhoParams",
    "RobustBound",
    "StateSpace",
    "build_state_space",
    "ccr_kernel",
    "check_physical_realizability",
    "covariance_kernel",
    "invariant_model",
    "make_certificate",
    "optimize_mu",
    "qef_rate_bound_closed",
    "qef_rate_bound_integral",
    "sweep",
    "verify_certificate",
    "weighted_covariance",
    "worst_case_bound_closed",
    "worst_case_bound_numeric",
]
