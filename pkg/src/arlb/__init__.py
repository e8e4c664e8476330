"""Adaptive robust lower bounds for calibrating p-values.

The :mod:`arlb.calibration` module holds the bounds themselves; reference
Bayes factors live in :mod:`arlb.bayes_ref`, regression comparisons in
:mod:`arlb.linmod` and the numerical consistency checks in
:mod:`arlb.consistency`.
"""

from ._validation import ConvergenceError, DomainError
from .calibration import (
    CalibrationResult,
    EvidenceInput,
    ReferenceExperiment,
    adaptive_alpha,
    adaptive_alpha_exact_q1,
    adaptive_alpha_reference,
    arlb,
    arlb_self_calibration_limit,
    posterior_prob_bound,
    robust_lower_bound,
    stabilizer_g,
)
from .linmod import Dataset, fit_ols, hald_dataset, hald_encompassing_table

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "CalibrationResult",
    "EvidenceInput",
    "ReferenceExperiment",
    "adaptive_alpha",
    "adaptive_alpha_exact_q1",
    "adaptive_alpha_reference",
    "arlb",
    "arlb_self_calibration_limit",
    "posterior_prob_bound",
    "robust_lower_bound",
    "stabilizer_g",
    "Dataset",
    "fit_ols",
    "hald_dataset",
    "hald_encompassing_table",
]
