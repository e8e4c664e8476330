"""Robust lower bounds on Bayes factors and their sample-size adaptive version.

The robust lower bound ``B_L(p) = -e p log p`` bounds the Bayes factor in
favour of a point null from below whenever ``p < 1/e``.  It ignores the sample
size, so it is multiplied by a stabilizer

    g_q(n) = [2 n / (chi2_alpha(q) + q log n)]^(q/2) * Gamma(q/2) / e

chosen so that ``B_L`` evaluated at the adaptive significance level
``alpha_n(q)`` stays near one as ``n`` grows.  ``chi2_alpha(q)`` is the
upper-tail quantile, and when calibrating an observed p-value ``alpha`` is the
p-value itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._validation import (
    DomainError,
    check_at_least,
    check_int,
    check_open_unit,
    check_positive,
)
from .specfun import chi2_quantile, chi2_quantile_log, chi2_sf

__all__ = [
    "EvidenceInput",
    "ReferenceExperiment",
    "CalibrationResult",
    "robust_lower_bound",
    "log_robust_lower_bound",
    "posterior_prob_bound",
    "adaptive_alpha",
    "log_adaptive_alpha",
    "adaptive_alpha_exact_q1",
    "adaptive_alpha_reference",
    "stabilizer_g",
    "log_stabilizer_g",
    "stabilizer_g_q1",
    "arlb",
    "log_arlb_odds",
    "odds_to_prob",
    "arlb_self_calibration_limit",
]

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class EvidenceInput:
    """An observed p-value with its effective sample size and dimension gap."""

    p_value: float
    n_star: float
    q: int = 1

    def __post_init__(self):
        check_open_unit("p_value", self.p_value)
        check_at_least("n_star", self.n_star, 1.0)
        object.__setattr__(self, "q", check_int("q", self.q))


@dataclass(frozen=True)
class ReferenceExperiment:
    """Sample size ``n0`` at which the nominal level ``alpha0`` is deemed right."""

    n0: float
    alpha0: float = 0.05

    def __post_init__(self):
        check_at_least("n0", self.n0, 1.0)
        check_open_unit("alpha0", self.alpha0)


@dataclass(frozen=True)
class CalibrationResult:
    b_l: float
    g: float
    o_l: float
    p_l: float
    rlb_valid: bool


def robust_lower_bound(p: float) -> float:
    """``-e p log p``.

    Only a valid lower bound for ``p < 1/e``; the value is returned for larger
    ``p`` too and callers flag it.
    """
    p = check_open_unit("p", p)
    return -math.e * p * math.log(p)


def log_robust_lower_bound(log_p: float) -> float:
    """``log B_L`` from ``log p``, usable when ``p`` underflows."""
    if not log_p < 0.0:
        raise DomainError("log_p", f"must be < 0, got {log_p}")
    return 1.0 + log_p + math.log(-log_p)


def odds_to_prob(odds: float) -> float:
    if math.isinf(odds):
        return 1.0
    return odds / (1.0 + odds)


def posterior_prob_bound(p: float) -> float:
    """Lower bound on ``P(H0 | data)`` under equal prior odds."""
    return odds_to_prob(robust_lower_bound(p))


def _check_level_args(alpha, q, n_star):
    alpha = check_open_unit("alpha", alpha)
    q = check_int("q", q)
    n_star = check_at_least("n_star", n_star, 1.0)
    return alpha, q, n_star


def log_adaptive_alpha(alpha: float, q: int, n_star: float, c_alpha: float = 1.0) -> float:
    alpha, q, n_star = _check_level_args(alpha, q, n_star)
    c_alpha = check_positive("c_alpha", c_alpha)
    half = 0.5 * q
    return ((half - 1.0) * math.log(chi2_quantile(alpha, q) + q * math.log(n_star))
            - (half - 1.0) * math.log(2.0) - half * math.log(n_star)
            - math.lgamma(half) + math.log(c_alpha))


def adaptive_alpha(alpha: float, q: int, n_star: float, c_alpha: float = 1.0) -> float:
    """Significance level that shrinks with the effective sample size.

    ``c_alpha`` is left at one by default; pinning it is what
    :func:`adaptive_alpha_reference` does for ``q = 1``.
    """
    return math.exp(log_adaptive_alpha(alpha, q, n_star, c_alpha))


def adaptive_alpha_exact_q1(alpha: float, n: float) -> float:
    """``1 - F_chi2_1(chi2_alpha(1) + log n)``, the sharper ``q = 1`` form."""
    alpha = check_open_unit("alpha", alpha)
    n = check_at_least("n", n, 1.0)
    return chi2_sf(chi2_quantile(alpha, 1) + math.log(n), 1)


def adaptive_alpha_reference(ref: ReferenceExperiment, n_star: float) -> float:
    """Adaptive level anchored so that it equals ``ref.alpha0`` at ``ref.n0``."""
    n_star = check_at_least("n_star", n_star, 1.0)
    if n_star == ref.n0:
        return ref.alpha0
    c = chi2_quantile(ref.alpha0, 1)
    return ref.alpha0 * math.sqrt(ref.n0 * (math.log(ref.n0) + c) / (n_star * (math.log(n_star) + c)))


def _log_g_from_quantile(chi2_q: float, q: int, n_star: float) -> float:
    half = 0.5 * q
    return half * math.log(2.0 * n_star / (chi2_q + q * math.log(n_star))) + math.lgamma(half) - 1.0


def log_stabilizer_g(alpha: float, q: int, n_star: float) -> float:
    alpha, q, n_star = _check_level_args(alpha, q, n_star)
    return _log_g_from_quantile(chi2_quantile(alpha, q), q, n_star)


def stabilizer_g(alpha: float, q: int, n_star: float) -> float:
    """Sample-size stabilizer ``g_q(n*)`` multiplying the robust lower bound."""
    return math.exp(log_stabilizer_g(alpha, q, n_star))


def stabilizer_g_q1(alpha: float, n_star: float) -> float:
    """Closed ``q = 1`` form ``sqrt(2 pi n / (e^2 (chi2_alpha(1) + log n)))``."""
    alpha = check_open_unit("alpha", alpha)
    n_star = check_at_least("n_star", n_star, 1.0)
    return math.sqrt(2.0 * math.pi * n_star
                     / (math.e ** 2 * (chi2_quantile(alpha, 1) + math.log(n_star))))


def log_arlb_odds(log_p: float, q: int, n_star: float, floor_at_rlb: bool = True) -> float:
    """``log O_L`` computed entirely from ``log p``.

    Lets simulation code handle p-values far below the smallest double.
    """
    log_bl = log_robust_lower_bound(log_p)
    log_g = _log_g_from_quantile(chi2_quantile_log(log_p, q), q, n_star)
    if floor_at_rlb:
        log_g = max(log_g, 0.0)
    return log_bl + log_g


def arlb(evidence: EvidenceInput, floor_at_rlb: bool = True) -> CalibrationResult:
    """Adaptive robust lower bounds on the posterior odds and probability of H0.

    With ``floor_at_rlb`` (the default) the odds bound never drops below the
    plain robust lower bound: ``O_L = B_L * max(1, g)``.  This only matters
    when ``g < 1``, i.e. small samples relative to ``q``.  Set it to ``False``
    for the bare product ``B_L * g``.  ``g`` is always reported unfloored.
    """
    p, q, n = evidence.p_value, evidence.q, evidence.n_star
    b_l = robust_lower_bound(p)
    g = stabilizer_g(p, q, n)
    o_l = b_l * (max(g, 1.0) if floor_at_rlb else g)
    return CalibrationResult(b_l=b_l, g=g, o_l=o_l, p_l=odds_to_prob(o_l), rlb_valid=p < INV_E)


def arlb_self_calibration_limit(alpha: float, q: int, n_star: float) -> float:
    """``B_L(alpha_n(q)) * g_q(n)`` with ``c_alpha = 1``; tends to one as ``n`` grows."""
    log_level = log_adaptive_alpha(alpha, q, n_star, 1.0)
    return math.exp(log_robust_lower_bound(log_level) + log_stabilizer_g(alpha, q, n_star))
