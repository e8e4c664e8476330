"""Reference Bayes factors that the calibrated bounds are compared against.

All public Bayes factors are ``B01``, evidence in favour of the null.  The
nested linear model factor is derived as ``B10`` and inverted on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

from ._validation import (
    ConvergenceError,
    DomainError,
    check_int,
    check_open_unit,
    check_positive,
    check_real,
)
from .specfun import (
    QuadratureSpec,
    adaptive_quad,
    chi2_quantile,
    exp_integral_En_scaled,
)

__all__ = [
    "NormalKnownVarScenario",
    "NormalUnknownVarScenario",
    "ExponentialScenario",
    "ScaledBeta2",
    "NestedLinearComparison",
    "PRIOR_PRESETS",
    "bf_normal_known_var",
    "bf_normal_intrinsic_approx",
    "bf_normal_robust_prior",
    "Marginals",
    "exponential_marginals",
    "exponential_marginal_closed_forms",
    "bf_exponential_intrinsic",
    "lr_pvalue_to_xbar_exponential",
    "PredictiveIntegral",
    "predictive_gamma_sbeta2",
    "giron_prior_exponents",
    "log_bf10_nested_linear_giron",
    "bf_nested_linear_giron",
    "bf_bic",
]

_QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=4000)


@dataclass(frozen=True)
class NormalKnownVarScenario:
    """Standardized mean ``z = sqrt(n) (xbar - theta0) / sigma``; prior variance ``k sigma^2``."""

    z: float
    n: int
    k: float = 2.0

    def __post_init__(self):
        check_real("z", self.z)
        object.__setattr__(self, "n", check_int("n", self.n))
        check_positive("k", self.k)


@dataclass(frozen=True)
class NormalUnknownVarScenario:
    t: float
    n: int

    def __post_init__(self):
        check_real("t", self.t)
        object.__setattr__(self, "n", check_int("n", self.n, minimum=3))


@dataclass(frozen=True)
class ExponentialScenario:
    xbar: float
    n: int
    lambda0: float = 1.0

    def __post_init__(self):
        check_positive("xbar", self.xbar)
        object.__setattr__(self, "n", check_int("n", self.n))
        check_positive("lambda0", self.lambda0)


@dataclass(frozen=True)
class ScaledBeta2:
    """Density ``Gamma(p+q)/(Gamma(p)Gamma(q)) b^q beta^(p-1) / (beta + b)^(p+q)``."""

    p: float
    q: float
    b: float

    def __post_init__(self):
        check_positive("p", self.p)
        check_positive("q", self.q)
        check_positive("b", self.b)

    def log_pdf(self, beta: float) -> float:
        p, q, b = self.p, self.q, self.b
        return (math.lgamma(p + q) - math.lgamma(p) - math.lgamma(q) + q * math.log(b)
                + (p - 1.0) * math.log(beta) - (p + q) * math.log(beta + b))


PRIOR_PRESETS = ("reference", "jeffreys", "modified_jeffreys")


def giron_prior_exponents(preset: str, k: int, k1: int) -> tuple[int, int]:
    """``(q0, q1)`` for a named prior family on the error scales."""
    if preset == "reference":
        return 1, 1
    if preset == "jeffreys":
        return k1 + 1, k + 1
    if preset == "modified_jeffreys":
        return 1, k - k1 + 1
    raise DomainError("preset", f"unknown prior preset {preset!r}; expected one of {PRIOR_PRESETS}")


@dataclass(frozen=True)
class NestedLinearComparison:
    """Full model with ``k`` columns against a nested model with ``k1`` columns.

    Column counts include the intercept.  ``rss_ratio`` is
    ``RSS_reduced / RSS_full >= 1``; it equals one when the dropped columns
    explain nothing.
    """

    n: int
    k: int
    k1: int
    rss_ratio: float
    q0: int = 1
    q1: int = 1

    def __post_init__(self):
        n = check_int("n", self.n)
        k = check_int("k", self.k)
        k1 = check_int("k1", self.k1, minimum=0)
        if not k > k1:
            raise DomainError("k1", f"must be smaller than k={k}, got {k1}")
        if not n > k + 1:
            raise DomainError("n", f"must exceed k + 1 = {k + 1}, got {n}")
        ratio = check_positive("rss_ratio", self.rss_ratio)
        if ratio < 1.0:
            raise DomainError("rss_ratio", f"RSS_reduced / RSS_full must be >= 1, got {ratio}")
        check_int("q0", self.q0, minimum=0)
        check_int("q1", self.q1, minimum=0)

    @classmethod
    def with_preset(cls, n: int, k: int, k1: int, rss_ratio: float, preset: str = "reference"):
        q0, q1 = giron_prior_exponents(preset, k, k1)
        return cls(n=n, k=k, k1=k1, rss_ratio=rss_ratio, q0=q0, q1=q1)


# ---------------------------------------------------------------------------
# Normal mean


def bf_normal_known_var(s: NormalKnownVarScenario) -> float:
    """``sqrt(1 + k n) exp(-z^2 / (2 (1 + 1/(k n))))`` for a ``N(theta0, k sigma^2)`` prior."""
    kn = s.k * s.n
    return math.exp(0.5 * math.log1p(kn) - 0.5 * s.z * s.z / (1.0 + 1.0 / kn))


def bf_normal_intrinsic_approx(s: NormalUnknownVarScenario, log_space: bool = True) -> float:
    """Closed-form approximation to the intrinsic-prior Bayes factor, unknown variance."""
    n = s.n
    r = s.t * s.t / (n - 1)
    if not log_space:
        return math.sqrt(n) * (1.0 + r) ** (-n / 2) * r / (1.0 + math.exp(1.0 + r))
    if r == 0.0:
        return 0.0
    # log(1 + exp(1 + r)) computed without overflow
    log_denom = (1.0 + r) + math.log1p(math.exp(-(1.0 + r)))
    return math.exp(0.5 * math.log(n) - 0.5 * n * math.log1p(r) + math.log(r) - log_denom)


def bf_normal_robust_prior(s: NormalUnknownVarScenario, log_space: bool = True) -> float:
    """Bayes factor under Berger's robust prior; finite limit ``sqrt(2 (n+1))`` at ``t = 0``."""
    n = s.n
    t2 = s.t * s.t
    lead = math.sqrt(2.0 / (n + 1)) * (n - 2) / (n - 1)
    if not log_space:
        return (lead * t2 * (1.0 + t2 / (n - 1)) ** (-n / 2)
                / (1.0 - (1.0 + 2.0 * t2 / (n * n - 1)) ** (-(n - 2) / 2)))
    if t2 == 0.0:
        return math.sqrt(2.0 * (n + 1))
    # 1 - (1+u)^-m via expm1/log1p keeps full precision as t -> 0
    u = 2.0 * t2 / (n * n - 1)
    denom = -math.expm1(-0.5 * (n - 2) * math.log1p(u))
    return math.exp(math.log(lead) + math.log(t2) - 0.5 * n * math.log1p(t2 / (n - 1))
                    - math.log(denom))


# ---------------------------------------------------------------------------
# Exponential rate


class Marginals(NamedTuple):
    m0: float
    m1: float
    log_m0: float
    log_m1: float


def _log_m0(s: ExponentialScenario) -> float:
    return s.n * math.log(s.lambda0) - s.n * s.lambda0 * s.xbar


def _log_m1_quadrature(s: ExponentialScenario) -> float:
    n, xbar, lam0 = s.n, s.xbar, s.lambda0
    mode = n / (n * xbar)  # maximiser of the likelihood part
    shift = n * math.log(mode) - n * mode * xbar

    def integrand(lam):
        if lam <= 0.0:
            return 0.0
        return math.exp(n * math.log(lam) - n * lam * xbar - shift) * lam0 / (lam + lam0) ** 2

    left, _ = adaptive_quad(integrand, 0.0, mode, _QUAD)
    right, _ = adaptive_quad(integrand, mode, math.inf, _QUAD)
    return shift + math.log(left + right)


def _log_sbeta2_exponential_closed_form(n: int, xbar: float, b: float) -> float:
    # b Gamma(n) / (n xbar)^(n-1) * {n (xbar b + 1) e^c E_n(c) - 1},  c = n xbar b
    c = n * xbar * b
    brace = (n + c) * exp_integral_En_scaled(n, c) - 1.0
    return math.log(b) + math.lgamma(n) - (n - 1) * math.log(n * xbar) + math.log(brace)


def exponential_marginal_closed_forms(s: ExponentialScenario) -> dict:
    """``log m1`` from the closed form, under both scale readings of the prior.

    ``"b=lambda0"`` is the scaled-beta-2 ``(1, 1, lambda0)`` member, whose
    density is ``lambda0 / (lambda + lambda0)^2``.  ``"b=1/lambda0"`` is the
    ``(1, 1, 1/lambda0)`` member.  Only the first matches the quadrature
    value unless ``lambda0 == 1``.
    """
    return {
        "b=lambda0": _log_sbeta2_exponential_closed_form(s.n, s.xbar, s.lambda0),
        "b=1/lambda0": _log_sbeta2_exponential_closed_form(s.n, s.xbar, 1.0 / s.lambda0),
    }


def exponential_marginals(s: ExponentialScenario) -> Marginals:
    """Marginal likelihoods under the point null and the intrinsic prior ``lambda0/(lambda+lambda0)^2``.

    ``m1`` comes from adaptive quadrature; see
    :func:`exponential_marginal_closed_forms` for the closed-form cross-check.
    """
    log_m0 = _log_m0(s)
    log_m1 = _log_m1_quadrature(s)
    return Marginals(math.exp(log_m0), math.exp(log_m1), log_m0, log_m1)


def bf_exponential_intrinsic(s: ExponentialScenario) -> float:
    m = exponential_marginals(s)
    return math.exp(m.log_m0 - m.log_m1)


def lr_pvalue_to_xbar_exponential(p: float, n: int, lambda0: float = 1.0,
                                  branch: Literal["lower", "upper"] = "lower") -> float:
    """Sample mean whose likelihood-ratio statistic has chi-square(1) p-value ``p``.

    Solves ``2 n (lambda0 xbar - 1 - log(lambda0 xbar)) = chi2_p(1)``.  The two
    roots straddle ``xbar = 1/lambda0``; ``branch`` selects one.
    """
    p = check_open_unit("p", p)
    n = check_int("n", n)
    lambda0 = check_positive("lambda0", lambda0)
    if branch not in ("lower", "upper"):
        raise DomainError("branch", f"expected 'lower' or 'upper', got {branch!r}")
    target = chi2_quantile(p, 1) / (2.0 * n)
    return _solve_lr_root(target, branch) / lambda0


def _solve_lr_root(target: float, branch: str) -> float:
    """Root of ``h(u) = u - 1 - log u = target`` on the requested side of ``u = 1``."""
    if target == 0.0:
        return 1.0

    def h(u):
        return u - 1.0 - math.log(u) - target

    if branch == "lower":
        lo, hi = math.exp(-1.0 - target), 1.0  # h(lo) > 0 since lo - 1 + 1 + target > target
        while h(lo) <= 0.0:
            lo *= 0.5
    else:
        lo, hi = 1.0, 2.0 + 2.0 * target
        while h(hi) <= 0.0:
            hi *= 2.0
    # h is monotone on each branch; Newton with bisection safeguard.
    u = 0.5 * (lo + hi)
    for _ in range(200):
        hu = h(u)
        if (hu > 0.0) == (branch == "lower"):
            lo = u
        else:
            hi = u
        slope = 1.0 - 1.0 / u
        u_new = u - hu / slope if slope != 0.0 else 0.5 * (lo + hi)
        if not lo < u_new < hi:
            u_new = 0.5 * (lo + hi)
        if abs(u_new - u) <= 1e-16 * u_new:
            return u_new
        u = u_new
    raise ConvergenceError(f"likelihood-ratio root did not converge (target={target})", u)


class PredictiveIntegral(NamedTuple):
    """Prior predictive for gamma data under a scaled-beta-2 prior.

    ``log_m`` omits the data-only factor ``prod(x)^(alpha-1) / Gamma(alpha)^n``,
    which cancels from Bayes factors.  ``log_m_closed`` is ``None`` unless
    ``p = q = 1`` or ``p = q = 1/2``.
    """

    log_m: float
    log_m_closed: float | None
    integral: float
    integral_closed: float | None


def predictive_gamma_sbeta2(n: int, alpha_shape: float, xbar: float, prior: ScaledBeta2) -> PredictiveIntegral:
    """Marginal of ``n`` Gamma(``alpha_shape``, rate beta) draws with mean ``xbar``.

    After substituting ``v = n xbar beta`` the marginal is
    ``C * b^q * (n xbar)^(q - n alpha) * J`` with

        J = int_0^inf v^(n alpha + p - 1) (v + n xbar b)^-(p+q) e^-v dv

    and ``C`` the scaled-beta-2 normaliser.  ``integral`` is ``J`` by
    quadrature, and ``integral_closed`` is ``J`` from the exponential-integral
    closed forms where those exist.
    """
    n = check_int("n", n)
    alpha_shape = check_positive("alpha_shape", alpha_shape)
    xbar = check_positive("xbar", xbar)
    p, q, b = prior.p, prior.q, prior.b
    big_n = n * alpha_shape
    c = n * xbar * b
    power = big_n + p - 1.0
    # scale by the integrand's log-maximum so tiny or huge values stay representable
    mode = max(power, 1e-12)
    shift = power * math.log(mode) - (p + q) * math.log(mode + c) - mode

    def integrand(v):
        if v <= 0.0:
            return 0.0
        return math.exp(power * math.log(v) - (p + q) * math.log(v + c) - v - shift)

    left, _ = adaptive_quad(integrand, 0.0, mode, _QUAD)
    right, _ = adaptive_quad(integrand, mode, math.inf, _QUAD)
    log_j = shift + math.log(left + right)

    log_j_closed = None
    if p == 1.0 and q == 1.0:
        brace = (big_n + c) * exp_integral_En_scaled(big_n, c) - 1.0
        log_j_closed = math.lgamma(big_n) + math.log(brace)
    elif p == 0.5 and q == 0.5:
        log_j_closed = math.lgamma(big_n + 0.5) + math.log(exp_integral_En_scaled(big_n + 0.5, c))

    log_front = (math.lgamma(p + q) - math.lgamma(p) - math.lgamma(q) + q * math.log(b)
                 + (q - big_n) * math.log(n * xbar))
    return PredictiveIntegral(
        log_m=log_front + log_j,
        log_m_closed=None if log_j_closed is None else log_front + log_j_closed,
        integral=math.exp(log_j),
        integral_closed=None if log_j_closed is None else math.exp(log_j_closed),
    )


# ---------------------------------------------------------------------------
# Nested linear models


def log_bf10_nested_linear_giron(c: NestedLinearComparison, spec: QuadratureSpec | None = None) -> float:
    """``log B10`` for the intrinsic-prior comparison of nested normal linear models.

        B10 = 2 (k+1)^(k0/2) / B(q1/2, 1/2)
              * int_0^(pi/2) sin^(k0+q0-1) cos^(q1-q0)
                (n + (k+1) s^2)^((n+q0-k-1)/2) / (n / R + (k+1) s^2)^((n+q0-k1-1)/2) dphi

    with ``s = sin(phi)``, ``k0 = k - k1`` and ``R = RSS_reduced / RSS_full``.
    """
    n, k, k1, q0, q1 = c.n, c.k, c.k1, c.q0, c.q1
    k0 = k - k1
    kp1 = k + 1.0
    nb = n / c.rss_ratio
    e_num = 0.5 * (n + q0 - k - 1)
    e_den = 0.5 * (n + q0 - k1 - 1)
    sin_pow = k0 + q0 - 1
    cos_pow = q1 - q0

    def log_integrand(phi):
        s = math.sin(phi)
        co = math.cos(phi)
        s2 = s * s
        out = e_num * math.log(n + kp1 * s2) - e_den * math.log(nb + kp1 * s2)
        if sin_pow:
            out += sin_pow * math.log(s)
        if cos_pow:
            out += cos_pow * math.log(co)
        return out

    # scale by the larger endpoint behaviour of the smooth factor
    shift = max(e_num * math.log(n) - e_den * math.log(nb),
                e_num * math.log(n + kp1) - e_den * math.log(nb + kp1))

    def integrand(phi):
        return math.exp(log_integrand(phi) - shift)

    value, _ = adaptive_quad(integrand, 0.0, 0.5 * math.pi, spec or _QUAD)
    log_beta = math.lgamma(0.5 * q1) + math.lgamma(0.5) - math.lgamma(0.5 * q1 + 0.5)
    return math.log(2.0) + 0.5 * k0 * math.log(kp1) - log_beta + shift + math.log(value)


def bf_nested_linear_giron(c: NestedLinearComparison) -> float:
    """``B01`` (reduced over full) from the intrinsic-prior comparison."""
    return math.exp(-log_bf10_nested_linear_giron(c))


def bf_bic(rss0: float, rss1: float, n: int, q: int) -> float:
    """BIC approximation ``(rss0 / rss1)^(-n/2) n^(q/2)`` to ``B01``."""
    rss0 = check_positive("rss0", rss0)
    rss1 = check_positive("rss1", rss1)
    n = check_int("n", n)
    q = check_int("q", q)
    if rss0 < rss1:
        raise DomainError("rss0", f"null-model RSS {rss0} is below the alternative's {rss1}")
    return math.exp(-0.5 * n * math.log(rss0 / rss1) + 0.5 * q * math.log(n))
