import math

import mpmath
import pytest
import scipy.special as sc
import scipy.stats as st
from hypothesis import given, settings
from hypothesis import strategies as hs

from arlb import ConvergenceError, DomainError
from arlb.specfun import (
    QuadratureSpec,
    adaptive_quad,
    chi2_logsf,
    chi2_quantile,
    chi2_quantile_log,
    chi2_sf,
    exp_integral_En,
    exp_integral_En_scaled,
    f_quantile,
    f_sf,
    log_gamma,
    normal_cdf,
    normal_isf_log,
    normal_logsf,
    normal_quantile,
    normal_sf,
    reg_beta_inc,
    reg_gamma_lower,
    reg_gamma_upper,
    t_quantile,
    t_sf,
)


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- gamma family -----------------------------------------------------------


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5 * math.log(math.pi)), (5.0, math.log(24.0))])
def test_log_gamma_identities(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("x", [0.5, 0.75, 3.3, 17.0, 1234.5, 1e6])
def test_log_gamma_against_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_reg_gamma_upper_examples():
    assert reg_gamma_upper(2.5, 0.0) == 1.0
    assert reg_gamma_upper(0.5, 1.920729) == pytest.approx(0.05, abs=1e-6)
    for x in (0.1, 1.0, 7.5, 40.0):
        assert reg_gamma_upper(1.0, x) == pytest.approx(math.exp(-x), rel=1e-13)


def test_reg_gamma_upper_quadrature_oracle():
    # P(chi2_1 > 3.8415) from the chi-square(1) density
    def dens(t):
        return math.exp(-0.5 * t - 0.5 * math.log(2.0 * math.pi * t))

    tail, _ = adaptive_quad(dens, 3.841458820694124, math.inf)
    assert reg_gamma_upper(0.5, 3.841458820694124 / 2.0) == pytest.approx(tail, rel=1e-9)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 10.0, 150.0])
@pytest.mark.parametrize("x", [1e-3, 0.5, 2.0, 9.0, 60.0, 300.0])
def test_reg_gamma_against_scipy(a, x):
    assert reg_gamma_upper(a, x) == pytest.approx(sc.gammaincc(a, x), rel=1e-11, abs=1e-300)
    assert reg_gamma_lower(a, x) == pytest.approx(sc.gammainc(a, x), rel=1e-11, abs=1e-300)


def test_reg_gamma_domain():
    with pytest.raises(DomainError):
        reg_gamma_upper(0.0, 1.0)
    with pytest.raises(DomainError):
        reg_gamma_upper(1.0, -1.0)


# -- chi-square ---------------------------------------------------------------


def test_chi2_examples():
    assert chi2_quantile(0.05, 1) == pytest.approx(3.841458820694124, rel=1e-12)
    assert chi2_sf(0.0, 3) == 1.0
    assert chi2_quantile(0.5, 2) == pytest.approx(math.log(4.0), rel=1e-13)


def test_chi2_quantile_bisection_oracle():
    for df in (1, 2, 3, 7):
        for a in (0.2, 0.01, 1e-6):
            root = bisect(lambda x: reg_gamma_upper(0.5 * df, 0.5 * x) - a, 0.0, 200.0)
            assert chi2_quantile(a, df) == pytest.approx(root, rel=1e-10)


@pytest.mark.parametrize("df", range(1, 11))
def test_chi2_round_trip_grid(df):
    for k in range(0, 9):
        for m in (1.0, 2.5, 5.0):
            a = m * 10.0 ** -(k + 1)
            if a > 0.5:
                continue
            assert abs(chi2_sf(chi2_quantile(a, df), df) - a) <= 1e-10
    assert abs(chi2_sf(chi2_quantile(0.5, df), df) - 0.5) <= 1e-10


@pytest.mark.parametrize("df", [1, 2, 5])
def test_chi2_quantile_log_deep_tail(df):
    for log_a in (-50.0, -700.0, -5000.0):
        x = chi2_quantile_log(log_a, df)
        assert chi2_logsf(x, df) == pytest.approx(log_a, rel=1e-11)


def test_chi2_against_mpmath_tail():
    x = chi2_quantile(1e-8, 4)
    exact = mpmath.gammainc(2, x / 2, mpmath.inf, regularized=True)
    assert chi2_sf(x, 4) == pytest.approx(float(exact), rel=1e-11)


@given(hs.floats(0.0, 200.0), hs.floats(0.0, 200.0), hs.integers(1, 30))
def test_chi2_sf_decreasing(x1, x2, df):
    lo, hi = min(x1, x2), max(x1, x2)
    assert chi2_sf(hi, df) <= chi2_sf(lo, df)
    assert 0.0 <= chi2_sf(hi, df) <= 1.0


# -- normal -------------------------------------------------------------------


def test_normal_examples():
    assert normal_cdf(0.0) == 0.5
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, rel=1e-13)
    root = bisect(lambda z: normal_cdf(z) - 0.975, 0.0, 5.0)
    assert normal_quantile(0.975) == pytest.approx(root, abs=1e-12)


@pytest.mark.parametrize("z", [-38.0, -8.0, -1.3, 0.0, 0.7, 5.0, 9.0])
def test_normal_cdf_against_scipy(z):
    assert normal_cdf(z) == pytest.approx(st.norm.cdf(z), rel=1e-13, abs=1e-300)
    assert normal_sf(z) == pytest.approx(st.norm.sf(z), rel=1e-13, abs=1e-300)
    assert abs(normal_cdf(-z) - (1.0 - normal_cdf(z))) <= 1e-15


@pytest.mark.parametrize("z", [1.0, 10.0, 30.0, 40.0, 100.0, 1000.0])
def test_normal_logsf_against_mpmath(z):
    exact = mpmath.log(mpmath.erfc(mpmath.mpf(z) / mpmath.sqrt(2)) / 2)
    assert normal_logsf(z) == pytest.approx(float(exact), rel=1e-12)


@given(hs.floats(1e-300, 1.0 - 1e-12, exclude_max=True))
def test_normal_quantile_round_trip(p):
    z = normal_quantile(p)
    if p < 0.5:
        assert normal_cdf(z) == pytest.approx(p, rel=1e-10)
    else:
        assert abs(normal_cdf(z) - p) <= 1e-10


def test_normal_isf_log_deep_tail():
    for log_p in (-1.0, -30.0, -800.0, -1e5):
        assert normal_logsf(normal_isf_log(log_p)) == pytest.approx(log_p, rel=1e-12)


def test_normal_quantile_domain():
    for p in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            normal_quantile(p)


# -- incomplete beta, t and F ---------------------------------------------------


def test_reg_beta_inc_examples():
    for a in (0.5, 2.0, 11.0):
        assert reg_beta_inc(0.5, a, a) == pytest.approx(0.5, abs=1e-14)
    assert reg_beta_inc(0.0, 2.0, 3.0) == 0.0

    def dens(x):
        return 12.0 * x * (1.0 - x) ** 2  # Beta(2, 3)

    val, _ = adaptive_quad(dens, 0.0, 0.3)
    assert reg_beta_inc(0.3, 2.0, 3.0) == pytest.approx(val, rel=1e-12)
    assert reg_beta_inc(0.3, 2.0, 3.0) == pytest.approx(0.3483, abs=5e-5)


@pytest.mark.parametrize("a, b", [(0.5, 0.5), (1.0, 9.0), (4.0, 2.0), (50.0, 80.0)])
@pytest.mark.parametrize("x", [0.01, 0.2, 0.5, 0.93])
def test_reg_beta_inc_against_scipy(a, b, x):
    assert reg_beta_inc(x, a, b) == pytest.approx(sc.betainc(a, b, x), rel=1e-11, abs=1e-300)


@given(hs.floats(0.0, 1.0), hs.floats(0.0, 1.0), hs.floats(0.1, 30.0), hs.floats(0.1, 30.0))
@settings(max_examples=200)
def test_reg_beta_inc_monotone(x1, x2, a, b):
    lo, hi = min(x1, x2), max(x1, x2)
    v_lo, v_hi = reg_beta_inc(lo, a, b), reg_beta_inc(hi, a, b)
    assert 0.0 <= v_lo <= v_hi + 1e-15 <= 1.0 + 1e-15


def test_f_and_t_examples():
    assert f_sf(0.0, 2.0, 5.0) == 1.0
    assert t_sf(0.0, 7.0) == 0.5
    # Hald 234c against the full model: F = 4.3375 on (1, 8) degrees of freedom
    assert f_sf(4.33747399565637, 1, 8) == pytest.approx(0.07082, abs=5e-6)


def test_f_sf_quadrature_oracle():
    d1, d2 = 1.0, 8.0
    log_c = math.lgamma(0.5 * (d1 + d2)) - math.lgamma(0.5 * d1) - math.lgamma(0.5 * d2) \
        + 0.5 * d1 * math.log(d1 / d2)

    def dens(x):
        return math.exp(log_c + (0.5 * d1 - 1) * math.log(x) - 0.5 * (d1 + d2) * math.log1p(d1 * x / d2))

    tail, _ = adaptive_quad(dens, 4.337, math.inf)
    assert f_sf(4.337, d1, d2) == pytest.approx(tail, rel=1e-9)


@pytest.mark.parametrize("d1, d2", [(1, 8), (2, 8), (3, 40)])
def test_f_quantile_against_mpmath(d1, d2):
    x = f_quantile(0.01, d1, d2)
    # I_{d2/(d2+d1 x)}(d2/2, d1/2) = upper tail
    exact = mpmath.betainc(d2 / 2, d1 / 2, 0, d2 / (d2 + d1 * mpmath.mpf(x)), regularized=True)
    assert float(exact) == pytest.approx(0.01, rel=1e-10)


@pytest.mark.parametrize("df", [2, 5, 49, 499])
def test_t_quantile_round_trip(df):
    for a in (0.25, 0.025, 1e-5):
        assert t_sf(t_quantile(a, df), df) == pytest.approx(a, rel=1e-10)
        assert t_quantile(a, df) == pytest.approx(st.t.isf(a, df), rel=1e-8)


# -- exponential integral -----------------------------------------------------------


def test_en_examples():
    for n in (2, 3, 10):
        assert exp_integral_En(n, 1e-12) == pytest.approx(1.0 / (n - 1), rel=1e-9)
    val, _ = adaptive_quad(lambda t: math.exp(-t) / t, 1.0, math.inf)
    assert exp_integral_En(1, 1.0) == pytest.approx(val, rel=1e-10)
    assert exp_integral_En(1, 1.0) == pytest.approx(0.2193839343955203, rel=1e-13)
    assert exp_integral_En(2, 1.0) == pytest.approx(math.exp(-1.0) - exp_integral_En(1, 1.0), rel=1e-12)
    assert exp_integral_En(2, 1.0) == pytest.approx(0.1484955067759964, rel=1e-12)


def test_en_domain():
    with pytest.raises(DomainError):
        exp_integral_En(1, 0.0)
    with pytest.raises(DomainError):
        exp_integral_En(2, -1.0)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 30, 60])
@pytest.mark.parametrize("x", [0.1, 0.9, 1.0, 3.0, 12.0, 50.0, 400.0])
def test_en_against_scipy(n, x):
    assert exp_integral_En(n, x) == pytest.approx(sc.expn(n, x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.9995, 25.5, 100.25])
@pytest.mark.parametrize("x", [0.05, 1.0, 5.0, 250.0])
def test_en_real_order_against_mpmath(nu, x):
    exact = float(mpmath.expint(nu, x) * mpmath.exp(x))
    assert exp_integral_En_scaled(nu, x) == pytest.approx(exact, rel=1e-10)


def test_en_recurrence_grid():
    worst = 0.0
    for n in range(1, 31):
        for x in (0.1, 0.3, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0):
            lhs = exp_integral_En(n + 1, x)
            rhs = (math.exp(-x) - x * exp_integral_En(n, x)) / n
            worst = max(worst, abs(lhs - rhs) / lhs)
    assert worst <= 1e-9


@given(hs.integers(1, 40), hs.floats(0.01, 100.0))
def test_en_decreasing(n, x):
    assert exp_integral_En(n + 1, x) < exp_integral_En(n, x)
    assert exp_integral_En(n, x * 1.01) < exp_integral_En(n, x)


# -- quadrature -----------------------------------------------------------------


def test_quad_examples():
    val, err = adaptive_quad(lambda x: x, 0.0, 1.0)
    assert val == pytest.approx(0.5, abs=1e-15)
    val, err = adaptive_quad(lambda x: math.exp(-x), 0.0, math.inf)
    assert val == pytest.approx(1.0, rel=1e-12)
    assert err <= 1e-10


def test_quad_endpoint_singularity():
    val, _ = adaptive_quad(lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0, 0.0, 1.0)
    assert val == pytest.approx(2.0, rel=1e-9)


def test_quad_reports_non_convergence():
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=3)
    with pytest.raises(ConvergenceError):
        adaptive_quad(lambda x: math.sin(1.0 / x) if x > 0 else 0.0, 0.0, 1.0, spec)


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)
