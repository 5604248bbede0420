"""Student-t machinery against an independent quadrature oracle.

The oracle integrates the t density directly (scipy.integrate.quad over an
explicit pdf), sharing no code with the continued-fraction implementation
under test.  Reference constants below were frozen from scipy.stats.t.
"""
from __future__ import annotations

import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from plugwatt.tdist import (
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_ppf,
    student_t_two_tailed_p,
    t_critical_95,
)


def t_pdf(x: float, df: float) -> float:
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2))
    return c / math.sqrt(df * math.pi) * (1 + x * x / df) ** (-(df + 1) / 2)


def oracle_two_tailed(t: float, df: int) -> float:
    tail, _ = integrate.quad(t_pdf, abs(t), math.inf, args=(df,))
    return 2.0 * tail


@pytest.mark.parametrize("df", [1, 2, 3, 5, 8, 13, 30, 74, 86, 200])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.1, 2.26, 3.64, 6.0])
def test_two_tailed_p_matches_quadrature(t, df):
    assert student_t_two_tailed_p(t, df) == pytest.approx(
        oracle_two_tailed(t, df), abs=1e-10)


# Frozen from scipy.stats.t.sf / ppf (full double precision).
FROZEN_P = [
    (3.64, 86, 0.00046465754344048867),
    (1.62, 74, 0.10948637676154499),
    (2.26, 75, 0.02672412261597041),
    (2.30, 67, 0.024570143534543416),
    (2.00, 1, 0.29516723530086642),
    (0.50, 3, 0.65144796484815104),
]

FROZEN_CRIT = [
    (86, 1.9879342062390202),
    (74, 1.9925434951809322),
    (75, 1.9921021540022417),
    (67, 1.9960083540252962),
    (2, 4.3026527296961419),
    (11, 2.2009851600829489),
]


@pytest.mark.parametrize("t,df,expected", FROZEN_P)
def test_frozen_two_tailed_points(t, df, expected):
    # continued fraction terminates at 1e-10; hold it to that contract
    assert student_t_two_tailed_p(t, df) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("df,expected", FROZEN_CRIT)
def test_frozen_critical_values(df, expected):
    assert t_critical_95(df) == pytest.approx(expected, abs=1e-9)


def test_cdf_center_and_symmetry():
    assert student_t_cdf(0.0, 17) == pytest.approx(0.5, abs=1e-15)
    for t in (0.25, 1.0, 2.5, 7.0):
        assert student_t_cdf(-t, 9) == pytest.approx(
            1.0 - student_t_cdf(t, 9), abs=1e-13)
    assert student_t_cdf(60.0, 5) > 1 - 1e-7
    assert student_t_cdf(-60.0, 5) < 1e-7


def test_two_tailed_p_range_and_sign_invariance():
    for t in (0.1, 1.7, 4.2):
        p = student_t_two_tailed_p(t, 29)
        assert 0.0 < p < 1.0
        assert student_t_two_tailed_p(-t, 29) == pytest.approx(p, abs=1e-15)
    assert student_t_two_tailed_p(0.0, 29) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("df", [1, 4, 30, 120])
@pytest.mark.parametrize("q", [0.6, 0.9, 0.975, 0.999])
def test_ppf_inverts_cdf(df, q):
    x = student_t_ppf(q, df)
    assert student_t_cdf(x, df) == pytest.approx(q, abs=1e-9)


def test_incomplete_beta_endpoints_and_range():
    assert regularized_incomplete_beta(2.5, 0.5, 0.0) == 0.0
    assert regularized_incomplete_beta(2.5, 0.5, 1.0) == 1.0
    for x in (0.1, 0.37, 0.5, 0.93):
        v = regularized_incomplete_beta(3.0, 0.5, x)
        assert 0.0 <= v <= 1.0


def test_incomplete_beta_symmetry_identity():
    # I_x(a, b) + I_{1-x}(b, a) = 1
    for a, b, x in [(4.0, 0.5, 0.2), (43.0, 0.5, 0.85), (1.5, 2.5, 0.5)]:
        total = (regularized_incomplete_beta(a, b, x)
                 + regularized_incomplete_beta(b, a, 1.0 - x))
        assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(df=st.integers(min_value=1, max_value=150),
       t1=st.floats(min_value=-8, max_value=8),
       t2=st.floats(min_value=-8, max_value=8))
def test_cdf_monotone_in_t(df, t1, t2):
    lo, hi = sorted((t1, t2))
    assert student_t_cdf(lo, df) <= student_t_cdf(hi, df) + 1e-12


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        student_t_two_tailed_p(1.0, 0)
    with pytest.raises(ValueError):
        regularized_incomplete_beta(2.0, 0.5, 1.5)
    with pytest.raises(ValueError):
        student_t_ppf(0.0, 5)
