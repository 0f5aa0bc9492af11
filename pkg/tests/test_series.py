import math
from fractions import Fraction

import pytest

from cslbounds import series
from cslbounds.series import PowerSeries


def test_exp_series_squares_exactly():
    e2 = series.exp_neg() * series.exp_neg()
    assert e2.coeffs[3] == Fraction(-4, 3)


def test_erf_series_leading_coefficients():
    s = series.sqrt_pi_a_erf()
    assert s.coeffs[:4] == (Fraction(0), Fraction(2), Fraction(-2, 3), Fraction(1, 5))


def test_scaled_bessel_series():
    i1 = series.scaled_bessel_i(1)
    assert i1.coeffs[:4] == (Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(5, 16))
    assert series.scaled_bessel_i(0).coeffs[0] == 1


def test_evaluation_matches_math():
    assert series.evaluate(series.exp_neg().floats(), 0.3) == pytest.approx(math.exp(-0.3), rel=1e-14)
    a = 0.7
    expected = math.sqrt(math.pi) * a * math.erf(a)
    assert series.evaluate(series.sqrt_pi_a_erf().floats(), a * a) == pytest.approx(expected, rel=1e-14)


def test_divide_by_power():
    q = series.one_minus_exp_neg()
    assert q.order() == 1
    assert q.divide_by_power(1).coeffs[0] == 1
    with pytest.raises(ArithmeticError):
        q.divide_by_power(2)


def test_mixed_arithmetic_with_scalars():
    t = PowerSeries.variable()
    p = 1 - 2 * t + Fraction(1, 2) * t * t
    assert p.coeffs[:3] == (Fraction(1), Fraction(-2), Fraction(1, 2))
    assert (p - 1).order() == 1


def test_bivariate_table():
    x = PowerSeries.variable()
    table = series.bivariate([(x, 1 + x), (series.exp_neg(), x)])
    floats = [[float(c) for c in row] for row in table]
    assert series.evaluate_bivariate(floats, 0.2, 0.5) == pytest.approx(0.2 * 1.5 + math.exp(-0.2) * 0.5, rel=1e-14)
