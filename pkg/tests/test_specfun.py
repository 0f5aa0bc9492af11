import math

import numpy as np
import pytest

from cslbounds.exceptions import DomainError, UnsupportedOrderError
from cslbounds.specfun import bessel_i_scaled, bessel_i_scaled_result, erf


def test_scaled_bessel_at_zero():
    assert bessel_i_scaled(0, 0.0) == 1.0
    assert bessel_i_scaled(1, 0.0) == 0.0


def test_scaled_bessel_known_values():
    assert bessel_i_scaled(0, 1.0) == pytest.approx(1.2660658777520082 * math.exp(-1), rel=1e-14)
    assert bessel_i_scaled(1, 1.0) == pytest.approx(0.5651591039924851 * math.exp(-1), rel=1e-14)


def test_scaled_bessel_large_argument_does_not_overflow():
    x = 1e6
    assert bessel_i_scaled(0, x) == pytest.approx(1 / math.sqrt(2 * math.pi * x), rel=1e-6)
    assert bessel_i_scaled(1, 1e300) > 0


def test_scaled_bessel_arrays():
    values = bessel_i_scaled(1, np.array([0.0, 1.0, 10.0]))
    assert isinstance(values, np.ndarray)
    assert np.all((values >= 0) & (values <= 1))


def test_scaled_bessel_errors():
    with pytest.raises(UnsupportedOrderError):
        bessel_i_scaled(2, 1.0)
    with pytest.raises(DomainError):
        bessel_i_scaled(0, -1.0)
    with pytest.raises(DomainError):
        bessel_i_scaled(0, math.nan)


def test_scaled_bessel_result_records_provenance():
    result = bessel_i_scaled_result(1, 2.0)
    assert result.order == 1
    assert result.argument == 2.0
    assert result.value == bessel_i_scaled(1, 2.0)


def test_erf_values_and_symmetry():
    assert erf(0.0) == 0.0
    assert erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-14)
    for x in (1e-3, 0.5, 2.0, 7.0):
        assert erf(-x) == -erf(x)


def test_erf_saturates():
    assert erf(40.0) == 1.0
    assert erf(1e10) == 1.0
    assert erf(-50.0) == -1.0


def test_erf_rejects_nan():
    with pytest.raises(DomainError):
        erf(math.nan)


def test_scaled_bessel_zero_is_decreasing():
    grid = np.concatenate(([0.0], np.geomspace(1e-3, 1e8, 400)))
    assert np.all(np.diff(bessel_i_scaled(0, grid)) < 0)


def test_erf_is_nondecreasing():
    values = erf(np.linspace(-10.0, 10.0, 2001))
    assert np.all(np.diff(values) >= 0)
    assert np.all(np.diff(erf(np.linspace(-3.0, 3.0, 601))) > 0)


@pytest.mark.parametrize("x", np.linspace(1.0, 50.0, 50))
def test_first_order_is_derivative_of_zeroth(x):
    # I1 = I0', i.e. e^-x I1 = e^-x I0 + d/dx (e^-x I0)
    h = 1e-3
    f = lambda t: bessel_i_scaled(0, t)  # noqa: E731
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    derivative = (4 * d2 - d1) / 3
    assert f(x) + derivative == pytest.approx(bessel_i_scaled(1, x), rel=1e-8)
