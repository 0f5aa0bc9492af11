"""
series.py
Truncated power series with exact rational coefficients.

The CSL closed forms are differences of O(1) terms whose true value can be
many orders of magnitude smaller. Expanding every ingredient with Fraction
coefficients lets the cancellation happen exactly, before any rounding.
"""

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, List, Sequence, Tuple

TERMS = 40


class PowerSeries:
    """Series sum_k c_k t^k truncated after TERMS coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [Fraction(v) for v in coeffs][:TERMS]
        c.extend([Fraction(0)] * (TERMS - len(c)))
        self.coeffs: Tuple[Fraction, ...] = tuple(c)

    @classmethod
    def constant(cls, value) -> "PowerSeries":
        return cls([value])

    @classmethod
    def variable(cls) -> "PowerSeries":
        return cls([0, 1])

    def _coerce(self, other) -> "PowerSeries":
        return other if isinstance(other, PowerSeries) else PowerSeries.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        return PowerSeries(a + b for a, b in zip(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-a for a in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out = [Fraction(0)] * TERMS
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(TERMS - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return PowerSeries(out)

    __rmul__ = __mul__

    def order(self) -> int:
        """Index of the first non-zero coefficient (TERMS if identically zero)."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return TERMS

    def divide_by_power(self, k: int) -> "PowerSeries":
        """Exact division by t^k; the k lowest coefficients must vanish."""
        if any(c != 0 for c in self.coeffs[:k]):
            raise ArithmeticError(f"series is not divisible by t^{k}")
        return PowerSeries(self.coeffs[k:])

    def floats(self) -> List[float]:
        return [float(c) for c in self.coeffs]


def evaluate(coeffs: Sequence[float], t: float) -> float:
    """Horner evaluation of plain float coefficients."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


# Building blocks in x = a^2, where a = L / 2 r_C.

@lru_cache(maxsize=None)
def exp_neg() -> PowerSeries:
    """e^(-x)."""
    return PowerSeries(Fraction((-1) ** n, factorial(n)) for n in range(TERMS))


@lru_cache(maxsize=None)
def one_minus_exp_neg() -> PowerSeries:
    """1 - e^(-x)."""
    return 1 - exp_neg()


@lru_cache(maxsize=None)
def sqrt_pi_a_erf() -> PowerSeries:
    """sqrt(pi) a erf(a) as a series in x = a^2."""
    coeffs = [Fraction(0)]
    for n in range(TERMS - 1):
        coeffs.append(Fraction(2 * (-1) ** n, factorial(n) * (2 * n + 1)))
    return PowerSeries(coeffs)


# Building blocks in b = R^2 / 2 r_C^2.

@lru_cache(maxsize=None)
def _bessel_i(n: int) -> PowerSeries:
    coeffs = [Fraction(0)] * TERMS
    k = 0
    while 2 * k + n < TERMS:
        coeffs[2 * k + n] = Fraction(1, 2 ** (2 * k + n) * factorial(k) * factorial(k + n))
        k += 1
    return PowerSeries(coeffs)


@lru_cache(maxsize=None)
def scaled_bessel_i(n: int) -> PowerSeries:
    """e^(-b) I_n(b) for n in {0, 1}."""
    return exp_neg() * _bessel_i(n)


def bivariate(pairs: Sequence[Tuple[PowerSeries, PowerSeries]]) -> List[List[Fraction]]:
    """Coefficients c_ij of sum_k F_k(x) G_k(b), exact, total degree < TERMS."""
    table = [[Fraction(0)] * (TERMS - i) for i in range(TERMS)]
    for f, g in pairs:
        for i, fi in enumerate(f.coeffs):
            if fi == 0:
                continue
            row = table[i]
            for j in range(TERMS - i):
                gj = g.coeffs[j]
                if gj:
                    row[j] += fi * gj
    return table


def evaluate_bivariate(table: Sequence[Sequence[float]], x: float, b: float) -> float:
    acc = 0.0
    for row in reversed(table):
        acc = acc * x + evaluate(row, b)
    return acc
