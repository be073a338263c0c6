"""Exact Bernoulli numbers and Faulhaber power-sum polynomials."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import List, Tuple

MAX_FAULHABER_DEGREE = 16
VALIDATION_RANGE = 100


def bernoulli_numbers(n: int) -> List[Fraction]:
    """
    Bernoulli numbers B_0..B_n as exact Fractions via Akiyama–Tanigawa.
    Convention: "second" Bernoulli numbers (B1 = +1/2).
    """
    if n < 0:
        raise ValueError("n must be >= 0")

    table = [Fraction(0)] * (n + 1)
    out: List[Fraction] = []
    for m in range(n + 1):
        table[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            table[j - 1] = j * (table[j - 1] - table[j])
        out.append(table[0])
    return out


@lru_cache(maxsize=None)
def faulhaber_coefficients(d: int) -> Tuple[Fraction, ...]:
    """Coefficients c_0..c_{d+1} of S_d(n) = sum_{l=1}^n l^d, lowest degree first.

    With B1 = +1/2 the power-sum formula needs no sign flip on the B1 term:
    S_d(n) = 1/(d+1) * sum_{l=1}^{d+1} C(d+1, l) B_{d+1-l} n^l.
    The polynomial is checked exactly against direct summation for n <= 100.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if d > MAX_FAULHABER_DEGREE:
        raise OverflowError(
            f"Faulhaber degree {d} exceeds supported coefficient precision (max {MAX_FAULHABER_DEGREE})"
        )

    bernoulli = bernoulli_numbers(d)
    coeffs = [Fraction(0)] * (d + 2)
    for power in range(1, d + 2):
        coeffs[power] = Fraction(comb(d + 1, power)) * bernoulli[d + 1 - power] / (d + 1)

    running = 0
    for n in range(VALIDATION_RANGE + 1):
        running += n**d if n > 0 else 0
        value = sum(c * n**power for power, c in enumerate(coeffs))
        if value != running:
            raise ArithmeticError(f"Faulhaber polynomial of degree {d} disagrees with direct sum at n={n}")
    return tuple(coeffs)
