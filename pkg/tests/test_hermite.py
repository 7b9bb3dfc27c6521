"""Hermite recurrence against the explicit factorial sum and quadrature."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qipf.hermite import (MAX_ORDER, hermite_derivs, hermite_eval,
                          hermite_norm, normalized_hermite_derivs)


def explicit_hermite(k, x):
    """H_k via the factorial sum, in exact rational arithmetic.

    H_k(x) = k! * sum_m (-1)^m / (m! (k-2m)!) * (2x)^(k-2m)
    """
    x = Fraction(x)
    total = Fraction(0)
    for m in range(k // 2 + 1):
        term = Fraction((-1) ** m, math.factorial(m) * math.factorial(k - 2 * m))
        total += term * (2 * x) ** (k - 2 * m)
    return math.factorial(k) * total


def test_low_order_closed_forms():
    for x in (-1.5, 0.0, 0.25, 2.0):
        assert hermite_eval(0, x) == 1.0
        assert hermite_eval(1, x) == pytest.approx(2.0 * x, abs=1e-15)
        assert hermite_eval(2, x) == pytest.approx(4.0 * x * x - 2.0, rel=1e-14,
                                                   abs=1e-13)
        assert hermite_eval(3, x) == pytest.approx(8.0 * x ** 3 - 12.0 * x,
                                                   rel=1e-14, abs=1e-13)


def test_recurrence_matches_explicit_sum():
    points = [Fraction(-9, 4), Fraction(-1, 2), Fraction(0), Fraction(3, 8),
              Fraction(1), Fraction(7, 3)]
    for k in range(13):
        for x in points:
            want = float(explicit_hermite(k, x))
            got = hermite_eval(k, float(x))
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want)), (k, x)


def test_derivatives_match_rational_oracle():
    # H_k' and H_k'' from term-by-term differentiation of the explicit sum
    def explicit_poly(k):
        coeffs = {}
        for m in range(k // 2 + 1):
            p = k - 2 * m
            c = Fraction(math.factorial(k) * (-1) ** m * 2 ** p,
                         math.factorial(m) * math.factorial(p))
            coeffs[p] = c
        return coeffs

    def eval_poly(coeffs, x):
        return float(sum(c * Fraction(x) ** p for p, c in coeffs.items()))

    def diff_poly(coeffs):
        return {p - 1: c * p for p, c in coeffs.items() if p > 0}

    for k in (0, 1, 2, 5, 9, 12):
        poly = explicit_poly(k)
        d1 = diff_poly(poly)
        d2 = diff_poly(d1)
        for x in (-1.75, -0.2, 0.0, 0.6, 1.9):
            h, h1, h2 = hermite_derivs(k, x)
            for got, coeffs in ((h, poly), (h1, d1), (h2, d2)):
                want = eval_poly(coeffs, x)
                assert abs(got - want) <= 1e-10 * max(1.0, abs(want)), (k, x)


def test_array_evaluation_matches_scalar():
    xs = np.linspace(-2.0, 2.0, 9)
    for k in (0, 1, 4, 7):
        arr = hermite_eval(k, xs)
        assert isinstance(arr, np.ndarray)
        for i, x in enumerate(xs):
            scalar = hermite_eval(k, float(x))
            assert isinstance(scalar, float)
            assert arr[i] == scalar
    h, h1, h2 = hermite_derivs(3, xs)
    assert h.shape == h1.shape == h2.shape == xs.shape


def test_norm_closed_form():
    assert hermite_norm(0) == pytest.approx(math.pi ** 0.25, rel=1e-15)
    for k in (1, 2, 5, 10, 20):
        want = math.sqrt(math.sqrt(math.pi) * 2.0 ** k * math.factorial(k))
        assert hermite_norm(k) == pytest.approx(want, rel=1e-13)


def test_normalized_unit_norm_under_weight():
    # 64-node Gauss-Hermite quadrature integrates H_k^2 exp(-x^2) exactly
    nodes, weights = np.polynomial.hermite.hermgauss(64)
    for k in (0, 1, 3, 8):
        hk, _, _ = normalized_hermite_derivs(k, nodes)
        assert float(np.sum(weights * hk * hk)) == pytest.approx(1.0,
                                                                 abs=1e-10)


def test_normalized_derivs_are_scaled_derivs():
    x = 0.73
    h, h1, h2 = hermite_derivs(6, x)
    n = hermite_norm(6)
    got = normalized_hermite_derivs(6, x)
    assert got == (h / n, h1 / n, h2 / n)


def test_order_validation():
    for bad in (-1, 2.5, True, MAX_ORDER + 1):
        with pytest.raises(ValueError):
            hermite_eval(bad, 0.0)
    with pytest.raises(ValueError):
        hermite_derivs(-3, 0.0)
    with pytest.raises(ValueError):
        hermite_norm(MAX_ORDER + 5)
    # the bound itself is usable
    assert math.isfinite(hermite_norm(MAX_ORDER))


def test_rejects_non_finite_points():
    with pytest.raises(ValueError):
        hermite_eval(2, np.nan)
    with pytest.raises(ValueError):
        hermite_derivs(2, np.array([0.0, np.inf]))
