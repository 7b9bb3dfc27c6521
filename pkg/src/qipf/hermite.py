"""Physicist's Hermite polynomials, derivatives, and weighted-L2 norms.

Evaluation uses the upward recurrence H_{n+1} = 2x H_n - 2n H_{n-1}, which
is stable and O(k); the explicit factorial sum is kept out of the library
and lives in the test suite as an oracle.  Norms are computed in log space
so orders up to MAX_ORDER stay finite.
"""

import math

import numpy as np

# Bounds factorial growth in the norm and keeps recurrence values in range.
MAX_ORDER = 64


def _check_order(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise ValueError("order must be an integer")
    k = int(k)
    if k < 0:
        raise ValueError("order must be non-negative")
    if k > MAX_ORDER:
        raise ValueError(f"order {k} exceeds the maximum {MAX_ORDER}")
    return k


def _last_three(k, x):
    """(H_{k-2}, H_{k-1}, H_k) by upward recurrence; entries below order
    zero are returned as zeros."""
    zeros = np.zeros_like(x)
    ones = np.ones_like(x)
    if k == 0:
        return zeros, zeros, ones
    h_prev, h = ones, 2.0 * x
    if k == 1:
        return zeros, h_prev, h
    h_pprev = zeros
    for n in range(1, k):
        h_pprev, h_prev, h = h_prev, h, 2.0 * x * h - 2.0 * n * h_prev
    return h_pprev, h_prev, h


def _match_input(value, x):
    return float(value) if np.ndim(x) == 0 else value


def hermite_eval(k, x):
    """H_k(x); scalar in, scalar out, arrays pass through elementwise."""
    k = _check_order(k)
    ax = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(ax)):
        raise ValueError("non-finite evaluation point")
    _, _, h = _last_three(k, ax)
    return _match_input(h, x)


def hermite_derivs(k, x):
    """(H_k, H_k', H_k'') using H_k' = 2k H_{k-1} and H_k'' = 4k(k-1) H_{k-2}."""
    k = _check_order(k)
    ax = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(ax)):
        raise ValueError("non-finite evaluation point")
    h_pprev, h_prev, h = _last_three(k, ax)
    h1 = 2.0 * k * h_prev
    h2 = 4.0 * k * (k - 1) * h_pprev
    return _match_input(h, x), _match_input(h1, x), _match_input(h2, x)


def hermite_norm(k) -> float:
    """sqrt(sqrt(pi) * 2^k * k!), the weighted L2 norm of H_k.

    H_k / hermite_norm(k) has unit norm under the weight exp(-x^2).
    """
    k = _check_order(k)
    log_sq = 0.5 * math.log(math.pi) + k * math.log(2.0) + math.lgamma(k + 1.0)
    norm = math.exp(0.5 * log_sq)
    if not math.isfinite(norm):
        raise ValueError(f"norm overflow at order {k}")
    return norm


def normalized_hermite_derivs(k, x):
    """hermite_derivs scaled by 1/hermite_norm(k)."""
    h, h1, h2 = hermite_derivs(k, x)
    norm = hermite_norm(k)
    return h / norm, h1 / norm, h2 / norm
