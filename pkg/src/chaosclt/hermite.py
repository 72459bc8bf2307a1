"""Probabilists' Hermite polynomials and monomial expansion coefficients.

Convention: leading coefficient 1, orthogonal under the standard normal
weight with E[H_p(Z) H_q(Z)] = delta_pq * p!.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError

# Factorial-bearing coefficient formulas are evaluated in float64; beyond
# this order the intermediate factorials lose integer exactness.
MAX_MONOMIAL_ORDER = 32


def hermite(q: int, x):
    """H_q(x) via the recurrence H_{q+1}(x) = x H_q(x) - q H_{q-1}(x).

    Accepts scalars or arrays; returns the same shape.
    """
    if q < 0:
        raise ValidationError(f"Hermite order must be nonnegative, got {q}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if q == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, q):
        h_prev, h = h, x * h - k * h_prev
    return h if h.ndim else float(h)


def hermite_monomial_coeffs(q: int) -> np.ndarray:
    """Coefficients c[k], k = 0..q/2, of x**q = sum_k c[k] H_{2k}(x).

    c[k] = q! / (2**(q/2 - k) * (q/2 - k)! * (2k)!), so c[q/2] = 1.
    Only even q are expandable in even-order polynomials alone.
    """
    if q % 2 != 0 or q < 2:
        raise ValidationError(f"monomial order must be even and >= 2, got {q}")
    if q > MAX_MONOMIAL_ORDER:
        raise ValidationError(
            f"monomial order capped at {MAX_MONOMIAL_ORDER}, got {q}")
    half = q // 2
    qfact = math.factorial(q)
    return np.array([
        qfact / (2.0 ** (half - k) * math.factorial(half - k)
                 * math.factorial(2 * k))
        for k in range(half + 1)
    ])
