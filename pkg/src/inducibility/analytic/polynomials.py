"""Dense univariate polynomials with Fraction coefficients (lowest degree first)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

Poly = tuple  # tuple[Fraction, ...]

ONE: Poly = (Fraction(1),)


def poly(coeffs: Sequence) -> Poly:
    out = [Fraction(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out) if out else (Fraction(0),)


def degree(p: Poly) -> int:
    return len(p) - 1


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, scale(q, -1))


def scale(p: Poly, c) -> Poly:
    return poly([c * a for a in p])


def mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly(out)


def one_minus(p: Poly) -> Poly:
    return sub(ONE, p)


def antiderivative(p: Poly) -> Poly:
    """Primitive vanishing at 0."""
    return poly([Fraction(0)] + [a / (i + 1) for i, a in enumerate(p)])


def evaluate(p: Poly, x):
    acc = 0 * x
    for a in reversed(p):
        acc = acc * x + a
    return acc


def evaluate_float(p: Poly, x):
    return np.polynomial.polynomial.polyval(x, [float(a) for a in p])


def ordered_integral(factors: Sequence[Poly]) -> Fraction:
    """Integral of prod_i g_i(x_i) over 0 < x_1 < ... < x_j < 1.

    Nested: h_1(y) = int_0^y g_1, h_i(y) = int_0^y g_i h_{i-1}, result h_j(1).
    """
    h = ONE
    for g in factors:
        h = antiderivative(mul(g, h))
    return evaluate(h, Fraction(1))


def to_strings(p: Poly) -> list[str]:
    return [str(a) for a in p]
