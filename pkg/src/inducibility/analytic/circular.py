"""Induced 4-point densities in the circular graph S^1(alpha).

x -> y iff (y - x) mod 1 lies in (0, alpha).

Two routes:

* ``circular_distribution`` is exact for rational alpha = p/q.  Scaling by q,
  each point splits into an integer cell and a fractional part; the graph is
  fixed by the cell differences and the order of the fractional parts, and all
  q^(k-1) * k! such configurations are equally likely.
* ``circular_profile`` / ``circular_density`` work for any real alpha.  One
  point is pinned at 0 and the other three are sorted, 0 < t1 < t2 < t3 < 1.
  For fixed t1 the (t2, t3) area of every pattern is computed in closed form;
  the outer integral uses two-point Gauss-Legendre panels whose boundaries
  include every value of t1 where the inner geometry changes, so each panel
  integrates a polynomial.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from ..catalog import catalog4

MAX_EXACT_DENOMINATOR = 64


def _pair_weights(k: int) -> dict:
    m = k * (k - 1) // 2
    return {pr: 3 ** (m - 1 - i) for i, pr in enumerate(itertools.combinations(range(k), 2))}


@lru_cache(maxsize=None)
def circular_distribution(alpha: Fraction, k: int) -> dict[int, Fraction]:
    """Exact law of the labelled pair-state code of k i.i.d. points, rational alpha."""
    alpha = Fraction(alpha)
    if not 0 <= alpha <= Fraction(1, 2):
        raise ValueError("alpha must lie in [0, 1/2]")
    if k == 1 or alpha == 0:
        return {0: Fraction(1)}
    p, q = alpha.numerator, alpha.denominator
    if q > MAX_EXACT_DENOMINATOR:
        raise ValueError(f"exact circular distribution needs denominator <= {MAX_EXACT_DENOMINATOR}")
    K = np.array(list(itertools.product(range(q), repeat=k - 1)), dtype=np.int64).reshape(-1, k - 1)
    K = np.hstack([np.zeros((K.shape[0], 1), np.int64), K])
    R = np.array(list(itertools.permutations(range(k))), dtype=np.int64)
    # all (cell vector, fractional rank order) combinations
    Kc = np.repeat(K, len(R), axis=0)
    Rc = np.tile(R, (len(K), 1))
    code = np.zeros(len(Kc), dtype=np.int64)
    for (a, b), w in _pair_weights(k).items():
        D = (Kc[:, b] - Kc[:, a]) % q
        up = Rc[:, b] > Rc[:, a]  # fractional part of b larger
        fwd = np.where(up, D <= p - 1, (D >= 1) & (D <= p))
        Dr = (Kc[:, a] - Kc[:, b]) % q
        bwd = np.where(~up, Dr <= p - 1, (Dr >= 1) & (Dr <= p))
        code += w * np.where(fwd, 1, np.where(bwd, 2, 0))
    vals, counts = np.unique(code, return_counts=True)
    total = len(code)
    return {int(v): Fraction(int(c), total) for v, c in zip(vals, counts)}


def circular_profile_exact(alpha: Fraction) -> list[Fraction]:
    cat = catalog4()
    out = [Fraction(0)] * len(cat)
    for code, pr in circular_distribution(Fraction(alpha), 4).items():
        out[cat.pattern_lut[code]] += pr
    return out


# --- numeric route --------------------------------------------------------------


def _state(d, alpha):
    """Pair state for two points at circle distance d (earlier -> later)."""
    if d < alpha:
        return 1
    if d > 1 - alpha:
        return 2
    return 0


def _F(u, L):
    if u <= 0:
        return 0.0
    if u <= L:
        return 0.5 * u * u
    return 0.5 * L * L + L * (u - L)


def _band_area(I, J, lo, hi):
    """Area of {x in I, y in J, lo < y - x < hi}."""
    x0, x1 = I
    j0, j1 = J
    L = j1 - j0
    if x1 <= x0 or L <= 0 or hi <= lo:
        return 0.0
    # measure of J below x + c, integrated over x
    def G(c):
        return _F(x1 + c - j0, L) - _F(x0 + c - j0, L)
    return G(hi) - G(lo)


def _cells(t1, alpha):
    """Intervals of (t1, 1) with constant states to vertex 0 and to t1."""
    pts = {t1, 1.0}
    for b in (alpha, 1 - alpha, t1 + alpha, t1 + 1 - alpha):
        if t1 < b < 1:
            pts.add(b)
    pts = sorted(pts)
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        out.append(((a, b), _state(mid, alpha), _state(mid - t1, alpha)))
    return out


def _inner(t1, alpha, lut):
    """Per-class area of {t1 < t2 < t3 < 1} for fixed t1 (length-42 vector)."""
    res = np.zeros(42)
    s01 = _state(t1, alpha)
    cells = _cells(t1, alpha)
    bands = [((0.0, alpha), 1), ((alpha, 1 - alpha), 0), ((1 - alpha, 1.0), 2)]
    for I, s02, s12 in cells:
        for J, s03, s13 in cells:
            if J[1] <= I[0]:
                continue
            for (lo, hi), s23 in bands:
                area = _band_area(I, J, lo, hi)
                if area > 0:
                    code = s01 * 243 + s02 * 81 + s03 * 27 + s12 * 9 + s13 * 3 + s23
                    res[lut[code]] += area
    return res


def _breakpoints(alpha):
    pts = {0.0, 1.0}
    for a in (1, 2):
        for k in range(-4, 5):
            for j in range(-3, 4):
                t = (k * alpha + j) / a
                if 0 < t < 1:
                    pts.add(t)
    return pts


def circular_profile(alpha, resolution: int = 480) -> np.ndarray:
    """Densities of all 42 classes in S^1(alpha), any real alpha in [0, 1/2]."""
    alpha = float(alpha)
    if not 0 <= alpha <= 0.5:
        raise ValueError("alpha must lie in [0, 1/2]")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    lut = np.asarray(catalog4().pattern_lut)
    grid = set(np.linspace(0, 1, resolution + 1).tolist()) | _breakpoints(alpha)
    grid = np.array(sorted(grid))
    grid = grid[np.concatenate([[True], np.diff(grid) > 1e-15])]
    g = 1 / np.sqrt(3)
    total = np.zeros(42)
    for a, b in zip(grid[:-1], grid[1:]):
        h = 0.5 * (b - a)
        c = 0.5 * (a + b)
        total += h * (_inner(c - h * g, alpha, lut) + _inner(c + h * g, alpha, lut))
    return factorial(3) * total


def circular_density(class_id: int, alpha, resolution: int = 480) -> float:
    return float(circular_profile(alpha, resolution)[class_id])
