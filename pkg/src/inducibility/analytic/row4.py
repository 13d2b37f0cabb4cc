"""The two-chain construction for the out-star-plus-isolated-vertex row.

Parts X_i, Y_i (i >= 1) and sub-blobs X'_m, Y'_m of X_0, Y_0, all
anticliques.  X_j -> X_i for 1 <= i < j and X_j -> X_0 for j >= 1 (same for
Y); X_i -> Y'_m and Y_i -> X'_m for 1 <= m <= i.  Blob sizes are mirrored
between the two chains, X'_1 = 0 and X'_m = 0 for m >= 6, and x_i (i >= 5)
decays geometrically.  The family is truncated at depth ``depth`` and
renormalized.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from ..constructions import ArcRule, ConstructionSpec, Part
from .limits import weight_polynomial

TARGET = "4:1213"  # out-star on two leaves plus an isolated vertex
PRIME = (0, 2, 3, 4, 5)
DEPTH = 12
PARAM_NAMES = ("xp0", "xp2", "xp3", "xp4", "xp5", "x1", "x2", "x3", "x4", "x5", "r")


def _names(depth):
    names = []
    for side in "XY":
        names += [f"{side}'{m}" for m in PRIME]
        names += [f"{side}{i}" for i in range(1, depth + 1)]
    return names


def raw_sizes(params, depth: int = DEPTH) -> list:
    """One chain's sizes (primes then X_1..X_depth), before normalization."""
    xp = list(params[:5])
    xs = list(params[5:10])
    r = params[10]
    xs += [xs[4] * r ** (i - 5) for i in range(6, depth + 1)]
    return xp + xs


def row4_weights(params, depth: int = DEPTH, exact: bool = False):
    half = raw_sizes(params, depth)
    both = half + half
    total = sum(both)
    return [w / total for w in both] if exact else np.asarray(both, dtype=float) / float(total)


@lru_cache(maxsize=None)
def row4_skeleton(depth: int = DEPTH) -> ConstructionSpec:
    """The spec with uniform placeholder weights; only the arcs matter."""
    names = _names(depth)
    w = Fraction(1, len(names))
    parts = [Part(n, w) for n in names]
    arcs = []
    for s, o in (("X", "Y"), ("Y", "X")):
        for j in range(1, depth + 1):
            for i in range(1, j):
                arcs.append(ArcRule(f"{s}{j}", f"{s}{i}"))
            for m in PRIME:
                arcs.append(ArcRule(f"{s}{j}", f"{s}'{m}"))
            for m in PRIME:
                if 1 <= m <= j:
                    arcs.append(ArcRule(f"{s}{j}", f"{o}'{m}"))
    return ConstructionSpec(parts, arcs, "row4-skeleton")


def row4_spec(params, depth: int = DEPTH, denominator: int = 10**9) -> ConstructionSpec:
    skel = row4_skeleton(depth)
    fr = [Fraction(float(v)).limit_denominator(denominator) for v in row4_weights(params, depth)]
    fr[-1] = 1 - sum(fr[:-1])
    keep = {p.name for p, w in zip(skel.parts, fr) if w > 0}
    parts = [Part(p.name, w) for p, w in zip(skel.parts, fr) if w > 0]
    arcs = [r for r in skel.arcs if r.src in keep and r.dst in keep]
    return ConstructionSpec(parts, arcs, "G4")


@lru_cache(maxsize=None)
def _poly(depth: int):
    return weight_polynomial(row4_skeleton(depth), TARGET)


def row4_value(params, depth: int = DEPTH) -> float:
    return _poly(depth)(row4_weights(params, depth))


def optimize_row4(starts: int = 20, seed: int = 0, depth: int = DEPTH):
    """Multi-start Nelder-Mead over the 11 free blob parameters."""
    poly = _poly(depth)
    rng = np.random.default_rng(seed)

    def obj(z):
        z = np.asarray(z)
        if np.any(z[:10] < 0) or not 0 <= z[10] < 1 or z[:10].sum() <= 0:
            return 1.0
        return -poly(row4_weights(z, depth))

    best = None
    for _ in range(starts):
        z0 = np.concatenate([rng.uniform(0.01, 0.2, 10), [rng.uniform(0.2, 0.9)]])
        res = minimize(obj, z0, method="Nelder-Mead",
                       options={"maxiter": 20000, "maxfev": 20000, "xatol": 1e-11, "fatol": 1e-14,
                                "adaptive": True})
        res = minimize(obj, res.x, method="Nelder-Mead",
                       options={"maxiter": 20000, "maxfev": 20000, "xatol": 1e-11, "fatol": 1e-14,
                                "adaptive": True})
        if best is None or res.fun < best.fun:
            best = res
    z = np.asarray(best.x)
    z[:10] = z[:10] / z[:10].sum() / 2
    return tuple(float(v) for v in z), float(-best.fun)
