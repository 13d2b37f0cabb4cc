"""Exact induced densities of 4-vertex classes in construction limits.

Sample k i.i.d. points from the limit object.  For each multiset of parts the
points are labelled in part order; independent factors (internal structure of
each part, constant cross rules, and one joint factor per transitive part that
feeds polynomial rules) are combined by convolution on the additive pair-state
code.  Summing over multisets with multinomial weights and averaging over the
k! relabellings gives the labelled law D_k.  Iterated parts satisfy
D_k = Sym(base_k) / (1 - sum_iter w^k), where base_k omits the all-in-one
iterated-part terms.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod

import numpy as np

from ..catalog import catalog4
from ..constructions import (
    ARBITRARY,
    CHOICE,
    EMPTY,
    ITERATE,
    RANDOM,
    REGULAR,
    TRANSITIVE,
    Circular,
    ConstructionSpec,
    Sub,
    check_spec,
    position_part,
)
from ..graphs import OrientedGraph
from . import polynomials as P
from .circular import MAX_EXACT_DENOMINATOR, circular_distribution, circular_profile


class UnsupportedSpec(ValueError):
    """The spec has no exact limit handled by the evaluator."""


@lru_cache(maxsize=None)
def _slot(k: int) -> dict:
    m = k * (k - 1) // 2
    return {pr: 3 ** (m - 1 - i) for i, pr in enumerate(itertools.combinations(range(k), 2))}


def _arc_code(k: int, s: int, t: int) -> int:
    """Code contribution of the arc s -> t among k labelled points."""
    w = _slot(k)
    return w[(s, t)] if s < t else 2 * w[(t, s)]


@lru_cache(maxsize=None)
def _embed_map(j: int, labels: tuple, k: int) -> np.ndarray:
    """Local code on j points -> global code on k points (labels increasing)."""
    out = np.zeros(3 ** (j * (j - 1) // 2), dtype=np.int64)
    loc = list(itertools.combinations(range(j), 2))
    gw = _slot(k)
    for c in range(len(out)):
        x, g = c, 0
        for (a, b) in reversed(loc):
            x, d = divmod(x, 3)
            g += d * gw[(labels[a], labels[b])]
        out[c] = g
    return out


@lru_cache(maxsize=None)
def _relabel_maps(k: int) -> np.ndarray:
    """(k!, 3^m) table: code -> code of the graph relabelled by each permutation."""
    m = k * (k - 1) // 2
    perms = list(itertools.permutations(range(k)))
    out = np.zeros((len(perms), 3 ** m), dtype=np.int64)
    for c in range(3 ** m):
        S = OrientedGraph.from_code(k, c).state_matrix()
        for q, p in enumerate(perms):
            code = 0
            for a, b in itertools.combinations(range(k), 2):
                code = 3 * code + int(S[p[a], p[b]])
            out[q, c] = code
    return out


def symmetrize(dist: dict, k: int) -> dict:
    if k < 2:
        return dict(dist)
    maps = _relabel_maps(k)
    out = defaultdict(Fraction)
    nperm = maps.shape[0]
    for c, pr in dist.items():
        share = pr / nperm
        for q in range(nperm):
            out[int(maps[q, c])] += share
    return dict(out)


def convolve(d1: dict, d2: dict) -> dict:
    if len(d1) == 1 and 0 in d1 and d1[0] == 1:
        return d2
    out = defaultdict(Fraction)
    for c1, p1 in d1.items():
        for c2, p2 in d2.items():
            out[c1 + c2] += p1 * p2
    return dict(out)


@lru_cache(maxsize=None)
def _transitive_dist(j: int) -> dict:
    out = defaultdict(Fraction)
    share = Fraction(1, factorial(j))
    for ranks in itertools.permutations(range(j)):
        code = 0
        for a, b in itertools.combinations(range(j), 2):
            code = 3 * code + (1 if ranks[a] < ranks[b] else 2)
        out[code] += share
    return dict(out)


@lru_cache(maxsize=None)
def _random_dist(j: int) -> dict:
    m = j * (j - 1) // 2
    share = Fraction(1, 2 ** m)
    out = {}
    for states in itertools.product((1, 2), repeat=m):
        code = 0
        for s in states:
            code = 3 * code + s
        out[code] = share
    return out


class LimitEvaluator:
    def __init__(self, assume_invariant: bool = False):
        self.assume_invariant = assume_invariant
        self._cache: dict = {}
        self._rules: dict = {}

    def rules(self, spec):
        key = id(spec)
        if key not in self._rules:
            rm = spec.rule_map()
            pos = {ij: position_part(spec, r) for ij, r in rm.items() if r.is_poly}
            self._rules[key] = (spec, rm, pos)
        return self._rules[key][1], self._rules[key][2]

    # internal law of j points inside one part
    def internal(self, spec: ConstructionSpec, part, j: int) -> dict:
        st = part.structure
        if j < 2 or st == EMPTY:
            return {0: Fraction(1)}
        if st == TRANSITIVE:
            return _transitive_dist(j)
        if st == ARBITRARY:
            if not self.assume_invariant:
                raise UnsupportedSpec(f"part {part.name}: arbitrary tournament has no unique limit "
                                      "(pass assume_invariant to treat it as transitive)")
            return _transitive_dist(j)
        if st == RANDOM:
            return _random_dist(j)
        if st == REGULAR:
            return circular_distribution(Fraction(1, 2), j)
        if st == ITERATE:
            return self.labeled(spec, j)
        if isinstance(st, Sub):
            return self.labeled(st.spec, j)
        if isinstance(st, Circular):
            if st.alpha.denominator > MAX_EXACT_DENOMINATOR:
                raise UnsupportedSpec(f"part {part.name}: circular alpha {st.alpha} has no exact cell form")
            return circular_distribution(st.alpha, j)
        raise UnsupportedSpec(f"unknown structure {st!r}")

    def labeled(self, spec: ConstructionSpec, k: int) -> dict:
        key = (id(spec), k)
        if key not in self._cache:
            self._cache[key] = (spec, self._compute(spec, k, symmetric=True))
        return self._cache[key][1]

    def _compute(self, spec, k, symmetric):
        if k == 1:
            return {0: Fraction(1)}
        base = defaultdict(Fraction)
        for ms, mult in multisets(spec, k):
            w = mult * prod((spec.parts[i].weight for i in ms), start=Fraction(1))
            for c, pr in self.assignment(spec, ms).items():
                base[c] += w * pr
        out = symmetrize(base, k) if symmetric else dict(base)
        s = spec.iterate_weight(k)
        if s:
            out = {c: v / (1 - s) for c, v in out.items()}
        return out

    def assignment(self, spec: ConstructionSpec, ms: tuple) -> dict:
        """Law of the labelled code when point i lies in part ms[i]."""
        k = len(ms)
        groups = defaultdict(list)
        for lab, i in enumerate(ms):
            groups[i].append(lab)
        rules, pos = self.rules(spec)

        poly_pairs = defaultdict(list)  # position part -> [(label in it, other label, rule)]
        dist = {0: Fraction(1)}
        for a, b in itertools.combinations(range(k), 2):
            i, j = ms[a], ms[b]
            if i == j:
                continue
            if (i, j) in rules:
                rule, s, t = rules[(i, j)], a, b
            elif (j, i) in rules:
                rule, s, t = rules[(j, i)], b, a
            else:
                continue
            if rule.is_poly:
                pp = pos[(i, j)] if (i, j) in pos else pos[(j, i)]
                mine = a if ms[a] == pp else b
                poly_pairs[pp].append((mine, s, t, rule))
                continue
            p = rule.prob
            fwd = _arc_code(k, s, t)
            alt = _arc_code(k, t, s) if rule.mode == CHOICE else 0
            if p == 1:
                f = {fwd: Fraction(1)}
            elif p == 0:
                f = {alt: Fraction(1)}
            else:
                f = {fwd: p, alt: 1 - p}
            dist = convolve(dist, f)

        for i, labs in groups.items():
            part = spec.parts[i]
            if i in poly_pairs:
                f = self._poly_factor(k, labs, poly_pairs[i])
            else:
                if len(labs) < 2:
                    continue
                loc = self.internal(spec, part, len(labs))
                emb = _embed_map(len(labs), tuple(labs), k)
                f = {int(emb[c]): pr for c, pr in loc.items()}
            dist = convolve(dist, f)
        return dist

    def _poly_factor(self, k, labs, pairs):
        """Joint law of a transitive part's internal order and its polynomial rules."""
        j = len(labs)
        w = _slot(k)
        outcomes = []  # per pair: [(code, poly for the in-part label), ...]
        for mine, s, t, rule in pairs:
            fwd = _arc_code(k, s, t)
            alt = _arc_code(k, t, s) if rule.mode == CHOICE else 0
            outcomes.append((mine, [(fwd, rule.prob), (alt, P.one_minus(rule.prob))]))
        out = defaultdict(Fraction)
        for order in itertools.permutations(labs):  # order[0] lowest position
            rank = {lab: r for r, lab in enumerate(order)}
            base = sum(w[(a, b)] * (1 if rank[a] < rank[b] else 2)
                       for a, b in itertools.combinations(labs, 2))
            for choice in itertools.product(*(o[1] for o in outcomes)):
                g = {lab: P.ONE for lab in labs}
                code = base
                for (mine, _), (c, pol) in zip(outcomes, choice):
                    code += c
                    g[mine] = P.mul(g[mine], pol)
                pr = P.ordered_integral([g[lab] for lab in order])
                if pr:
                    out[code] += pr
        return dict(out)

    def class_profile(self, spec: ConstructionSpec) -> list[Fraction]:
        cat = catalog4()
        dist = self._compute(spec, 4, symmetric=False)
        out = [Fraction(0)] * len(cat)
        for c, pr in dist.items():
            out[cat.pattern_lut[c]] += pr
        return out


def multisets(spec: ConstructionSpec, k: int):
    """Part multisets of size k with multinomial multiplicities, skipping
    all-in-one iterated parts (handled by the fixpoint)."""
    for ms in itertools.combinations_with_replacement(range(len(spec.parts)), k):
        if ms[0] == ms[-1] and spec.parts[ms[0]].structure == ITERATE:
            continue
        cnt = Counter(ms)
        mult = factorial(k)
        for v in cnt.values():
            mult //= factorial(v)
        yield ms, mult


def _single_circular(spec):
    return len(spec.parts) == 1 and isinstance(spec.parts[0].structure, Circular)


def limit_profile(spec: ConstructionSpec, assume_invariant: bool = False, resolution: int = 480):
    """Limit densities of all 42 classes.

    Exact Fractions, except for a lone circular part whose alpha has a large
    denominator, where the quadrature route returns floats.
    """
    check_spec(spec)
    if _single_circular(spec):
        alpha = spec.parts[0].structure.alpha
        if alpha.denominator > MAX_EXACT_DENOMINATOR:
            return [float(x) for x in circular_profile(alpha, resolution)]
    return LimitEvaluator(assume_invariant).class_profile(spec)


def limit_density(spec: ConstructionSpec, class_id, assume_invariant: bool = False,
                  resolution: int = 480):
    cid = catalog4().resolve(class_id)
    return limit_profile(spec, assume_invariant, resolution)[cid]


class WeightPolynomial:
    """Density of one class as a polynomial in the part weights (no iteration).

    ``value(w) = sum_r coef[r] * prod_i w[ms[r, i]]``; the structure is fixed
    and only the weights vary, which is what blob-size optimizers need.
    """

    def __init__(self, ms: np.ndarray, coef: np.ndarray):
        self.ms = ms
        self.coef = coef

    def __call__(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if len(self.coef) == 0:
            return 0.0
        return float(self.coef @ np.prod(w[self.ms], axis=1))


def weight_polynomial(spec: ConstructionSpec, class_id, assume_invariant: bool = False) -> WeightPolynomial:
    check_spec(spec)
    if any(p.structure == ITERATE for p in spec.parts):
        raise UnsupportedSpec("weight polynomial needs a spec without iterated parts")
    cat = catalog4()
    cid = cat.resolve(class_id)
    ev = LimitEvaluator(assume_invariant)
    rows, coefs = [], []
    for ms, mult in multisets(spec, 4):
        pr = sum((v for c, v in ev.assignment(spec, ms).items() if cat.pattern_lut[c] == cid), Fraction(0))
        if pr:
            rows.append(ms)
            coefs.append(float(mult * pr))
    return WeightPolynomial(np.array(rows, dtype=np.int64).reshape(-1, 4), np.array(coefs))
