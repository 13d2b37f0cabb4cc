"""Declarative limit objects (weighted blobs, internal structures, arc rules,
iteration) and their finite realizations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .analytic import polynomials as P
from .graphs import OrientedGraph

EMPTY = "empty"
TRANSITIVE = "transitive"
RANDOM = "random_tournament"
REGULAR = "regular_tournament"
ARBITRARY = "arbitrary_tournament"
ITERATE = "iterate"
SIMPLE_STRUCTURES = (EMPTY, TRANSITIVE, RANDOM, REGULAR, ARBITRARY, ITERATE)

DIRECTED = "directed"
CHOICE = "choice"
MAX_POLY_DEGREE = 7
BASE_BUDGET = 8


class SpecError(ValueError):
    """Invalid construction spec (message lists every problem found)."""


class RealizeError(ValueError):
    """The spec cannot be realized at the requested size."""


@dataclass(frozen=True)
class Circular:
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))


@dataclass(frozen=True)
class Sub:
    spec: "ConstructionSpec"


Structure = Union[str, Circular, Sub]


@dataclass(frozen=True)
class Part:
    name: str
    weight: Fraction
    structure: Structure = EMPTY

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))


@dataclass(frozen=True)
class ArcRule:
    """Arcs between two parts.

    ``prob`` is a constant Fraction or a polynomial (tuple of Fractions,
    lowest degree first) evaluated at the position of the endpoint lying in a
    transitive part (the source if both are transitive).  In ``directed``
    mode the arc src -> dst is present with that probability; in ``choice``
    mode the pair is always adjacent, src -> dst with probability p and
    dst -> src otherwise.
    """

    src: str
    dst: str
    prob: Union[Fraction, tuple] = Fraction(1)
    mode: str = DIRECTED

    def __post_init__(self):
        if isinstance(self.prob, (tuple, list)):
            object.__setattr__(self, "prob", P.poly(self.prob))
        else:
            object.__setattr__(self, "prob", Fraction(self.prob))

    @property
    def is_poly(self) -> bool:
        return isinstance(self.prob, tuple)


@dataclass(frozen=True)
class ConstructionSpec:
    parts: tuple[Part, ...]
    arcs: tuple[ArcRule, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "arcs", tuple(self.arcs))

    def index(self, name: str) -> int:
        for i, p in enumerate(self.parts):
            if p.name == name:
                return i
        raise KeyError(name)

    def rule_map(self) -> dict[tuple[int, int], ArcRule]:
        return {(self.index(r.src), self.index(r.dst)): r for r in self.arcs}

    @property
    def weights(self) -> list[Fraction]:
        return [p.weight for p in self.parts]

    def iterate_weight(self, k: int) -> Fraction:
        return sum((p.weight ** k for p in self.parts if p.structure == ITERATE), Fraction(0))


def position_part(spec: ConstructionSpec, rule: ArcRule) -> int:
    """Index of the part whose transitive position feeds a polynomial rule."""
    s, d = spec.index(rule.src), spec.index(rule.dst)
    return s if spec.parts[s].structure == TRANSITIVE else d


# --- validation ---------------------------------------------------------------


def validate_spec(spec: ConstructionSpec, path: str = "spec") -> list[str]:
    """All invariant violations, each prefixed by its location; empty if ok."""
    errs = []
    if not spec.parts:
        return [f"{path}: no parts"]
    names = [p.name for p in spec.parts]
    if len(set(names)) != len(names):
        errs.append(f"{path}: duplicate part names")
    for i, p in enumerate(spec.parts):
        where = f"{path}.parts[{i}]({p.name})"
        if not 0 < p.weight <= 1:
            errs.append(f"{where}: weight must lie in (0, 1]")
        st = p.structure
        if isinstance(st, Circular):
            if not 0 <= st.alpha <= Fraction(1, 2):
                errs.append(f"{where}: circular alpha must lie in [0, 1/2]")
        elif isinstance(st, Sub):
            errs.extend(validate_spec(st.spec, f"{where}.sub"))
        elif st not in SIMPLE_STRUCTURES:
            errs.append(f"{where}: unknown structure {st!r}")
    if sum(spec.weights) != 1:
        errs.append(f"{path}: weights must sum to 1 (got {sum(spec.weights)})")
    if spec.iterate_weight(2) >= 1:
        errs.append(f"{path}: a single iterated part cannot carry the whole weight")

    seen = set()
    for r, rule in enumerate(spec.arcs):
        where = f"{path}.arcs[{r}]({rule.src}->{rule.dst})"
        if rule.src not in names or rule.dst not in names:
            errs.append(f"{where}: unknown part")
            continue
        if rule.src == rule.dst:
            errs.append(f"{where}: rule must join two different parts")
        key = (rule.src, rule.dst)
        if key in seen:
            errs.append(f"{where}: more than one rule for this ordered pair")
        if (rule.dst, rule.src) in seen:
            errs.append(f"{where}: rules in both directions between the same parts")
        seen.add(key)
        if rule.mode not in (DIRECTED, CHOICE):
            errs.append(f"{where}: unknown mode {rule.mode!r}")
        if rule.is_poly:
            if P.degree(rule.prob) > MAX_POLY_DEGREE:
                errs.append(f"{where}: polynomial degree exceeds {MAX_POLY_DEGREE}")
            st = {spec.parts[spec.index(rule.src)].structure, spec.parts[spec.index(rule.dst)].structure}
            if TRANSITIVE not in st:
                errs.append(f"{where}: polynomial prob requires a transitive endpoint")
            vals = P.evaluate_float(rule.prob, np.linspace(0, 1, 10_001))
            if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
                errs.append(f"{where}: polynomial prob leaves [0, 1] on [0, 1]")
        elif not 0 <= rule.prob <= 1:
            errs.append(f"{where}: probability must lie in [0, 1]")
    return errs


def check_spec(spec: ConstructionSpec) -> None:
    errs = validate_spec(spec)
    if errs:
        raise SpecError("; ".join(errs))


# --- realization --------------------------------------------------------------


def apportion(weights, n: int) -> list[int]:
    """Largest-remainder apportionment; ties go to the earlier part."""
    w = [Fraction(x) for x in weights]
    total = sum(w)
    quotas = [x * n / total for x in w]
    sizes = [int(q) for q in quotas]
    left = n - sum(sizes)
    order = sorted(range(len(w)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:left]:
        sizes[i] += 1
    return sizes


def _rng(seed: int, path: tuple) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))


def _put(S, idx_a, idx_b, forward):
    """Set states for the block idx_a x idx_b: forward True means a -> b."""
    ia, ib = np.ix_(idx_a, idx_b)
    S[ia, ib] = np.where(forward, 1, 2)
    S[ib.T, ia.T] = np.where(forward, 2, 1).T


def _rotational(m: int) -> np.ndarray:
    """Boolean adjacency: i -> j iff 1 <= (j - i) mod m <= (m - 1) // 2."""
    d = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
    return (d >= 1) & (d <= (m - 1) // 2)


def _fill_tournament(S, idx, adj):
    S[np.ix_(idx, idx)] = np.where(adj, 1, np.where(adj.T, 2, 0))


class _Realizer:
    def __init__(self, seed: int, strict_regular: bool, randomize_arbitrary: bool):
        self.seed = seed
        self.strict = strict_regular
        self.randomize = randomize_arbitrary

    def fill(self, S, spec: ConstructionSpec, idx: np.ndarray, path: tuple):
        sizes = apportion(spec.weights, len(idx))
        offs = np.concatenate([[0], np.cumsum(sizes)])
        blocks = [idx[offs[i]:offs[i + 1]] for i in range(len(sizes))]
        for i, part in enumerate(spec.parts):
            self.fill_part(S, spec, part, blocks[i], path + (0, i))
        for r, rule in enumerate(spec.arcs):
            a, b = spec.index(rule.src), spec.index(rule.dst)
            self.apply_rule(S, spec, rule, blocks[a], blocks[b], path + (1, r))

    def fill_part(self, S, spec, part: Part, idx, path):
        m = len(idx)
        st = part.structure
        if m < 2 or st == EMPTY:
            return
        if st == TRANSITIVE or (st == ARBITRARY and not self.randomize):
            _fill_tournament(S, idx, np.triu(np.ones((m, m), bool), 1))
        elif st == RANDOM or st == ARBITRARY:
            up = _rng(self.seed, path).random((m, m)) < 0.5
            up = np.triu(up, 1)
            low = np.triu(~up, 1)
            _fill_tournament(S, idx, up | low.T)
        elif st == REGULAR:
            if m % 2:
                _fill_tournament(S, idx, _rotational(m))
            elif self.strict:
                raise RealizeError(f"regular tournament on even size {m} (part {part.name})")
            else:
                _fill_tournament(S, idx, _rotational(m + 1)[:m, :m])
        elif st == ITERATE:
            if m >= BASE_BUDGET:
                self.fill(S, spec, idx, path + (2,))
        elif isinstance(st, Sub):
            self.fill(S, st.spec, idx, path + (2,))
        elif isinstance(st, Circular):
            k = int(np.floor(st.alpha * m))
            if 2 * k >= m:
                raise RealizeError(f"circular alpha={st.alpha} on {m} points is not antisymmetric (2*floor(alpha*m) >= m)")
            d = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
            _fill_tournament(S, idx, (d >= 1) & (d <= k))
        else:
            raise RealizeError(f"unknown structure {st!r}")

    def apply_rule(self, S, spec, rule: ArcRule, A, B, path):
        if len(A) == 0 or len(B) == 0:
            return
        if rule.is_poly:
            pp = position_part(spec, rule)
            src_side = pp == spec.index(rule.src)
            m = len(A) if src_side else len(B)
            x = (np.arange(m) + 1) / (m + 1)
            px = np.clip(P.evaluate_float(rule.prob, x), 0, 1)
            prob = px[:, None] if src_side else px[None, :]
        else:
            prob = float(rule.prob)
        if not rule.is_poly and rule.prob in (0, 1):
            hit = np.full((len(A), len(B)), rule.prob == 1)
        else:
            hit = _rng(self.seed, path).random((len(A), len(B))) < prob
        if rule.mode == DIRECTED:
            ia, ib = np.ix_(A, B)
            S[ia, ib] = np.where(hit, 1, 0)
            S[ib.T, ia.T] = np.where(hit, 2, 0).T
        else:
            _put(S, A, B, hit)


def realize(spec: ConstructionSpec, n: int, seed: int = 0, strict_regular: bool = False,
            randomize_arbitrary: bool = False) -> OrientedGraph:
    """Finite ``n``-vertex graph following the spec; deterministic in (spec, n, seed)."""
    check_spec(spec)
    if n < 1:
        raise RealizeError("n must be positive")
    S = np.zeros((n, n), dtype=np.uint8)
    _Realizer(seed, strict_regular, randomize_arbitrary).fill(S, spec, np.arange(n), ())
    return OrientedGraph.from_states(S)


# --- JSON ---------------------------------------------------------------------


def _structure_to_json(st):
    if isinstance(st, Circular):
        return {"circular": str(st.alpha)}
    if isinstance(st, Sub):
        return {"sub": spec_to_dict(st.spec)}
    return st


def _structure_from_json(obj):
    if isinstance(obj, str):
        return obj
    if "circular" in obj:
        return Circular(Fraction(obj["circular"]))
    if "sub" in obj:
        return Sub(spec_from_dict(obj["sub"]))
    raise SpecError(f"unknown structure {obj!r}")


def spec_to_dict(spec: ConstructionSpec) -> dict:
    return {
        "name": spec.name,
        "parts": [{"name": p.name, "weight": str(p.weight), "structure": _structure_to_json(p.structure)}
                  for p in spec.parts],
        "arcs": [{"from": r.src, "to": r.dst,
                  "prob": {"poly": P.to_strings(r.prob)} if r.is_poly else str(r.prob),
                  "mode": r.mode} for r in spec.arcs],
    }


def spec_from_dict(d: dict) -> ConstructionSpec:
    parts = [Part(p["name"], Fraction(p["weight"]), _structure_from_json(p.get("structure", EMPTY)))
             for p in d["parts"]]
    arcs = []
    for a in d.get("arcs", []):
        prob = a.get("prob", "1")
        prob = tuple(Fraction(c) for c in prob["poly"]) if isinstance(prob, dict) else Fraction(prob)
        arcs.append(ArcRule(a["from"], a["to"], prob, a.get("mode", DIRECTED)))
    return ConstructionSpec(parts, arcs, d.get("name", ""))


def spec_to_json(spec: ConstructionSpec, **kw) -> str:
    return json.dumps(spec_to_dict(spec), **kw)


def spec_from_json(text: str) -> ConstructionSpec:
    return spec_from_dict(json.loads(text))


# --- small helpers used by the builtin table ------------------------------------


def blowup(pattern_arcs, weights=None, structure=EMPTY, names=None, name="") -> ConstructionSpec:
    """Blow-up of a small digraph given by arcs on ``0..k-1``."""
    k = 1 + max(max(a) for a in pattern_arcs) if pattern_arcs else 1
    if weights is None:
        weights = [Fraction(1, len(names) if names else k)] * (len(names) if names else k)
    k = len(weights)
    names = names or [chr(ord("A") + i) for i in range(k)]
    sts = structure if isinstance(structure, (list, tuple)) else [structure] * k
    parts = [Part(names[i], weights[i], sts[i]) for i in range(k)]
    arcs = [ArcRule(names[u], names[v]) for u, v in pattern_arcs]
    return ConstructionSpec(parts, arcs, name)
