"""Finite extremal problems: exact maxima of N(H, G) over small n, a
hill-climbing search for larger n, and checks of the degree-counting
inequalities behind three of the upper bounds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from . import _fast
from .catalog import catalog4
from .counting import batch_profiles, count_induced_naive
from .graphs import (
    MAX_CANON_N,
    OrientedGraph,
    canonical_code,
    canonical_form,
    class_state_matrices,
    enumerate_classes,
    format_graph,
    iter_class_codes,
    random_graph,
    random_tournament,
    to_bytes,
)

EXHAUSTIVE_MAX_N = 6
CHUNK = 50_000


class SearchRangeError(ValueError):
    pass


@dataclass
class SearchReport:
    class_id: int
    n: int
    max_count: int
    witnesses: list = field(default_factory=list)
    method: dict = field(default_factory=dict)

    @property
    def max_density(self) -> Fraction:
        return Fraction(self.max_count, comb(self.n, 4))

    def to_dict(self) -> dict:
        def enc(G):
            return format_graph(G) if G.n <= 9 else to_bytes(G).hex()
        return {"class_id": self.class_id, "n": self.n, "max_count": self.max_count,
                "max_density": str(self.max_density), "witnesses": [enc(G) for G in self.witnesses],
                "method": self.method}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _chunks(n: int, allow_large: bool):
    """State-matrix stacks of all classes on n vertices, streamed."""
    if n <= EXHAUSTIVE_MAX_N:
        yield class_state_matrices(n)
        return
    buf = []
    for code in iter_class_codes(n, allow_large=allow_large):
        buf.append(OrientedGraph.from_code(n, code).state_matrix())
        if len(buf) == CHUNK:
            yield np.stack(buf)
            buf = []
    if buf:
        yield np.stack(buf)


def _check_n(n: int, allow_large: bool) -> None:
    if n < 4 or (n > EXHAUSTIVE_MAX_N and not (allow_large and n == 7)):
        raise SearchRangeError(f"exhaustive search needs 4 <= n <= {EXHAUSTIVE_MAX_N} (n=7 with allow_large)")


def exhaustive_profile_max(n: int, allow_large: bool = False) -> tuple[np.ndarray, list]:
    """Per-class maximum counts over all graphs on n vertices, with the
    state matrices attaining each maximum."""
    _check_n(n, allow_large)
    best = np.full(len(catalog4()), -1, dtype=np.int64)
    wits: list = [[] for _ in range(len(best))]
    for S in _chunks(n, allow_large):
        prof = batch_profiles(S)
        top = prof.max(axis=0)
        for c in range(len(best)):
            if top[c] > best[c]:
                best[c] = top[c]
                wits[c] = []
            if top[c] == best[c]:
                wits[c].extend(S[i] for i in np.flatnonzero(prof[:, c] == top[c]))
    return best, wits


def exhaustive_max(H, n: int, allow_large: bool = False) -> SearchReport:
    """Exact maximum of the class count over all oriented graphs on n vertices."""
    cid = catalog4().resolve(H)
    best, wits = exhaustive_profile_max(n, allow_large)
    witnesses = [OrientedGraph.from_states(S) for S in wits[cid]]
    return SearchReport(cid, n, int(best[cid]), witnesses, {"method": "exhaustive"})


# local search

def _twin_classes(S: np.ndarray) -> list[list[int]]:
    """Maximal sets of pairwise non-adjacent vertices with equal neighborhoods."""
    n = S.shape[0]
    classes: list[list[int]] = []
    for v in range(n):
        for cl in classes:
            w = cl[0]
            if S[v, w] == 0 and all(S[v, x] == S[w, x] for x in range(n) if x != v and x != w):
                cl.append(v)
                break
        else:
            classes.append([v])
    return classes


def _set_pair(S: np.ndarray, u: int, v: int, state: int) -> None:
    S[u, v] = state
    S[v, u] = (0, 2, 1)[state]


def _propose(S: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
    n = S.shape[0]
    T = S.copy()
    move = rng.integers(4)
    u, v = (int(x) for x in rng.choice(n, 2, replace=False))
    if move == 0:  # flip one arc
        if T[u, v] == 0:
            return None
        _set_pair(T, u, v, 3 - T[u, v])
    elif move == 1:  # delete or insert one arc
        _set_pair(T, u, v, 0 if T[u, v] else int(rng.integers(1, 3)))
    elif move == 2:  # make u a non-adjacent twin of v
        for x in range(n):
            if x != u and x != v:
                _set_pair(T, u, x, int(T[v, x]))
        _set_pair(T, u, v, 0)
    else:  # reorient everything between two twin classes
        cls = _twin_classes(T)
        if len(cls) < 2:
            return None
        i, j = rng.choice(len(cls), 2, replace=False)
        state = int(rng.integers(3))
        for a in cls[i]:
            for b in cls[j]:
                _set_pair(T, a, b, state)
    return None if np.array_equal(T, S) else T


def _key(S: np.ndarray) -> bytes:
    if S.shape[0] <= MAX_CANON_N - 2:
        return int(canonical_code(OrientedGraph.from_states(S))).to_bytes(8, "little")
    return S.tobytes()


def local_search(H, n: int, seed: int = 0, budget: int = 2000, restarts: int = 4,
                 start: Optional[OrientedGraph] = None) -> SearchReport:
    """Hill climbing with non-strict acceptance and a visited set.

    ``budget`` counts proposed moves over all restarts."""
    if n < 4:
        raise SearchRangeError("local search needs n >= 4")
    cat = catalog4()
    cid = cat.resolve(H)
    lut = np.asarray(cat.pattern_lut)
    rng = np.random.default_rng(seed)

    def score(S):
        return int(_fast.count_class(S, lut, cid))

    restarts = max(1, restarts)
    best_S, best = None, -1
    for r in range(restarts):
        if start is not None and r == 0:
            S = np.ascontiguousarray(start.state_matrix())
        else:
            S = np.ascontiguousarray(random_graph(n, rng, p_arc=float(rng.uniform(0.2, 0.9))).state_matrix())
        cur = score(S)
        visited = {_key(S)}
        steps = budget // restarts + (1 if r < budget % restarts else 0)
        for _ in range(steps):
            T = _propose(S, rng)
            if T is None:
                continue
            s = score(T)
            if s < cur:
                continue
            k = _key(T)
            if s == cur and k in visited:
                continue
            visited.add(k)
            S, cur = T, s
        if cur > best:
            best_S, best = S, cur
    G = OrientedGraph.from_states(best_S)
    if n <= MAX_CANON_N:
        G = canonical_form(G)
    if count_induced_naive(cat.graph(cid), G) != best:
        raise AssertionError("witness count does not re-verify")
    return SearchReport(cid, n, best, [G], {"method": "local", "seed": seed, "budget": budget,
                                            "restarts": restarts})


# counting inequalities

@dataclass
class InequalityReport:
    n: int
    mode: str
    checked: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"n": self.n, "mode": self.mode, "checked": self.checked,
                "violations": self.violations, "passed": self.passed}


def degree_product_bound(G: OrientedGraph) -> Fraction:
    """Half the sum over vertices of outdegree * indegree * nondegree."""
    d = G.out_degrees() * G.in_degrees() * G.nondegrees()
    return Fraction(int(d.sum()), 2)


def tournament_bound(n: int) -> Fraction:
    return Fraction(n * n * (n - 1) * (n - 2), 48)


def _row_class(row: int) -> int:
    cid = catalog4().row_class(row)
    if cid is None:
        raise LookupError(f"row {row} has no resolved class")
    return cid


def check_graph(G: OrientedGraph, report: InequalityReport) -> None:
    lut = np.asarray(catalog4().pattern_lut)
    S = np.ascontiguousarray(G.state_matrix())
    n = G.n

    def fail(name, lhs, rhs):
        report.violations.append({"check": name, "graph": format_graph(G) if n <= 9 else to_bytes(G).hex(),
                                  "lhs": str(lhs), "rhs": str(rhs)})

    def tick(name):
        report.checked[name] = report.checked.get(name, 0) + 1

    lhs = int(_fast.count_class(S, lut, _row_class(25)))
    rhs = degree_product_bound(G)
    tick("degree_product")
    if lhs > rhs:
        fail("degree_product", lhs, rhs)
    if rhs > Fraction(n * (n - 1) ** 3, 54):
        fail("degree_product_amgm", rhs, Fraction(n * (n - 1) ** 3, 54))
    if not G.is_tournament():
        return
    lhs = int(_fast.count_class(S, lut, _row_class(29)))
    tick("tournament_bound")
    if lhs > tournament_bound(n):
        fail("tournament_bound", lhs, tournament_bound(n))
    cyc, trans = _fast.triangle_counts(S)
    paths = int((G.out_degrees() * G.in_degrees()).sum())
    tick("triangle_identity")
    if not (2 * cyc + comb(n, 3) == 3 * cyc + trans == paths):
        fail("triangle_identity", f"{2 * cyc + comb(n, 3)},{3 * cyc + trans}", paths)
    if 4 * paths > n * (n - 1) ** 2:
        fail("triangle_identity_bound", paths, Fraction(n * (n - 1) ** 2, 4))


def check_inequalities(n: int, mode: str = "exhaustive", samples: int = 100, seed: int = 0) -> InequalityReport:
    """Exhaustive over all classes on n vertices (4 <= n <= 6), or sampled
    over random graphs and random tournaments for any n >= 4."""
    report = InequalityReport(n, mode)
    if mode == "exhaustive":
        _check_n(n, False)
        for c in enumerate_classes(n):
            check_graph(c.canon, report)
    elif mode == "sampled":
        if n < 4:
            raise SearchRangeError("need n >= 4")
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            check_graph(random_graph(n, rng), report)
            check_graph(random_tournament(n, rng), report)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return report
