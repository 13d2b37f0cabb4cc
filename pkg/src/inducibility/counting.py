"""Induced 4-vertex subgraph counts: naive oracle, exact LUT pass, sampling."""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _fast
from .catalog import catalog4
from .graphs import OrientedGraph

EXACT_CUTOFF = 10**9


class CountSizeError(ValueError):
    """Exact counting requested beyond the configured cutoff."""


@dataclass(frozen=True)
class Profile4:
    counts: np.ndarray
    n: int
    mode: str  # "exact" or "sampled"
    samples: int | None = None
    seed: int | None = None
    stderr: np.ndarray | None = None

    @property
    def total(self) -> int:
        return comb(self.n, 4) if self.mode == "exact" else int(self.samples)

    @property
    def densities(self) -> np.ndarray:
        t = self.total
        return self.counts / t if t else np.zeros(len(self.counts))

    def density(self, cid: int) -> float:
        return float(self.densities[cid])

    def to_csv(self, header: str | None = None) -> str:
        cat = catalog4()
        buf = io.StringIO()
        if header:
            buf.write(header.rstrip("\n") + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class_id", "graph_string", "count", "density", "stderr"])
        dens = self.densities
        for cid in range(len(self.counts)):
            se = "" if self.stderr is None else f"{self.stderr[cid]:.6g}"
            w.writerow([cid, cat.string(cid), int(self.counts[cid]), f"{dens[cid]:.12g}", se])
        return buf.getvalue()


def _relabellings(H: OrientedGraph) -> frozenset:
    A = H.adjacency
    return frozenset(np.ascontiguousarray(A[np.ix_(p, p)]).tobytes() for p in itertools.permutations(range(4)))


def count_induced_naive(H: OrientedGraph, G: OrientedGraph) -> int:
    """Reference count: every 4-subset tested against every relabelling of H."""
    if H.n != 4:
        raise ValueError("pattern must have 4 vertices")
    targets = _relabellings(H)
    adj = G.adjacency
    total = 0
    for q in itertools.combinations(range(G.n), 4):
        if np.ascontiguousarray(adj[np.ix_(q, q)]).tobytes() in targets:
            total += 1
    return total


def _exact_counts(S: np.ndarray, workers: int) -> np.ndarray:
    cat = catalog4()
    lut = np.asarray(cat.pattern_lut)
    n = S.shape[0]
    ncls = len(cat)
    if workers <= 1 or n < 16:
        return _fast.count4_range(S, lut, ncls, 0, n)
    # balance shards by the number of 4-subsets starting at each i
    weight = np.array([comb(n - 1 - i, 3) for i in range(n)], dtype=float)
    cum = np.cumsum(weight) / weight.sum()
    cuts = [0] + [int(np.searchsorted(cum, k / workers)) + 1 for k in range(1, workers)] + [n]
    cuts = sorted(set(min(c, n) for c in cuts))
    with ThreadPoolExecutor(workers) as ex:
        parts = ex.map(lambda ab: _fast.count4_range(S, lut, ncls, ab[0], ab[1]),
                       zip(cuts[:-1], cuts[1:]))
        return np.sum(list(parts), axis=0)


def _sampled_counts(S: np.ndarray, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = S.shape[0]
    lut = np.asarray(catalog4().pattern_lut)
    idx = np.empty((samples, 4), dtype=np.int64)
    todo = np.arange(samples)
    while todo.size:
        draw = rng.integers(0, n, size=(todo.size, 4))
        s = np.sort(draw, axis=1)
        ok = (s[:, 1:] != s[:, :-1]).all(axis=1)
        idx[todo[ok]] = s[ok]
        todo = todo[~ok]
    i, j, k, l = idx.T
    code = (S[i, j].astype(np.int64) * 243 + S[i, k] * 81 + S[i, l] * 27
            + S[j, k] * 9 + S[j, l] * 3 + S[k, l])
    return np.bincount(lut[code], minlength=len(catalog4()))


def profile4(G: OrientedGraph, mode: str = "auto", samples: int = 100_000,
             seed: int | None = None, exact_cutoff: int = EXACT_CUTOFF,
             workers: int = 1) -> Profile4:
    """Counts of all 42 classes among the 4-subsets of ``G``.

    ``mode`` is ``"exact"``, ``"sampled"`` or ``"auto"`` (exact while
    C(n,4) <= exact_cutoff).  Sampling needs a seed.
    """
    n = G.n
    if mode == "auto":
        mode = "exact" if comb(n, 4) <= exact_cutoff else "sampled"
    S = np.ascontiguousarray(G.state_matrix())
    if mode == "exact":
        if comb(n, 4) > exact_cutoff:
            raise CountSizeError(f"C({n},4) = {comb(n, 4)} exceeds exact cutoff {exact_cutoff}")
        if n < 4:
            return Profile4(np.zeros(len(catalog4()), np.int64), n, "exact")
        return Profile4(_exact_counts(S, workers), n, "exact")
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if samples < 1:
        raise ValueError("sample count must be positive")
    if seed is None:
        raise ValueError("sampled mode needs an explicit seed")
    if n < 4:
        raise ValueError("sampling needs at least 4 vertices")
    counts = _sampled_counts(S, samples, seed)
    p = counts / samples
    return Profile4(counts, n, "sampled", samples, seed, np.sqrt(p * (1 - p) / samples))


def density(H, G: OrientedGraph, mode: str = "auto", **kw) -> float:
    cid = catalog4().resolve(H)
    return profile4(G, mode, **kw).density(cid)


def count_class(H, G: OrientedGraph) -> int:
    """Exact count of a single class (no cutoff; compiled loop)."""
    cid = catalog4().resolve(H)
    return int(_fast.count_class(np.ascontiguousarray(G.state_matrix()),
                                 np.asarray(catalog4().pattern_lut), cid))


def batch_profiles(S: np.ndarray) -> np.ndarray:
    """Exact profiles of a stack of state matrices (B, n, n)."""
    cat = catalog4()
    return _fast.count4_batch(np.ascontiguousarray(S, dtype=np.uint8),
                              np.asarray(cat.pattern_lut), len(cat))
