"""Small oriented graphs: representation, text/binary I/O, canonical forms and
isomorph-free enumeration.

Vertices are ``0..n-1`` internally and ``1..n`` in the text format
``"n:uvuv..."`` (each digit pair ``uv`` is the arc ``u -> v``).
"""

from __future__ import annotations

import itertools
import re
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _fast

MAX_N = 1 << 16
MAX_TEXT_N = 9
MAX_CANON_N = 10
MAX_ENUM_N = 7

_GRAPH_RE = re.compile(r"^\s*([1-9]):([1-9]*)\s*$")


class GraphFormatError(ValueError):
    """Malformed graph string or binary payload."""


class GraphSizeError(ValueError):
    """Operation not supported at the requested vertex count."""


class OrientedGraph:
    """Loop-free, 2-cycle-free directed graph on ``n`` labelled vertices.

    Immutable; the adjacency matrix is exposed read-only.
    """

    __slots__ = ("n", "_adj", "_hash")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        if not 1 <= n <= MAX_N:
            raise GraphSizeError(f"vertex count {n} outside 1..{MAX_N}")
        adj = np.zeros((n, n), dtype=bool)
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if adj[v, u]:
                raise ValueError(f"2-cycle between {u} and {v}")
            adj[u, v] = True
        self._set(n, adj)

    def _set(self, n, adj):
        adj.setflags(write=False)
        self.n = n
        self._adj = adj
        self._hash = None

    @classmethod
    def from_adjacency(cls, adj) -> "OrientedGraph":
        adj = np.array(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError("adjacency matrix must be square")
        if adj.diagonal().any():
            raise ValueError("loops are not allowed")
        if (adj & adj.T).any():
            raise ValueError("2-cycles are not allowed")
        g = cls.__new__(cls)
        g._set(n, adj)
        return g

    @classmethod
    def from_states(cls, S) -> "OrientedGraph":
        """Build from a state matrix (1: row -> col, 2: col -> row)."""
        S = np.asarray(S)
        return cls.from_adjacency(S == 1)

    @classmethod
    def from_code(cls, n: int, code: int) -> "OrientedGraph":
        """Inverse of :meth:`code`."""
        states = []
        for _ in range(n * (n - 1) // 2):
            code, d = divmod(code, 3)
            states.append(d)
        return cls.from_pair_states(n, states[::-1])

    @classmethod
    def from_pair_states(cls, n: int, states: Sequence[int]) -> "OrientedGraph":
        adj = np.zeros((n, n), dtype=bool)
        for (u, v), s in zip(pairs(n), states):
            if s == 1:
                adj[u, v] = True
            elif s == 2:
                adj[v, u] = True
            elif s != 0:
                raise ValueError(f"invalid pair state {s}")
        g = cls.__new__(cls)
        g._set(n, adj)
        return g

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    def state_matrix(self) -> np.ndarray:
        a = self._adj.astype(np.uint8)
        return a + 2 * a.T

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def state(self, u: int, v: int) -> int:
        """0 if non-adjacent, 1 if ``u -> v``, 2 if ``v -> u``."""
        if self._adj[u, v]:
            return 1
        if self._adj[v, u]:
            return 2
        return 0

    @property
    def arcs(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(self._adj)
        return sorted(zip(us.tolist(), vs.tolist()))

    @property
    def num_arcs(self) -> int:
        return int(self._adj.sum())

    def out_degrees(self) -> np.ndarray:
        return self._adj.sum(axis=1)

    def in_degrees(self) -> np.ndarray:
        return self._adj.sum(axis=0)

    def nondegrees(self) -> np.ndarray:
        return self.n - 1 - self.out_degrees() - self.in_degrees()

    def pair_states(self) -> tuple[int, ...]:
        S = self.state_matrix()
        iu, ju = np.triu_indices(self.n, 1)
        return tuple(int(s) for s in S[iu, ju])

    def code(self) -> int:
        """Base-3 integer of the pair states, first pair most significant."""
        c = 0
        for s in self.pair_states():
            c = 3 * c + s
        return c

    def induced(self, vertices: Sequence[int]) -> "OrientedGraph":
        idx = np.asarray(vertices, dtype=np.intp)
        return OrientedGraph.from_adjacency(self._adj[np.ix_(idx, idx)])

    def relabel(self, perm: Sequence[int]) -> "OrientedGraph":
        """New vertex ``k`` is old vertex ``perm[k]``."""
        return self.induced(perm)

    def is_tournament(self) -> bool:
        return self.num_arcs == self.n * (self.n - 1) // 2

    def __eq__(self, other):
        if not isinstance(other, OrientedGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, np.packbits(self._adj).tobytes()))
        return self._hash

    def __repr__(self):
        if self.n <= MAX_TEXT_N:
            return f"OrientedGraph({format_graph(self)!r})"
        return f"OrientedGraph(n={self.n}, arcs={self.num_arcs})"


def pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def parse_graph(s: str) -> OrientedGraph:
    m = _GRAPH_RE.match(s)
    if not m:
        raise GraphFormatError(f"not a graph string: {s!r}")
    n = int(m.group(1))
    body = m.group(2)
    if len(body) % 2:
        raise GraphFormatError(f"odd number of arc digits in {s!r}")
    seen = set()
    arcs = []
    for k in range(0, len(body), 2):
        u, v = int(body[k]), int(body[k + 1])
        if u > n or v > n:
            raise GraphFormatError(f"vertex index out of range in arc {u}{v} (n={n})")
        if u == v:
            raise GraphFormatError(f"loop {u}{v}")
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate arc {u}{v}")
        if (v, u) in seen:
            raise GraphFormatError(f"2-cycle {u}{v}/{v}{u}")
        seen.add((u, v))
        arcs.append((u - 1, v - 1))
    return OrientedGraph(n, arcs)


def format_graph(G: OrientedGraph) -> str:
    if G.n > MAX_TEXT_N:
        raise GraphSizeError(f"text format supports n <= {MAX_TEXT_N}, got {G.n}")
    return f"{G.n}:" + "".join(f"{u + 1}{v + 1}" for u, v in G.arcs)


def reverse(G: OrientedGraph) -> OrientedGraph:
    return OrientedGraph.from_adjacency(G.adjacency.T)


def empty_graph(n: int) -> OrientedGraph:
    return OrientedGraph(n)


def transitive_tournament(n: int) -> OrientedGraph:
    return OrientedGraph(n, itertools.combinations(range(n), 2))


def directed_cycle(n: int) -> OrientedGraph:
    return OrientedGraph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n: int, rng: np.random.Generator, p_arc: float = 2 / 3) -> OrientedGraph:
    """Each pair is an arc with probability ``p_arc``, oriented uniformly."""
    S = np.zeros((n, n), dtype=np.uint8)
    iu, ju = np.triu_indices(n, 1)
    r = rng.random(iu.size)
    st = np.where(r < p_arc / 2, 1, np.where(r < p_arc, 2, 0)).astype(np.uint8)
    S[iu, ju] = st
    S[ju, iu] = np.where(st == 0, 0, 3 - st)
    return OrientedGraph.from_states(S)


def random_tournament(n: int, rng: np.random.Generator) -> OrientedGraph:
    return random_graph(n, rng, p_arc=1.0)


# --- binary format --------------------------------------------------------


def to_bytes(G: OrientedGraph) -> bytes:
    """Little-endian u32 ``n`` then 2-bit pair states, four pairs per byte
    (first pair in the low bits)."""
    states = np.array(G.pair_states(), dtype=np.uint8)
    pad = (-states.size) % 4
    states = np.concatenate([states, np.zeros(pad, np.uint8)]).reshape(-1, 4)
    packed = states[:, 0] | (states[:, 1] << 2) | (states[:, 2] << 4) | (states[:, 3] << 6)
    return struct.pack("<I", G.n) + packed.astype(np.uint8).tobytes()


def from_bytes(data: bytes) -> OrientedGraph:
    if len(data) < 4:
        raise GraphFormatError("truncated header")
    (n,) = struct.unpack_from("<I", data)
    if not 1 <= n <= MAX_N:
        raise GraphFormatError(f"bad vertex count {n}")
    npairs = n * (n - 1) // 2
    nbytes = (2 * npairs + 7) // 8
    body = np.frombuffer(data, dtype=np.uint8, offset=4)
    if body.size != nbytes:
        raise GraphFormatError(f"expected {nbytes} payload bytes, got {body.size}")
    states = np.stack([(body >> s) & 3 for s in (0, 2, 4, 6)], axis=1).ravel()[:npairs]
    if (states == 3).any():
        raise GraphFormatError("invalid pair state 3")
    S = np.zeros((n, n), dtype=np.uint8)
    iu, ju = np.triu_indices(n, 1)
    S[iu, ju] = states
    S[ju, iu] = np.where(states == 0, 0, 3 - states)
    return OrientedGraph.from_states(S)


def read_graph(path) -> OrientedGraph:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("ascii").strip()
    except UnicodeDecodeError:
        return from_bytes(data)
    if _GRAPH_RE.match(text):
        return parse_graph(text)
    return from_bytes(data)


def write_graph(G: OrientedGraph, path) -> None:
    if G.n <= MAX_TEXT_N:
        with open(path, "w") as fh:
            fh.write(format_graph(G) + "\n")
    else:
        with open(path, "wb") as fh:
            fh.write(to_bytes(G))


# --- canonical forms ------------------------------------------------------


@lru_cache(maxsize=None)
def _perm_table(n: int, fixed: int = 0):
    """Permutations of ``range(n)`` fixing the first ``fixed`` points."""
    head = tuple(range(fixed))
    perms = np.array([head + p for p in itertools.permutations(range(fixed, n))],
                     dtype=np.int64).reshape(-1, n)
    iu, ju = np.triu_indices(n, 1)
    return perms, iu.astype(np.int64), ju.astype(np.int64)


def canonical_codes(S: np.ndarray, fixed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Batch canonical codes of state matrices ``S`` (B, n, n), n <= 7.

    Returns the minimal codes and, for each, one minimising permutation.
    """
    S = np.ascontiguousarray(S, dtype=np.uint8)
    n = S.shape[1]
    if n * (n - 1) // 2 > 39:
        raise GraphSizeError("batch canonical codes need C(n,2) <= 39")
    perms, iu, ju = _perm_table(n, fixed)
    if n < 2:
        return np.zeros(S.shape[0], np.int64), np.zeros((S.shape[0], n), np.int64)
    codes, arg = _fast.canon_codes(S, perms, iu, ju)
    return codes, perms[arg]


def _lexmin_perm(S: np.ndarray, fixed: int = 0, chunk: int = 200_000) -> np.ndarray:
    """Lexicographically least pair-state row over all relabellings (any n)."""
    n = S.shape[0]
    iu, ju = np.triu_indices(n, 1)
    best_row = None
    best_perm = None
    head = tuple(range(fixed))
    it = (head + p for p in itertools.permutations(range(fixed, n)))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        P = np.array(block, dtype=np.intp)
        rows = S[P[:, iu], P[:, ju]]
        cand = np.arange(len(P))
        for col in range(rows.shape[1]):
            c = rows[cand, col]
            cand = cand[c == c.min()]
            if cand.size == 1:
                break
        row = rows[cand[0]]
        if best_row is None or tuple(row) < tuple(best_row):
            best_row, best_perm = row, P[cand[0]]
    return best_perm


def canonical_perm(G: OrientedGraph, fixed: int = 0) -> np.ndarray:
    if G.n > MAX_CANON_N:
        raise GraphSizeError(f"exhaustive canonical form supports n <= {MAX_CANON_N}")
    if G.n * (G.n - 1) // 2 <= 39:
        _, perm = canonical_codes(G.state_matrix()[None], fixed)
        return perm[0]
    return _lexmin_perm(G.state_matrix(), fixed)


def canonical_form(G: OrientedGraph) -> OrientedGraph:
    """Relabelling with the lexicographically least pair-state encoding."""
    return G.relabel(canonical_perm(G))


def canonical_code(G: OrientedGraph) -> int:
    return canonical_form(G).code()


def is_isomorphic(G: OrientedGraph, H: OrientedGraph) -> bool:
    if G.n != H.n or G.num_arcs != H.num_arcs:
        return False
    if sorted(zip(G.out_degrees(), G.in_degrees())) != sorted(zip(H.out_degrees(), H.in_degrees())):
        return False
    return canonical_form(G) == canonical_form(H)


# --- enumeration ------------------------------------------------------------


@dataclass(frozen=True)
class GraphClass:
    """Isomorphism class represented by its canonical graph."""

    canon: OrientedGraph
    id: int

    @property
    def n(self) -> int:
        return self.canon.n

    def __str__(self):
        return format_graph(self.canon) if self.canon.n <= MAX_TEXT_N else repr(self.canon)


def _extensions(parent: OrientedGraph) -> np.ndarray:
    """All 3**k one-vertex extensions of ``parent`` as state matrices."""
    k = parent.n
    n = k + 1
    base = np.zeros((n, n), dtype=np.uint8)
    base[:k, :k] = parent.state_matrix()
    ext = np.array(list(itertools.product((0, 1, 2), repeat=k)), dtype=np.uint8).reshape(-1, k)
    S = np.repeat(base[None], ext.shape[0], axis=0)
    S[:, k, :k] = ext
    S[:, :k, k] = np.where(ext == 0, 0, 3 - ext)
    return S


def iter_class_codes(n: int, allow_large: bool = False) -> Iterator[int]:
    """Stream canonical codes of all classes on ``n`` vertices.

    Orderly augmentation: a child is kept only when deleting its canonically
    last vertex gives back the (canonical) parent, so no global table is
    needed.  Order is deterministic (parents in order, children sorted).
    """
    if n < 1 or (n > 6 and not allow_large) or n > MAX_ENUM_N:
        raise GraphSizeError(f"enumeration supports 1 <= n <= 6 (7 with allow_large), got {n}")
    if n == 1:
        yield 0
        return
    parents = _class_codes(n - 1) if n - 1 <= 6 else tuple(iter_class_codes(n - 1, True))
    for pcode in parents:
        parent = OrientedGraph.from_code(n - 1, pcode)
        S = _extensions(parent)
        codes, perms = canonical_codes(S)
        keep = set()
        for b in np.unique(codes, return_index=True)[1]:
            last = perms[b][-1]
            rest = [v for v in perms[b] if v != last]
            # rest is already in canonical order, so its code must equal the parent's
            child = S[b][np.ix_(rest, rest)]
            sub_code, _ = canonical_codes(child[None])
            if sub_code[0] == pcode:
                keep.add(int(codes[b]))
        yield from sorted(keep)


@lru_cache(maxsize=None)
def _class_codes(n: int) -> tuple[int, ...]:
    return tuple(sorted(iter_class_codes(n)))


def enumerate_classes(n: int, allow_large: bool = False) -> list[GraphClass]:
    """Isomorph-free list of oriented graphs on ``n`` vertices, sorted by code."""
    if n == MAX_ENUM_N and allow_large:
        codes = sorted(iter_class_codes(n, allow_large=True))
    elif 1 <= n <= 6:
        codes = _class_codes(n)
    else:
        raise GraphSizeError(f"enumeration supports 1 <= n <= 6 (7 with allow_large), got {n}")
    return [GraphClass(OrientedGraph.from_code(n, c), i) for i, c in enumerate(codes)]


@lru_cache(maxsize=None)
def class_state_matrices(n: int) -> np.ndarray:
    """State matrices of all canonical class representatives on ``n`` vertices."""
    return np.stack([c.canon.state_matrix() for c in enumerate_classes(n)])
