"""Flags, pair densities and exactly verified upper-bound certificates.

A certificate claims d(H; G) + sum_b <Q_b, M_b(G)> <= lambda for every
oriented graph G on N vertices, with every Q_b positive semidefinite.
M_b(G)[i, j] is the probability that a random injection of the type labels
followed by two random disjoint blocks of the remaining vertices yields
copies of flags i and j.  The expectation of the quadratic form is
asymptotically nonnegative in any large host, so averaging over N-subsets
gives inducibility <= lambda.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, lcm
from typing import Optional, Sequence

import numpy as np

from .catalog import catalog4
from .counting import batch_profiles
from .graphs import (
    GraphFormatError,
    OrientedGraph,
    canonical_codes,
    class_state_matrices,
    enumerate_classes,
    format_graph,
    pairs,
    parse_graph,
)

MAX_FLAG_M = 5
MAX_CERT_N = 6
LAMBDA_GRID = 10**12


class FlagError(ValueError):
    pass


def _parse(s: str) -> Optional[OrientedGraph]:
    if s.strip() == "0:":
        return None
    return parse_graph(s)


def _fmt(G: Optional[OrientedGraph]) -> str:
    return "0:" if G is None else format_graph(G)


@dataclass(frozen=True)
class FlagType:
    """Fully labelled graph on vertices 0..s-1 (no quotient by isomorphism)."""

    s: int
    graph: Optional[OrientedGraph] = None

    def __post_init__(self):
        if self.s < 0:
            raise FlagError("type order must be >= 0")
        if (self.graph is None) != (self.s == 0) or (self.graph is not None and self.graph.n != self.s):
            raise FlagError("type graph must have exactly s vertices")

    @classmethod
    def parse(cls, s: str) -> "FlagType":
        G = _parse(s)
        return cls(0 if G is None else G.n, G)

    def __str__(self):
        return _fmt(self.graph)

    def states(self) -> np.ndarray:
        return np.zeros((0, 0), np.uint8) if self.graph is None else self.graph.state_matrix()


@dataclass(frozen=True)
class Flag:
    type: FlagType
    graph: OrientedGraph

    @property
    def m(self) -> int:
        return self.graph.n

    def __post_init__(self):
        s = self.type.s
        if self.graph.n < s:
            raise FlagError("flag smaller than its type")
        if not np.array_equal(self.graph.state_matrix()[:s, :s], self.type.states()):
            raise FlagError("labelled vertices do not induce the type")

    def __str__(self):
        return format_graph(self.graph)

    def code(self) -> int:
        return flag_code(self.graph.state_matrix(), self.type.s)


def flag_code(S: np.ndarray, s: int) -> int:
    """Canonical code up to isomorphisms fixing the first s vertices."""
    codes, _ = canonical_codes(np.asarray(S, np.uint8)[None], fixed=s)
    return int(codes[0])


def _flag_codes(S: np.ndarray, s: int) -> np.ndarray:
    if len(S) == 0:
        return np.zeros(0, np.int64)
    return canonical_codes(S, fixed=s)[0]


def enumerate_flags(ftype: FlagType, m: int) -> list[Flag]:
    """All flags on m vertices over the type, one per label-fixing
    isomorphism class, ordered by canonical code."""
    s = ftype.s
    if m < s or m > MAX_FLAG_M or m < 1:
        raise FlagError(f"need max(1, s) <= m <= {MAX_FLAG_M}")
    free = [(i, j) for i, j in pairs(m) if j >= s]
    base = np.zeros((m, m), np.uint8)
    base[:s, :s] = ftype.states()
    states = np.array(np.meshgrid(*([np.arange(3)] * len(free)), indexing="ij"),
                      dtype=np.uint8).reshape(len(free), -1).T if free else np.zeros((1, 0), np.uint8)
    S = np.repeat(base[None], len(states), axis=0)
    for k, (i, j) in enumerate(free):
        S[:, i, j] = states[:, k]
        S[:, j, i] = np.array([0, 2, 1], np.uint8)[states[:, k]]
    codes, perms = canonical_codes(S, fixed=s)
    _, first = np.unique(codes, return_index=True)
    out = []
    for k in first:
        P = perms[k]
        out.append(Flag(ftype, OrientedGraph.from_states(S[k][np.ix_(P, P)])))
    return out


def _placements(N: int, s: int, m1: int, m2: int):
    """(labels, block1, block2) index arrays over all injections and
    ordered disjoint block pairs."""
    L, B1, B2 = [], [], []
    for lab in permutations(range(N), s):
        rest = [v for v in range(N) if v not in lab]
        for b1 in combinations(rest, m1 - s):
            rest2 = [v for v in rest if v not in b1]
            for b2 in combinations(rest2, m2 - s):
                L.append(lab)
                B1.append(b1)
                B2.append(b2)
    k = len(L)
    return (np.array(L, np.intp).reshape(k, s), np.array(B1, np.intp).reshape(k, m1 - s),
            np.array(B2, np.intp).reshape(k, m2 - s))


@lru_cache(maxsize=None)
def _placement_table(N: int, s: int, m1: int, m2: int):
    return _placements(N, s, m1, m2)


def _pair_events(ftype: FlagType, m1: int, m2: int, S: np.ndarray):
    """For every placement: whether the labels induce the type, and the
    flag codes of the two blocks (valid only where the type is induced)."""
    s = ftype.s
    L, B1, B2 = _placement_table(S.shape[0], s, m1, m2)
    if s:
        lab = S[L[:, :, None], L[:, None, :]]
        ok = (lab == ftype.states()[None]).all(axis=(1, 2))
    else:
        ok = np.ones(len(L), bool)
    V1 = np.concatenate([L, B1], axis=1)[ok]
    V2 = np.concatenate([L, B2], axis=1)[ok]
    c1 = _flag_codes(np.ascontiguousarray(S[V1[:, :, None], V1[:, None, :]]), s)
    c2 = _flag_codes(np.ascontiguousarray(S[V2[:, :, None], V2[:, None, :]]), s)
    return len(L), ok, c1, c2


def _check_pair(F1: Flag, F2: Flag, G: OrientedGraph) -> None:
    if F1.type != F2.type:
        raise FlagError("flags have different types")
    if F1.m + F2.m - F1.type.s > G.n:
        raise FlagError("host graph too small for the flag pair")


def pair_density(F1: Flag, F2: Flag, G: OrientedGraph, conditional: bool = True) -> Fraction:
    """Probability that random labels plus two random disjoint blocks give
    copies of F1 and F2.  ``conditional`` conditions on the labels inducing
    the type (0 if they never do); otherwise injections are uniform over all
    of them."""
    _check_pair(F1, F2, G)
    s = F1.type.s
    total, ok, c1, c2 = _pair_events(F1.type, F1.m, F2.m, G.state_matrix())
    hits = int(np.count_nonzero((c1 == F1.code()) & (c2 == F2.code())))
    if conditional:
        n_ok = int(ok.sum())
        return Fraction(hits, n_ok) if n_ok else Fraction(0)
    return Fraction(hits, total)


def flag_density(F: Flag, G: OrientedGraph, conditional: bool = True) -> Fraction:
    """Single-flag density p(F; G) with the same conventions."""
    s = F.type.s
    L, B1, _ = _placement_table(G.n, s, F.m, s)
    S = G.state_matrix()
    if s:
        ok = (S[L[:, :, None], L[:, None, :]] == F.type.states()[None]).all(axis=(1, 2))
    else:
        ok = np.ones(len(L), bool)
    V = np.concatenate([L, B1], axis=1)[ok]
    codes = _flag_codes(np.ascontiguousarray(S[V[:, :, None], V[:, None, :]]), s)
    hits = int(np.count_nonzero(codes == F.code()))
    denom = int(ok.sum()) if conditional else len(L)
    return Fraction(hits, denom) if denom else Fraction(0)


def pair_matrix(ftype: FlagType, flags: Sequence[Flag], S: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer matrix of joint hit counts over all placements in the host,
    and the placement count (the unconditional normaliser)."""
    m = flags[0].m
    index = {F.code(): i for i, F in enumerate(flags)}
    total, ok, c1, c2 = _pair_events(ftype, m, m, S)
    M = np.zeros((len(flags), len(flags)), np.int64)
    i1 = np.array([index.get(int(c), -1) for c in c1], np.intp)
    i2 = np.array([index.get(int(c), -1) for c in c2], np.intp)
    keep = (i1 >= 0) & (i2 >= 0)
    np.add.at(M, (i1[keep], i2[keep]), 1)
    return M, total


# certificates

@dataclass
class Block:
    type: FlagType
    flags: list
    Q: list  # square list of Fractions

    def to_dict(self) -> dict:
        return {"type": {"s": self.type.s, "graph": str(self.type)},
                "flags": [str(F) for F in self.flags],
                "Q": [[_frac_str(x) for x in row] for row in self.Q]}


@dataclass
class FlagCertificate:
    target: str
    N: int
    bound: Fraction
    blocks: list

    def to_dict(self) -> dict:
        return {"target": self.target, "N": self.N, "lambda": _frac_str(self.bound),
                "blocks": [b.to_dict() for b in self.blocks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "FlagCertificate":
        blocks = []
        for b in d["blocks"]:
            t = b["type"]
            ftype = FlagType.parse(t["graph"])
            if ftype.s != int(t["s"]):
                raise FlagError("type order does not match its graph")
            flags = [Flag(ftype, parse_graph(f)) for f in b["flags"]]
            Q = [[Fraction(x) for x in row] for row in b["Q"]]
            blocks.append(Block(ftype, flags, Q))
        return cls(d["target"], int(d["N"]), Fraction(d["lambda"]), blocks)

    @classmethod
    def from_json(cls, text: str) -> "FlagCertificate":
        return cls.from_dict(json.loads(text))


def _frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""
    witness: Optional[str] = None
    lhs: Optional[Fraction] = None

    def __bool__(self):
        return self.accepted

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "reason": self.reason, "witness": self.witness,
                "lhs": None if self.lhs is None else _frac_str(self.lhs)}


def is_psd(Q: Sequence[Sequence[Fraction]]) -> bool:
    """Exact positive semidefiniteness by fraction-free symmetric elimination.

    Works on the integer matrix D*Q.  Each pivot is a principal minor over
    the pivots kept so far, so a negative one rejects; a zero pivot keeps
    the matrix PSD only if its whole remaining row vanishes, and is then
    dropped."""
    A, _ = _integer_form(Q)
    prev = 1
    rest = list(range(len(A)))
    while rest:
        k, rest = rest[0], rest[1:]
        p = A[k, k]
        if p < 0:
            return False
        if p == 0:
            if any(A[k, j] != 0 for j in rest):
                return False
            continue
        if rest:
            idx = np.array(rest)
            col = A[idx, k]
            sub = A[np.ix_(idx, idx)] * p - np.outer(col, col)
            A[np.ix_(idx, idx)] = sub // prev
        prev = p
    return True


def _structure(cert: FlagCertificate) -> Optional[str]:
    try:
        H = parse_graph(cert.target)
    except GraphFormatError as e:
        return f"bad target: {e}"
    if H.n != 4:
        return "target must have 4 vertices"
    if not 4 <= cert.N <= MAX_CERT_N:
        return f"N must lie in 4..{MAX_CERT_N}"
    if cert.bound < 0:
        return "lambda must be nonnegative"
    for b, blk in enumerate(cert.blocks):
        if not blk.flags:
            return f"block {b}: no flags"
        m = blk.flags[0].m
        if any(F.m != m or F.type != blk.type for F in blk.flags):
            return f"block {b}: flags differ in size or type"
        if 2 * m - blk.type.s > cert.N:
            return f"block {b}: 2m - s = {2 * m - blk.type.s} exceeds N"
        codes = [F.code() for F in blk.flags]
        if len(set(codes)) != len(codes):
            return f"block {b}: duplicate flags"
        k = len(blk.flags)
        if len(blk.Q) != k or any(len(row) != k for row in blk.Q):
            return f"block {b}: Q is not {k}x{k}"
        if any(blk.Q[i][j] != blk.Q[j][i] for i in range(k) for j in range(i)):
            return f"block {b}: Q is not symmetric"
    return None


def _integer_form(Q) -> tuple[np.ndarray, int]:
    """Q as an integer object matrix over a common denominator."""
    D = 1
    for row in Q:
        for x in row:
            D = lcm(D, Fraction(x).denominator)
    A = np.array([[int(Fraction(x) * D) for x in row] for row in Q], dtype=object)
    return A, D


def certificate_lhs(cert: FlagCertificate, S: np.ndarray, target_count: int, forms=None) -> Fraction:
    """Exact left-hand side for one host state matrix."""
    if forms is None:
        forms = [_integer_form(blk.Q) for blk in cert.blocks]
    lhs = Fraction(target_count, comb(S.shape[0], 4))
    for blk, (A, D) in zip(cert.blocks, forms):
        M, total = pair_matrix(blk.type, blk.flags, S)
        lhs += Fraction(int((A * M.astype(object)).sum()), D * total)
    return lhs


def verify_certificate(cert: FlagCertificate) -> Verdict:
    msg = _structure(cert)
    if msg:
        return Verdict(False, f"malformed certificate: {msg}")
    for b, blk in enumerate(cert.blocks):
        if not is_psd(blk.Q):
            return Verdict(False, f"block {b}: Q is not positive semidefinite")
    cid = catalog4().resolve(cert.target)
    S_all = class_state_matrices(cert.N)
    counts = batch_profiles(S_all)[:, cid]
    forms = [_integer_form(blk.Q) for blk in cert.blocks]
    for S, c in zip(S_all, counts):
        lhs = certificate_lhs(cert, S, int(c), forms)
        if lhs > cert.bound:
            return Verdict(False, "inequality fails", format_graph(OrientedGraph.from_states(S)), lhs)
    return Verdict(True, "accepted")


def max_density(H, N: int) -> Fraction:
    cid = catalog4().resolve(H)
    return Fraction(int(batch_profiles(class_state_matrices(N))[:, cid].max()), comb(N, 4))


def _trivial_block(N: int) -> Block:
    ftype = FlagType(1, OrientedGraph(1))
    flags = enumerate_flags(ftype, (N + 1) // 2)
    return Block(ftype, flags, [[Fraction(0)] * len(flags) for _ in flags])


def trivial_certificate(H, N: int = 5) -> FlagCertificate:
    """Zero quadratic form; lambda is the exact maximum density on N vertices."""
    if not 4 <= N <= MAX_CERT_N:
        raise FlagError(f"N must lie in 4..{MAX_CERT_N}")
    cid = catalog4().resolve(H)
    return FlagCertificate(catalog4().string(cid), N, max_density(cid, N), [_trivial_block(N)])


def _types(order: int) -> list[FlagType]:
    if order == 0:
        return [FlagType(0)]
    return [FlagType(order, c.canon) for c in enumerate_classes(order)]


def _rational_psd(Q: np.ndarray, denominator: int) -> list:
    """Nearby exactly-PSD matrix L L^T / d^2 from a factor rounded to 1/d."""
    w, V = np.linalg.eigh((Q + Q.T) / 2)
    keep = w > 1e-12
    L = np.rint(V[:, keep] * np.sqrt(w[keep]) * denominator).astype(np.int64).astype(object)
    P = L @ L.T if L.shape[1] else np.zeros((len(Q), len(Q)), dtype=object)
    d2 = denominator * denominator
    return [[Fraction(int(x), d2) for x in row] for row in P]


def heuristic_sdp_bound(H, N: int = 5, type_orders: Sequence[int] = (1, 3), seed: int = 0,
                        denominator: int = 10**6, margin: Fraction = Fraction(1, 10**9),
                        solver: Optional[str] = None) -> tuple[Fraction, FlagCertificate]:
    """Numeric SDP for the blocks, then exact rounding and an exactly
    recomputed lambda.  Falls back to the trivial certificate."""
    import cvxpy as cp

    if N != 5 or not set(type_orders) <= {1, 3}:
        raise FlagError("heuristic bound supports N = 5 with type orders in {1, 3}")
    cid = catalog4().resolve(H)
    trivial = trivial_certificate(cid, N)
    S_all = class_state_matrices(N)
    dens = batch_profiles(S_all)[:, cid] / comb(N, 4)

    blocks = []
    for s in type_orders:
        m = (N + s) // 2
        for ftype in _types(s):
            flags = enumerate_flags(ftype, m)
            mats = []
            for S in S_all:
                M, total = pair_matrix(ftype, flags, S)
                mats.append(M / total)
            if any(np.any(M) for M in mats):
                blocks.append((ftype, flags, mats))

    Qs = [cp.Variable((len(f), len(f)), PSD=True) for _, f, _ in blocks]
    t = cp.Variable()
    cons = []
    for g in range(len(S_all)):
        expr = dens[g]
        for Q, (_, _, mats) in zip(Qs, blocks):
            expr = expr + cp.sum(cp.multiply(Q, mats[g]))
        cons.append(expr <= t)
    # keep the numeric solution bounded so rounding stays tame
    cons += [cp.trace(Q) <= 100 for Q in Qs]
    prob = cp.Problem(cp.Minimize(t), cons)
    try:
        prob.solve(solver=solver or "CLARABEL")
    except cp.error.SolverError:
        return trivial.bound, trivial
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return trivial.bound, trivial

    cert_blocks = [Block(ftype, flags, _rational_psd(Q.value, denominator))
                   for Q, (ftype, flags, _) in zip(Qs, blocks)]
    cert = FlagCertificate(catalog4().string(cid), N, Fraction(0), cert_blocks)
    counts = batch_profiles(S_all)[:, cid]
    forms = [_integer_form(blk.Q) for blk in cert.blocks]
    lam = max(certificate_lhs(cert, S, int(c), forms) for S, c in zip(S_all, counts)) + margin
    # round up onto a readable grid; still an upper bound
    lam = Fraction(-((-lam.numerator * LAMBDA_GRID) // lam.denominator), LAMBDA_GRID)
    cert.bound = lam
    if lam >= trivial.bound or not verify_certificate(cert):
        return trivial.bound, trivial
    return lam, cert
