import copy
from fractions import Fraction
from itertools import combinations, permutations, product

import numpy as np
import pytest

from _shared import sdp_bound
from inducibility.catalog import catalog4
from inducibility.counting import count_induced_naive
from inducibility.extremal import exhaustive_max
from inducibility.flags import (
    Block,
    Flag,
    FlagCertificate,
    FlagError,
    FlagType,
    enumerate_flags,
    flag_density,
    is_psd,
    pair_density,
    pair_matrix,
    trivial_certificate,
    verify_certificate,
)
from inducibility.graphs import OrientedGraph, parse_graph, random_graph

V1 = FlagType(1, OrientedGraph(1))
TT3 = FlagType(3, parse_graph("3:121323"))
OUT = Flag(V1, parse_graph("2:12"))


def brute_flag_count(ftype: FlagType, m: int) -> int:
    """Label-fixing isomorphism classes of all extensions of the type to m vertices."""
    s = ftype.s
    free = [(i, j) for i, j in combinations(range(m), 2) if j >= s]
    seen = set()
    for st in product(range(3), repeat=len(free)):
        S = np.zeros((m, m), int)
        S[:s, :s] = ftype.states()
        for (i, j), x in zip(free, st):
            S[i, j], S[j, i] = x, (0, 2, 1)[x]
        best = None
        for tail in permutations(range(s, m)):
            p = list(range(s)) + list(tail)
            key = tuple(S[np.ix_(p, p)].ravel())
            best = key if best is None or key < best else best
        seen.add(best)
    return len(seen)


def brute_pair_density(F1: Flag, F2: Flag, G: OrientedGraph) -> Fraction:
    """Conditional pair density straight from the definition."""
    s, m1, m2 = F1.type.s, F1.m, F2.m
    S = G.state_matrix()

    def iso(block, F):
        T = S[np.ix_(block, block)]
        want = F.graph.state_matrix()
        return any(np.array_equal(T[np.ix_(list(range(s)) + list(t), list(range(s)) + list(t))], want)
                   for t in permutations(range(s, len(block))))

    ok = hits = 0
    for lab in permutations(range(G.n), s):
        if not np.array_equal(S[np.ix_(lab, lab)], F1.type.states()):
            continue
        rest = [v for v in range(G.n) if v not in lab]
        for b1 in combinations(rest, m1 - s):
            for b2 in combinations([v for v in rest if v not in b1], m2 - s):
                ok += 1
                hits += iso(list(lab) + list(b1), F1) and iso(list(lab) + list(b2), F2)
    return Fraction(hits, ok) if ok else Fraction(0)


def test_enumerate_examples():
    assert [str(F) for F in enumerate_flags(V1, 2)] == ["2:", "2:12", "2:21"]
    assert len(enumerate_flags(FlagType(0), 4)) == 42


@pytest.mark.parametrize("ftype,m", [(TT3, 4), (V1, 3), (FlagType(3, parse_graph("3:122331")), 4),
                                     (FlagType(0), 3), (FlagType(2, parse_graph("2:")), 4)])
def test_enumerate_matches_brute_force(ftype, m):
    flags = enumerate_flags(ftype, m)
    assert len(flags) == brute_flag_count(ftype, m)
    assert all(F.type == ftype and F.m == m for F in flags)


def test_flag_rejects_wrong_type():
    with pytest.raises(FlagError):
        Flag(TT3, parse_graph("4:1223"))
    with pytest.raises(FlagError):
        enumerate_flags(V1, 6)


def test_pair_density_examples():
    assert pair_density(OUT, OUT, parse_graph("3:1213")) == Fraction(1, 3)
    assert pair_density(OUT, OUT, parse_graph("3:1223")) == 0
    E2 = Flag(FlagType(0), parse_graph("2:"))
    assert pair_density(E2, E2, parse_graph("4:")) == 1


def test_pair_density_matches_brute_force(rng):
    flags = enumerate_flags(V1, 3)
    for _ in range(3):
        G = random_graph(5, rng)
        for F1, F2 in [(flags[i], flags[j]) for i, j in rng.integers(0, len(flags), (6, 2))]:
            assert pair_density(F1, F2, G) == brute_pair_density(F1, F2, G)


def test_pair_density_partition(rng):
    for ftype, m, n in ((V1, 3, 5), (TT3, 4, 6), (FlagType(0), 2, 4)):
        flags = enumerate_flags(ftype, m)
        G = random_graph(n, rng, p_arc=0.9)
        total = sum(pair_density(a, b, G) for a in flags for b in flags)
        induced = sum(flag_density(F, G) for F in flags)
        assert total in (0, 1) and total == induced


def test_unconditional_density_and_pair_matrix(rng):
    flags = enumerate_flags(V1, 3)
    G = random_graph(6, rng)
    M, total = pair_matrix(V1, flags, G.state_matrix())
    for i, j in ((0, 0), (1, 2), (4, 4)):
        assert Fraction(int(M[i, j]), total) == pair_density(flags[i], flags[j], G, conditional=False)
    # a one-vertex type is always induced
    assert pair_density(flags[3], flags[1], G) == pair_density(flags[3], flags[1], G, conditional=False)


def test_pair_density_size_check():
    with pytest.raises(FlagError):
        pair_density(OUT, OUT, parse_graph("2:12"))


def test_is_psd_examples():
    F = Fraction
    assert is_psd([[F(1), F(1)], [F(1), F(1)]])
    assert is_psd([[F(0), F(0)], [F(0), F(1)]])
    assert not is_psd([[F(0), F(1)], [F(1), F(0)]])
    assert not is_psd([[F(1), F(2)], [F(2), F(1)]])
    assert not is_psd([[F(0), F(0)], [F(0), F(-1, 3)]])
    assert is_psd([[F(1, 3), F(1, 6)], [F(1, 6), F(1, 12)]])


def test_is_psd_agrees_with_eigenvalues():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        k = int(rng.integers(1, 7))
        B = rng.integers(-4, 5, (k, int(rng.integers(1, k + 1))))
        A = B @ B.T - int(rng.integers(0, 3)) * np.eye(k, dtype=int)
        w = np.linalg.eigvalsh(A.astype(float))
        if np.min(np.abs(w)) < 1e-6:
            continue
        Q = [[Fraction(int(x), 7) for x in row] for row in A]
        assert is_psd(Q) == bool(w.min() > 0)
        checked += 1


def test_is_psd_exact_on_singular_gram():
    rng = np.random.default_rng(3)
    for _ in range(30):
        B = rng.integers(-3, 4, (5, 2))
        Q = [[Fraction(int(x), 5) for x in row] for row in B @ B.T]
        assert is_psd(Q)


def test_trivial_certificates():
    c = trivial_certificate("4:", 5)
    assert c.bound == 1 and verify_certificate(c)
    row24 = catalog4().string(catalog4().row_class(24))
    c = trivial_certificate(row24, 6)
    assert c.bound == Fraction(3, 5) and verify_certificate(c)
    c = trivial_certificate("4:12233441", 5)
    assert c.bound == exhaustive_max("4:12233441", 5).max_density and verify_certificate(c)


@pytest.mark.parametrize("H", ["4:", "4:12233414", "4:12233441", "4:121314", "4:121323243441"])
def test_tight_trivial_certificate_rejected(H):
    c = trivial_certificate(H, 5)
    c.bound -= Fraction(1, 10**6)
    v = verify_certificate(c)
    assert not v and v.reason == "inequality fails"
    assert Fraction(count_induced_naive(parse_graph(H), parse_graph(v.witness)), 5) == c.bound + Fraction(1, 10**6)


def test_certificate_json_roundtrip():
    c = trivial_certificate("4:12233414", 5)
    again = FlagCertificate.from_json(c.to_json())
    assert again.to_dict() == c.to_dict() and verify_certificate(again)


def test_structural_defects():
    base = trivial_certificate("4:12233414", 5)
    c = copy.deepcopy(base)
    c.N = 7
    assert "N must" in verify_certificate(c).reason
    c = copy.deepcopy(base)
    c.bound = Fraction(-1)
    assert "nonnegative" in verify_certificate(c).reason
    c = copy.deepcopy(base)
    c.blocks = [Block(V1, enumerate_flags(V1, 4), [[Fraction(0)] * 15 for _ in range(15)])]
    assert "exceeds N" in verify_certificate(c).reason
    c = copy.deepcopy(base)
    c.blocks[0].flags = c.blocks[0].flags[:1] * 2
    assert "malformed" in verify_certificate(c).reason


def test_psd_tamper_on_trivial_block():
    c = trivial_certificate("4:12233414", 5)
    c.blocks[0].Q[0][1] = c.blocks[0].Q[1][0] = Fraction(1)
    assert "positive semidefinite" in verify_certificate(c).reason


def test_sdp_certificate_and_tampering():
    lam, cert = sdp_bound()
    assert lam <= Fraction(1, 5)
    assert verify_certificate(cert)
    Q = max(cert.blocks, key=lambda b: len(b.Q)).Q
    t = copy.deepcopy(cert)
    big = max(t.blocks, key=lambda b: len(b.Q))
    big.Q[0][1] += 1
    big.Q[1][0] += 1
    assert not verify_certificate(t)
    t = copy.deepcopy(cert)
    max(t.blocks, key=lambda b: len(b.Q)).Q[0][len(Q) - 1] += Fraction(1, 10**6)
    assert "symmetric" in verify_certificate(t).reason
    t = copy.deepcopy(cert)
    t.bound -= Fraction(1, 10**6)
    assert verify_certificate(t).reason == "inequality fails"
