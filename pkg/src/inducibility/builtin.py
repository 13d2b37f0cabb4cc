"""The thirty reference constructions with their claimed limit values."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt
from typing import Optional, Union

from .analytic.formulas import FORMULAS, RATIONAL_ROWS, optimize_formula
from .analytic.row4 import row4_spec
from .constructions import (
    ARBITRARY,
    CHOICE,
    EMPTY,
    ITERATE,
    RANDOM,
    REGULAR,
    TRANSITIVE,
    ArcRule,
    Circular,
    ConstructionSpec,
    Part,
    Sub,
)

# rows proven sharp (upper bound meets the construction)
EXACT_ROWS = frozenset({1, 2, 3, 8, 9, 10, 11, 12, 13, 14, 15, 16, 21, 24, 25, 28, 29, 30})
ROW_FORMULA = {4: "c4", 7: "c7", 9: "c9", 15: "c15", 18: "c18", 19: "c19", 20: "c20",
               21: "c21", 22: "c22", 23: "c23", 26: "c26", 28: "c28"}

# multi-parameter optima found by analytic.formulas / analytic.row4 (re-derived in tests)
C7_ARGMAX = ("0.117446391811549", "0.159342822153147", "0.146896203413527")
C22_ARGMAX = ("0.190411902423855", "0.375884653836656")
C20_ARGMAX = ("0.130735964849946", "0.481822614768931",
              ("0.454808830460861", "0.306007292348586", "0.291024883928402", "-1.422993940842582",
               "1.976768905422953", "0.929139930384669", "-3.999999866466358", "2.391879609640485"))
C26_ARGMAX = ("0.159943356748501", "0.499672795231204",
              ("0.065397595594353", "1.523217601934264", "-3.243216469626177", "3.989889316742866",
               "-0.840690425106578", "-3.729641253413547", "3.999999809469449", "-1.264800076742053"))
ROW4_PARAMS = (0.24909908537988343, 0.039369926713162244, 0.025070172222736196, 0.011155737016485359,
               2.72396998815446e-14, 0.10798753441775782, 0.03832507886756778, 0.018223404324576663,
               0.007883584570945217, 0.0028854764868580774, 0.36625525362502037)
ROW4_VALUE = 0.234309
ROW22_DEPTH = 12
DENOM = 10**12


@dataclass(frozen=True)
class BuiltinRow:
    row: int
    spec: ConstructionSpec
    claimed: Union[Fraction, float]
    exact: bool              # sharp row ("=") in the summary table
    formula: Optional[str]   # named formula giving the claimed value, if any
    randomized: bool         # realization depends on the seed
    invariant: bool          # arbitrary tournaments whose choice does not matter

    @property
    def rational(self) -> bool:
        return isinstance(self.claimed, Fraction)


def _fr(v) -> Fraction:
    return Fraction(v).limit_denominator(DENOM) if isinstance(v, float) else Fraction(v)


def _argmax1(name: str) -> Fraction:
    return _fr(optimize_formula(name).argmax[0])


def _cycle(k: int, name: str, structure=ITERATE) -> ConstructionSpec:
    names = [chr(ord("A") + i) for i in range(k)]
    parts = [Part(n, Fraction(1, k), structure) for n in names]
    arcs = [ArcRule(names[i], names[(i + 1) % k]) for i in range(k)]
    return ConstructionSpec(parts, arcs, name)


def _halves(structure, arcs=(), name="") -> ConstructionSpec:
    h = Fraction(1, 2)
    return ConstructionSpec([Part("A", h, structure), Part("B", h, structure)], arcs, name)


def spec_c7(a, b, c) -> ConstructionSpec:
    a, b, c = _fr(a), _fr(b), _fr(c)
    d = 1 - 2 * (a + b + c)
    w = {"a1": a, "a2": a, "b1": b, "b2": b, "c1": c, "c2": c, "d": d}
    arcs = [("a1", "c1"), ("a2", "c2"), ("b1", "c1"), ("b2", "c2"), ("c1", "c2"),
            ("a1", "b1"), ("a2", "b2"), ("b1", "d"), ("b2", "d"), ("c1", "d"), ("c2", "d")]
    return ConstructionSpec([Part(n, x, ITERATE) for n, x in w.items()],
                            [ArcRule(u, v) for u, v in arcs], "G7")


def spec_c9(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", 1 - 2 * x, ITERATE), Part("B", 2 * x)], [ArcRule("A", "B")], "G9")


def spec_c15(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", x, ITERATE), Part("B", 1 - 2 * x), Part("C", x, ITERATE)],
                            [ArcRule("A", "B"), ArcRule("B", "C")], "G15")


def spec_c18(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", x, ITERATE), Part("B", x, ITERATE), Part("C", 1 - 2 * x, ARBITRARY)],
                            [ArcRule("A", "B"), ArcRule("B", "C")], "G18")


def spec_c19(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", x, ARBITRARY), Part("B", x, ARBITRARY), Part("C", 1 - 2 * x, ITERATE)],
                            [ArcRule("C", "A"), ArcRule("C", "B")], "G19")


def spec_c20(x, y, coef) -> ConstructionSpec:
    x, y = _fr(x), _fr(y)
    p = tuple(_fr(c) for c in coef)
    return ConstructionSpec(
        [Part("A", x, ITERATE), Part("B", y), Part("C", 1 - x - y, TRANSITIVE)],
        [ArcRule("A", "B"), ArcRule("C", "A"), ArcRule("C", "B", p)], "G20")


def spec_c22(y, q, depth: int = ROW22_DEPTH) -> ConstructionSpec:
    """Blobs A^-K..A^K with arcs towards larger index; a_i = y q^(|i|-1),
    a_0 = 1 - 2y/(1-q); the truncated family is renormalized."""
    y, q = _fr(y), _fr(q)
    sizes = [(1 - 2 * y / (1 - q)) if i == 0 else y * q ** (abs(i) - 1) for i in range(-depth, depth + 1)]
    total = sum(sizes)
    names = [f"A{i}" for i in range(-depth, depth + 1)]
    parts = [Part(n, s / total) for n, s in zip(names, sizes)]
    arcs = [ArcRule(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]
    return ConstructionSpec(parts, arcs, "G22")


def spec_c23(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", x, ITERATE), Part("B", 1 - x, Sub(_cycle(4, "C4-iterated")))],
                            [ArcRule("A", "B")], "G23")


def spec_c26(x, y, coef) -> ConstructionSpec:
    x, y = _fr(x), _fr(y)
    p = tuple(_fr(c) for c in coef)
    return ConstructionSpec(
        [Part("A", x, ITERATE), Part("B", y), Part("C", 1 - x - y, TRANSITIVE)],
        [ArcRule("B", "A"), ArcRule("A", "C"), ArcRule("C", "B", p, CHOICE)], "G26")


def spec_c28(x) -> ConstructionSpec:
    x = _fr(x)
    return ConstructionSpec([Part("A", x, RANDOM), Part("B", 1 - x, ITERATE)], [ArcRule("A", "B")], "G28")


def spec_circular(alpha, name="") -> ConstructionSpec:
    return ConstructionSpec([Part("S", Fraction(1), Circular(_fr(alpha)))], [], name)


def _specs() -> dict[int, tuple[ConstructionSpec, bool]]:
    """row -> (spec, invariant flag)."""
    h = Fraction(1, 2)
    c4 = _cycle(4, "C4-iterated")
    s = {
        1: (ConstructionSpec([Part("A", Fraction(1))], [], "anticlique"), False),
        2: (ConstructionSpec([Part(f"T{i}", Fraction(1, 5), ARBITRARY) for i in range(5)], [],
                             "five tournaments"), True),
        3: (_halves(ARBITRARY, name="two tournaments"), True),
        4: (row4_spec(ROW4_PARAMS), False),
        5: (ConstructionSpec([Part("A", h, Sub(c4)), Part("B", h, Sub(c4))], [], "two iterated C4"), False),
        6: (_cycle(5, "C5-iterated"), False),
        7: (spec_c7(*C7_ARGMAX), False),
        8: (_halves(EMPTY, [ArcRule("A", "B", Fraction(3, 4))], "A -3/4-> A"), False),
        9: (spec_c9(_argmax1("c9")), False),
        10: (ConstructionSpec(
            [Part("A", Fraction(3, 20)), Part("B", Fraction(1, 4)), Part("C", Fraction(3, 20)),
             Part("D", Fraction(1, 4)), Part("E", Fraction(1, 5))],
            [ArcRule("A", "B"), ArcRule("B", "C"), ArcRule("C", "D"), ArcRule("D", "A"),
             ArcRule("C", "E"), ArcRule("A", "E")], "G10"), False),
        11: (_halves(REGULAR, name="two regular tournaments"), False),
        12: (_halves(TRANSITIVE, name="two transitive tournaments"), False),
        13: (c4, False),
        14: (_halves(EMPTY, [ArcRule("A", "B", h, CHOICE)], "random K_{n,n}"), False),
        15: (spec_c15(_argmax1("c15")), False),
        16: (_halves(EMPTY, [ArcRule("A", "B")], "directed K_{n,n}"), False),
        17: (ConstructionSpec([Part(n, Fraction(1, 4), ITERATE) for n in "abcd"],
                              [ArcRule("a", "b"), ArcRule("b", "c"), ArcRule("c", "a"), ArcRule("a", "d")],
                              "H-iterated"), False),
        18: (spec_c18(_argmax1("c18")), True),
        19: (spec_c19(_argmax1("c19")), True),
        20: (spec_c20(*C20_ARGMAX), False),
        21: (spec_circular((9 + sqrt(3)) / 26, "S1((9+sqrt3)/26)"), False),
        22: (spec_c22(*C22_ARGMAX), False),
        23: (spec_c23(_argmax1("c23")), False),
        24: (ConstructionSpec([Part("A", h, ARBITRARY), Part("B", h)], [ArcRule("A", "B")], "T -> A"), True),
        25: (_cycle(3, "C3 blow-up", EMPTY), False),
        26: (spec_c26(*C26_ARGMAX), False),
        27: (spec_circular(Fraction(4, 9), "S1(4/9)"), False),
        28: (spec_c28(_argmax1("c28")), False),
        29: (spec_circular(h, "S1(1/2)"), False),
        30: (ConstructionSpec([Part("T", Fraction(1), TRANSITIVE)], [], "transitive"), False),
    }
    return s


def _randomized(spec: ConstructionSpec) -> bool:
    for p in spec.parts:
        if p.structure == RANDOM:
            return True
        if isinstance(p.structure, Sub) and _randomized(p.structure.spec):
            return True
    return any(r.is_poly or 0 < r.prob < 1 for r in spec.arcs)


@lru_cache(maxsize=1)
def builtin_table() -> tuple[BuiltinRow, ...]:
    rows = []
    for row, (spec, invariant) in sorted(_specs().items()):
        formula = ROW_FORMULA.get(row)
        if row in RATIONAL_ROWS:
            claimed = RATIONAL_ROWS[row]
        elif row == 4:
            claimed = ROW4_VALUE
        else:
            claimed = FORMULAS[formula].paper_value
        rows.append(BuiltinRow(row, spec, claimed, row in EXACT_ROWS, formula,
                               _randomized(spec), invariant))
    return tuple(rows)


def builtin_row(row: int) -> BuiltinRow:
    for r in builtin_table():
        if r.row == row:
            return r
    raise KeyError(f"no builtin row {row}")
