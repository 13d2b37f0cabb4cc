import json
from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from inducibility.analytic import polynomials as P
from inducibility.analytic.circular import circular_density, circular_profile, circular_profile_exact
from inducibility.analytic.formulas import (
    CLOSED_FORMS,
    FORMULAS,
    DomainError,
    f_c9,
    f_c15,
    f_c19,
    f_c23,
    f_c28,
    formula_eval,
    optimize_formula,
)
from inducibility.analytic.limits import UnsupportedSpec, limit_density, limit_profile, weight_polynomial
from inducibility.analytic.resolution import _degree_signature, row_resolution
from inducibility.analytic.row4 import row4_spec, row4_value
from inducibility.builtin import (
    C7_ARGMAX,
    C22_ARGMAX,
    ROW4_PARAMS,
    builtin_row,
    builtin_table,
    spec_c9,
    spec_c15,
    spec_c18,
    spec_c19,
    spec_c23,
    spec_c28,
)
from inducibility.catalog import _load_rows, catalog4
from inducibility.constructions import EMPTY, ITERATE, Circular, ConstructionSpec, Part
from inducibility.graphs import parse_graph

NAMED = {9: (spec_c9, f_c9, 0.5), 15: (spec_c15, f_c15, 0.5), 18: (spec_c18, f_c15, 0.5),
         19: (spec_c19, f_c19, 0.5), 23: (spec_c23, f_c23, 1.0), 28: (spec_c28, f_c28, 1.0)}


def test_limit_examples():
    cat = catalog4()
    assert limit_density(builtin_row(16).spec, cat.class_id(parse_graph("4:13142324"))) == Fraction(3, 8)
    assert limit_density(builtin_row(8).spec, cat.row_class(8)) == Fraction(81, 512)
    assert limit_density(ConstructionSpec([Part("A", Fraction(1))], []), 0) == 1


def test_limit_profile_is_a_distribution():
    for row in (5, 7, 10, 17, 20, 26):
        prof = limit_profile(builtin_row(row).spec, assume_invariant=builtin_row(row).invariant)
        assert abs(float(sum(prof)) - 1) < 1e-12
        assert min(prof) >= 0


def test_arbitrary_parts_need_invariance_flag():
    spec = builtin_row(3).spec
    with pytest.raises(UnsupportedSpec):
        limit_density(spec, catalog4().row_class(3))
    assert limit_density(spec, catalog4().row_class(3), assume_invariant=True) == Fraction(3, 8)


def test_limit_reversal_symmetry():
    cat = catalog4()
    spec = builtin_row(10).spec
    rev = ConstructionSpec(spec.parts, [type(r)(r.dst, r.src, r.prob, r.mode) for r in spec.arcs])
    a, b = limit_profile(spec), limit_profile(rev)
    assert all(b[cat.reversal_pairing[c]] == a[c] for c in range(42))


def test_weight_polynomial_matches_limit():
    spec = builtin_row(10).spec
    cid = catalog4().row_class(10)
    wp = weight_polynomial(spec, cid)
    assert wp([float(w) for w in spec.weights]) == pytest.approx(float(Fraction(81, 400)), abs=1e-14)


def test_formula_eval_examples():
    assert formula_eval("c9", [0.37346]) == pytest.approx(0.423570, abs=1e-6)
    assert formula_eval("c28", [0.85642]) == pytest.approx((8 - 3 ** (7 / 3) + 3 ** (5 / 3)) / 8, abs=1e-6)
    assert formula_eval("c7", [0.117446, 0.159343, 0.146896, 0.152629]) == pytest.approx(0.102124, abs=1e-5)
    assert formula_eval("c9", [0]) == 0
    with pytest.raises(DomainError):
        formula_eval("c9", [0.7])
    with pytest.raises(DomainError):
        formula_eval("c7", [0.1, 0.1, 0.1, 0.1])


@pytest.mark.parametrize("row", sorted(NAMED))
def test_generic_evaluator_matches_named_formula(row):
    spec_fn, f, hi = NAMED[row]
    cid = catalog4().row_class(row)
    rng = np.random.default_rng(row)
    for x in rng.uniform(0.01, hi - 0.01, 20):
        x = float(Fraction(x).limit_denominator(10**12))
        v = limit_density(spec_fn(x), cid, assume_invariant=builtin_row(row).invariant)
        assert abs(float(v) - f(x)) <= 1e-9


def test_closed_forms_typed_independently():
    r = (sqrt(2) - 1) ** (1 / 3)
    assert CLOSED_FORMS["c9"] == pytest.approx(4 - 6 / r + 6 * r, abs=1e-12)
    assert CLOSED_FORMS["c15"] == pytest.approx(9 * (sqrt(2) - 2) + 6 * sqrt(2 * (sqrt(2) - 1)), abs=1e-12)
    assert CLOSED_FORMS["c28"] == pytest.approx(0.157501, abs=1e-6)


def test_one_dimensional_optima_are_stationary():
    for name in ("c9", "c15", "c19", "c23", "c28"):
        res = optimize_formula(name)
        f = FORMULAS[name]
        x = res.argmax[0]
        for h in (1e-4, -1e-4):
            if f.bounds[0][0] <= x + h <= f.bounds[0][1]:
                assert f.evaluator(x + h) <= res.value + 1e-15


def test_c7_and_c22_argmax_rederived():
    r7 = optimize_formula("c7", starts=20, seed=0)
    assert r7.value == pytest.approx(formula_eval("c7", [float(v) for v in C7_ARGMAX] +
                                                  [1 - 2 * sum(float(v) for v in C7_ARGMAX)]), abs=1e-9)
    assert np.allclose(r7.argmax[:3], [float(v) for v in C7_ARGMAX], atol=1e-4)
    r22 = optimize_formula("c22", starts=20, seed=0)
    assert r22.value == pytest.approx(formula_eval("c22", [float(v) for v in C22_ARGMAX]), abs=1e-9)
    assert np.allclose(r22.argmax, [float(v) for v in C22_ARGMAX], atol=1e-4)


def test_circular_examples():
    cat = catalog4()
    a21 = (9 + sqrt(3)) / 26
    assert circular_density(cat.row_class(21), a21) == pytest.approx((28 + 6 * sqrt(3)) / 169, abs=1e-6)
    assert circular_density(cat.row_class(27), Fraction(4, 9)) == pytest.approx(4 / 27, abs=1e-6)
    assert circular_density(0, 0) == pytest.approx(1, abs=1e-15)


def test_circular_numeric_matches_exact_cells():
    for alpha in (Fraction(1, 3), Fraction(2, 5), Fraction(4, 9), Fraction(1, 2)):
        exact = np.array([float(v) for v in circular_profile_exact(alpha)])
        assert np.allclose(circular_profile(float(alpha)), exact, atol=1e-9)


def test_circular_half_is_tournament_only():
    prof = circular_profile_exact(Fraction(1, 2))
    ts = set(catalog4().tournament_ids())
    assert all(v == 0 for c, v in enumerate(prof) if c not in ts)
    assert sum(prof) == 1


def test_polynomial_ordered_integral():
    one = P.poly([1])
    x = P.poly([0, 1])
    assert P.ordered_integral([one, one]) == Fraction(1, 2)
    assert P.ordered_integral([one, one, one]) == Fraction(1, 6)
    assert P.ordered_integral([x]) == Fraction(1, 2)
    # x1 < x2, weight x2: integral of x2 * x2 over [0,1] = 1/3
    assert P.ordered_integral([one, x]) == Fraction(1, 3)


def test_row_resolution_examples():
    res = row_resolution()
    cat = catalog4()
    assert res[1].class_id == 0
    assert res[13].class_id == cat.class_id(parse_graph("4:12233441"))
    assert _degree_signature(cat.graph(res[25].class_id))
    assert sum(_degree_signature(cat.graph(c)) for c in res[25].candidates) == 1
    assert all(r.confidence != "ambiguous" for r in res.values())
    classes = {r.class_id for r in res.values()}
    assert len(classes) == 30
    orbits = {min(r.class_id, r.partner_id) for r in res.values()}
    assert len(orbits) == 30


def test_mapping_file_matches_resolution():
    stored = _load_rows()
    res = row_resolution()
    for row, r in res.items():
        assert stored[str(row)]["class_id"] == r.class_id
        assert stored[str(row)]["partner_id"] == r.partner_id
    json.dumps(stored)


def test_builtin_limits_match_claimed():
    cat = catalog4()
    for r in builtin_table():
        v = limit_density(r.spec, cat.row_class(r.row), assume_invariant=r.invariant)
        if r.rational:
            assert v == r.claimed, r.row
        else:
            assert abs(float(v) - r.claimed) <= 2e-6, r.row


def test_row4_value_matches_generic_evaluator():
    v = float(limit_density(row4_spec(ROW4_PARAMS), catalog4().row_class(4)))
    assert v == pytest.approx(row4_value(ROW4_PARAMS), abs=1e-8)


def without_iteration(spec: ConstructionSpec) -> ConstructionSpec:
    parts = [Part(p.name, p.weight, EMPTY if p.structure == ITERATE else p.structure) for p in spec.parts]
    return ConstructionSpec(parts, spec.arcs, spec.name)


@pytest.mark.parametrize("row", [9, 15, 18, 19, 23, 28])
def test_removing_iteration_lowers_density(row):
    r = builtin_row(row)
    cid = catalog4().row_class(row)
    full = limit_density(r.spec, cid, assume_invariant=r.invariant)
    flat = limit_density(without_iteration(r.spec), cid, assume_invariant=r.invariant)
    assert flat < full


def test_profile_sums_to_one_for_all_eligible_builtins():
    for r in builtin_table():
        if r.invariant or any(isinstance(p.structure, Circular) for p in r.spec.parts):
            continue
        assert sum(limit_profile(r.spec)) == 1, r.row


@pytest.mark.parametrize("row", [21, 27, 29])
def test_circular_resolution_doubling(row):
    cid = catalog4().row_class(row)
    alpha = builtin_row(row).spec.parts[0].structure.alpha
    a = circular_density(cid, float(alpha), resolution=480)
    b = circular_density(cid, float(alpha), resolution=960)
    assert abs(a - b) <= 4e-6
