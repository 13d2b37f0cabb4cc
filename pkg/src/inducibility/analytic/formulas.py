"""Named density formulas for the parametrized constructions, their closed
forms, and the optimizers that recover the constants."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npp
from numpy import cbrt
from scipy.optimize import minimize, minimize_scalar

PENALTY = 1e4
P_GRID = np.linspace(0.0, 1.0, 1001)
_VANDER = np.vander(P_GRID, 8, increasing=True)
POLY_BOX = 4.0
N_COEF = 8


class DomainError(ValueError):
    """Parameters outside the formula's feasible domain."""


class ConvergenceError(RuntimeError):
    """Optimizer failed to reach the requested accuracy."""


# --- polynomial integrals for the probabilistic constructions -----------------


def _ordered(factors) -> float:
    """Integral of prod g_i(x_i) over 0 < x_1 < ... < x_j < 1 (float coefficients)."""
    h = np.array([1.0])
    for g in factors:
        h = npp.polyint(npp.polymul(g, h))
    return float(npp.polyval(1.0, h))


def _pq(coef):
    p = np.asarray(coef, dtype=float)
    return p, npp.polysub([1.0], p)


def integrals_c20(coef) -> tuple[float, float, float]:
    p, q = _pq(coef)
    pq = npp.polymul(p, q)
    I1 = _ordered([pq])
    I2 = _ordered([pq, npp.polymul(p, p)])  # b < a: p(b)(1-p(b)) then p(a)^2
    I3 = _ordered([q, p, q])                 # c < b < a
    return I1, I2, I3


def integrals_c26(coef) -> tuple[float, float]:
    p, q = _pq(coef)
    pq = npp.polymul(p, q)
    I1 = _ordered([pq])
    I2 = _ordered([npp.polymul(q, q), pq])   # b < a: (1-p(b))^2 then p(a)(1-p(a))
    return I1, I2


def _p_range_violation(coef) -> float:
    coef = np.asarray(coef, dtype=float)
    v = _VANDER[:, :len(coef)] @ coef if len(coef) <= 8 else npp.polyval(P_GRID, coef)
    return float(np.sum(np.clip(-v, 0, None) ** 2 + np.clip(v - 1, 0, None) ** 2))


# --- the formulas -----------------------------------------------------------------


def f_c7(a, b, c, d):
    den = 1 - 2 * a**4 - 2 * b**4 - 2 * c**4 - d**4
    return 24 * ((a + b) ** 2 * c**2 + 2 * a * b * d * (b + 2 * c)) / den


def f_c9(x):
    return 32 * (1 - 2 * x) * x**3 / (1 - (1 - 2 * x) ** 4) if x > 0 else 0.0


def f_c15(x):
    return 12 * x**2 * (1 - 2 * x) ** 2 / (1 - 2 * x**4)


def f_c19(x):
    return 24 * (1 - 2 * x) * x**3 / (1 - (1 - 2 * x) ** 4) if x > 0 else 0.0


def f_c20(x, y, *coef):
    I1, I2, I3 = integrals_c20(coef)
    z = 1 - x - y
    return 24 * y * z / (1 - x**4) * (x * y * I1 + y * z * I2 + z**2 * I3)


def f_c21(alpha):
    # 4! * int_alpha^{1-alpha} (alpha - (z - alpha))^2 / 2 dz
    return 4 * (alpha**3 - (3 * alpha - 1) ** 3)


def f_c22(y, q):
    s = 1 - q
    return ((1 - 2 * y / s) ** 2 * 12 * y**2 / s**2
            + 24 * q * y**3 / s**2 * (1 / (1 + q + q * q) - y / (1 - q**4)))


def f_c23(x):
    if x >= 1:
        return 0.0
    return (8 / 5 * x * (1 - x) ** 3 + 8 / 315 * (1 - x) ** 4) / (1 - x**4)


def f_c26(x, y, *coef):
    I1, I2 = integrals_c26(coef)
    z = 1 - x - y
    return 24 * y**2 * z / (1 - x**4) * (x * I1 + z * I2)


def f_c28(x):
    return (x**4 / 8 + x**3 * (1 - x)) / (1 - (1 - x) ** 4) if x > 0 else 0.0


_R = float(cbrt(sqrt(2) - 1))

CLOSED_FORMS = {
    "c9": 4 - 6 / _R + 6 * _R,
    "c15": 9 * (sqrt(2) - 2) + 6 * sqrt(2 * (sqrt(2) - 1)),
    "c18": 9 * (sqrt(2) - 2) + 6 * sqrt(2 * (sqrt(2) - 1)),
    "c19": 1.5 * (2 - 3 / _R + 3 * _R),
    "c21": (28 + 6 * sqrt(3)) / 169,
    "c23": float(4 / 105 * (61 ** (2 / 3) * cbrt(sqrt(7690) - 63) - 61 ** (2 / 3) * cbrt(63 + sqrt(7690)) + 42)),
    "c28": (8 - 3 ** (7 / 3) + 3 ** (5 / 3)) / 8,
}


@dataclass(frozen=True)
class DensityFormula:
    name: str
    params: tuple[str, ...]
    evaluator: Callable
    paper_value: float
    bounds: tuple = ()
    constraint: Optional[Callable] = None  # residual <= 0 when feasible
    closed_form: Optional[float] = None
    reference_argmax: Optional[tuple] = None
    one_sided: bool = False
    note: str = ""

    @property
    def arity(self) -> int:
        return len(self.params)


def _c7_constraint(a, b, c, d):
    return abs(2 * a + 2 * b + 2 * c + d - 1)


def _c22_constraint(y, q):
    return max(2 * y - (1 - q), 0.0)


def _prob_constraint(x, y, *coef):
    return max(x + y - 1, 0.0) + _p_range_violation(coef)


_poly_params = tuple(f"p{i}" for i in range(N_COEF))
_poly_box = ((-POLY_BOX, POLY_BOX),) * N_COEF

FORMULAS: dict[str, DensityFormula] = {
    f.name: f for f in [
        DensityFormula("c7", ("a", "b", "c", "d"), f_c7, 0.102124, ((0, 1),) * 4, _c7_constraint,
                       reference_argmax=(0.117446, 0.159343, 0.146896, 0.152629)),
        DensityFormula("c9", ("x",), f_c9, 0.423570, ((0, 0.5),), closed_form=CLOSED_FORMS["c9"],
                       reference_argmax=(0.37346,)),
        DensityFormula("c15", ("x",), f_c15, 0.189000, ((0, 0.5),), closed_form=CLOSED_FORMS["c15"],
                       reference_argmax=(0.25202,)),
        DensityFormula("c18", ("x",), f_c15, 0.189000, ((0, 0.5),), closed_form=CLOSED_FORMS["c18"],
                       reference_argmax=(0.25202,)),
        DensityFormula("c19", ("x",), f_c19, 0.317678, ((0, 0.5),), closed_form=CLOSED_FORMS["c19"],
                       reference_argmax=(0.37346,)),
        DensityFormula("c20", ("x", "y") + _poly_params, f_c20, 0.119537, ((0, 1), (0, 1)) + _poly_box,
                       _prob_constraint, one_sided=True),
        DensityFormula("c21", ("alpha",), f_c21, 0.227173, ((1 / 3, 0.5),), closed_form=CLOSED_FORMS["c21"],
                       reference_argmax=((9 + sqrt(3)) / 26,)),
        DensityFormula("c22", ("y", "q"), f_c22, 0.244053, ((0, 0.5), (0, 1)), _c22_constraint),
        DensityFormula("c23", ("x",), f_c23, 0.177630, ((0, 1),), closed_form=CLOSED_FORMS["c23"],
                       reference_argmax=(0.24063,)),
        DensityFormula("c26", ("x", "y") + _poly_params, f_c26, 0.112567, ((0, 1), (0, 1)) + _poly_box,
                       _prob_constraint, one_sided=True),
        DensityFormula("c28", ("x",), f_c28, 0.157501, ((0, 1),), closed_form=CLOSED_FORMS["c28"],
                       reference_argmax=(0.85642,)),
    ]
}

# rows whose value is a plain rational (no parameters)
RATIONAL_ROWS = {
    1: Fraction(1), 2: Fraction(72, 125), 3: Fraction(3, 8), 5: Fraction(64, 315),
    6: Fraction(6, 31), 8: Fraction(81, 512), 10: Fraction(81, 400), 11: Fraction(1, 8),
    12: Fraction(1, 2), 13: Fraction(2, 21), 14: Fraction(3, 16), 16: Fraction(3, 8),
    17: Fraction(2, 21), 24: Fraction(3, 8), 25: Fraction(4, 9), 27: Fraction(4, 27),
    29: Fraction(1, 2), 30: Fraction(1),
}

for _row, _val in RATIONAL_ROWS.items():
    FORMULAS[f"r{_row}"] = DensityFormula(f"r{_row}", (), (lambda v=_val: float(v)), float(_val),
                                          closed_form=float(_val), note=str(_val))


def get_formula(name: str) -> DensityFormula:
    try:
        return FORMULAS[name]
    except KeyError:
        raise KeyError(f"unknown formula {name!r}; known: {', '.join(FORMULAS)}") from None


def in_domain(f: DensityFormula, params, tol: float = 1e-12) -> bool:
    if len(params) != f.arity:
        return False
    for v, (lo, hi) in zip(params, f.bounds):
        if not lo - tol <= v <= hi + tol:
            return False
    if f.constraint is not None and f.constraint(*params) > tol:
        return False
    return True


def formula_eval(name: str, params=()) -> float:
    f = get_formula(name)
    params = tuple(float(v) for v in params)
    # published parameter points are rounded to 6 digits
    if not in_domain(f, params, tol=1e-5):
        raise DomainError(f"{name}: parameters {params} outside the feasible domain")
    return float(f.evaluator(*params))


# --- optimization -------------------------------------------------------------------


@dataclass
class OptResult:
    name: str
    argmax: tuple
    value: float
    iterations: int
    converged: bool
    paper_value: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return self.value - self.paper_value

    def to_dict(self) -> dict:
        return {"name": self.name, "argmax": list(self.argmax), "value": self.value,
                "paper_value": self.paper_value, "delta": self.delta,
                "iterations": self.iterations, "converged": self.converged, **self.extra}


def _golden_1d(f: DensityFormula, scan: int = 1000, xtol: float = 1e-10) -> OptResult:
    lo, hi = f.bounds[0]
    xs = np.linspace(lo, hi, scan + 1)
    vals = np.array([f.evaluator(x) for x in xs])
    i = int(np.argmax(vals))
    a, c = xs[max(i - 1, 0)], xs[min(i + 1, scan)]
    if i in (0, scan):
        return OptResult(f.name, (float(xs[i]),), float(vals[i]), scan, True, f.paper_value)
    res = minimize_scalar(lambda x: -f.evaluator(x), bracket=(a, xs[i], c), method="golden",
                          options={"xtol": xtol})
    x = float(res.x)
    return OptResult(f.name, (x,), float(f.evaluator(x)), scan + int(res.nfev),
                     bool(res.success), f.paper_value)


def _multistart(f: DensityFormula, sample, to_full, starts: int, seed: int, maxiter: int,
                tol: float = 1e-13) -> OptResult:
    """Nelder-Mead on a reduced parametrization with penalties; best of ``starts``."""
    rng = np.random.default_rng(seed)

    def obj(z):
        full = to_full(z)
        pen = 0.0
        for v, (lo, hi) in zip(full, f.bounds):
            pen += max(lo - v, 0.0) ** 2 + max(v - hi, 0.0) ** 2
        if f.constraint is not None:
            pen += f.constraint(*full)
        if pen > 0:
            return -0.0 + PENALTY * pen
        try:
            return -f.evaluator(*full)
        except ZeroDivisionError:
            return PENALTY

    best = None
    iters = 0
    for _ in range(starts):
        z0 = sample(rng)
        res = minimize(obj, z0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "maxfev": maxiter, "xatol": tol, "fatol": tol,
                                "adaptive": len(z0) > 4})
        # a restart from the best point polishes the simplex
        res = minimize(obj, res.x, method="Nelder-Mead",
                       options={"maxiter": maxiter, "maxfev": maxiter, "xatol": tol, "fatol": tol,
                                "adaptive": len(z0) > 4})
        iters += int(res.nit)
        cand = (float(-res.fun), tuple(float(v) for v in to_full(res.x)), bool(res.success))
        if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
    return OptResult(f.name, best[1], best[0], iters, best[2], f.paper_value)


def _c7_full(z):
    a, b, c = z
    return (a, b, c, 1 - 2 * (a + b + c))


def _c22_full(z):
    return (z[0], z[1])


def _prob_full(z):
    return tuple(z)


def _prob_sample(rng):
    x, y = rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.4)
    if x + y > 0.95:
        x, y = 0.5 * x, 0.5 * y
    coef = np.zeros(N_COEF)
    coef[0] = rng.uniform(0.1, 0.9)
    coef[1] = rng.uniform(-0.5, 0.5)
    return np.concatenate([[x, y], coef])


def shrink_polynomial(coef, margin: float = 1e-9) -> np.ndarray:
    """Scale p toward 1/2 until it stays in [margin, 1 - margin] on a fine grid."""
    coef = np.asarray(coef, dtype=float)
    grid = np.linspace(0, 1, 100_001)
    v = npp.polyval(grid, coef)
    dev = max(float(np.max(np.abs(v - 0.5))), 1e-300)
    lam = min(1.0, (0.5 - margin) / dev)
    out = lam * coef
    out[0] += 0.5 * (1 - lam)
    return out


def optimize_formula(name: str, starts: int = 50, seed: int = 0) -> OptResult:
    f = get_formula(name)
    if f.arity == 0:
        return OptResult(name, (), f.evaluator(), 0, True, f.paper_value)
    if f.arity == 1:
        return _golden_1d(f)
    if name == "c7":
        sample = lambda rng: rng.dirichlet(np.ones(4))[:3] / 2  # noqa: E731
        return _multistart(f, sample, _c7_full, starts, seed, 4000)
    if name == "c22":
        def sample(rng):
            q = rng.uniform(0, 0.9)
            return np.array([rng.uniform(0, (1 - q) / 2), q])
        return _multistart(f, sample, _c22_full, starts, seed, 4000)
    if name in ("c20", "c26"):
        res = _multistart(f, _prob_sample, _prob_full, starts, seed, 8000, tol=1e-11)
        x, y, *coef = res.argmax
        coef = shrink_polynomial(coef)
        full = (x, y, *coef)
        res.argmax = tuple(float(v) for v in full)
        res.value = float(f.evaluator(*full))
        return res
    raise KeyError(name)


def optimize_all(names=None, starts: int = 50, seed: int = 0) -> list[OptResult]:
    names = names or [n for n, f in FORMULAS.items() if f.arity > 0]
    return [optimize_formula(n, starts, seed) for n in names]


def results_json(results, config: dict | None = None) -> str:
    body = {"results": [r.to_dict() for r in results]}
    if config is not None:
        body = {"config": config, **body}
    return json.dumps(body, indent=2)


def formula_table_csv() -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "params", "paper_value", "closed_form", "one_sided", "reference_argmax"])
    for f in FORMULAS.values():
        w.writerow([f.name, " ".join(f.params), f"{f.paper_value:.6f}",
                    "" if f.closed_form is None else f"{f.closed_form:.12f}", f.one_sided,
                    "" if f.reference_argmax is None else " ".join(f"{v:g}" for v in f.reference_argmax)])
    return buf.getvalue()
