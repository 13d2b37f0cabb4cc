"""Match each reference construction to the 4-vertex class it targets.

For every row the full 42-class limit profile of its construction is
computed and classes attaining the claimed value are kept as candidates.
Structural filters taken from the constructions' proofs narrow them down,
and since distinct rows target distinct reversal orbits, orbits fixed by
one row are removed from the others until nothing changes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Optional

from ..builtin import builtin_table
from ..catalog import ROWS_FILE, catalog4
from ..graphs import OrientedGraph
from .limits import limit_profile

TOLERANCE = 1e-3


def _degree_signature(H: OrientedGraph) -> bool:
    """Exactly two vertices with outdegree, indegree and nondegree all 1."""
    out, inn, non = H.out_degrees(), H.in_degrees(), H.nondegrees()
    return sum(1 for v in range(4) if out[v] == inn[v] == non[v] == 1) == 2


def _path_with_open_ends(H: OrientedGraph) -> bool:
    """A directed path v->x->y->z whose ends are non-adjacent."""
    for v, x, y, z in permutations(range(4)):
        if H.has_arc(v, x) and H.has_arc(x, y) and H.has_arc(y, z) and H.state(v, z) == 0:
            return True
    return False


def _dominating_pair(H: OrientedGraph) -> bool:
    """An arc u->w with both ends dominating two non-adjacent vertices."""
    for u, w, a, b in permutations(range(4)):
        if (H.has_arc(u, w) and H.state(a, b) == 0
                and all(H.has_arc(s, t) for s in (u, w) for t in (a, b))):
            return True
    return False


STRUCTURE = {21: _path_with_open_ends, 24: _dominating_pair, 25: _degree_signature}


@dataclass
class RowResolution:
    row: int
    class_id: Optional[int]
    partner_id: Optional[int]
    graph: Optional[str]
    value: float
    candidates: list
    confidence: str    # unique | structure | exclusion | ambiguous

    def to_dict(self) -> dict:
        return asdict(self)


def _matches(profile, claimed, tol: float) -> list[int]:
    if isinstance(claimed, Fraction):
        return [c for c, v in enumerate(profile) if isinstance(v, Fraction) and v == claimed]
    return [c for c, v in enumerate(profile) if abs(float(v) - float(claimed)) <= tol]


def row_resolution(tol: float = TOLERANCE) -> dict[int, RowResolution]:
    cat = catalog4()
    pairing = cat.reversal_pairing
    orbit = {c: min(c, pairing[c]) for c in range(len(cat))}
    cands: dict[int, list[int]] = {}
    how: dict[int, str] = {}
    value: dict[int, float] = {}
    for r in builtin_table():
        profile = limit_profile(r.spec, assume_invariant=r.invariant)
        found = _matches(profile, r.claimed, tol)
        how[r.row] = "unique"
        if r.row in STRUCTURE:
            kept = [c for c in found if STRUCTURE[r.row](cat.graph(c))]
            if len(kept) < len(found):
                how[r.row] = "structure"
            found = kept
        cands[r.row] = found
        value[r.row] = float(profile[found[0]]) if found else float("nan")

    def orbits_of(cs):
        return {orbit[c] for c in cs}

    # a row whose candidates span one orbit owns it; others drop that orbit
    changed = True
    while changed:
        changed = False
        owned = {next(iter(orbits_of(cs))): row for row, cs in cands.items() if len(orbits_of(cs)) == 1}
        for row, cs in cands.items():
            if len(orbits_of(cs)) <= 1:
                continue
            kept = [c for c in cs if owned.get(orbit[c], row) == row]
            if kept and len(kept) < len(cs):
                cands[row] = kept
                how[row] = "exclusion"
                changed = True

    out = {}
    for row, cs in sorted(cands.items()):
        if len(orbits_of(cs)) == 1:
            cid = min(cs)
            out[row] = RowResolution(row, cid, pairing[cid], cat.string(cid), value[row], cs, how[row])
        else:
            out[row] = RowResolution(row, None, None, None, value[row], cs, "ambiguous")
    return out


def write_mapping(path=None, resolved: Optional[dict] = None) -> Path:
    """Write the row -> class file that catalog4 loads."""
    resolved = row_resolution() if resolved is None else resolved
    if path is None:
        path = Path(__file__).resolve().parent.parent / "data" / ROWS_FILE
    path = Path(path)
    rows = {str(k): {"class_id": v.class_id, "partner_id": v.partner_id, "graph": v.graph,
                     "candidates": v.candidates, "confidence": v.confidence}
            for k, v in resolved.items()}
    path.write_text(json.dumps({"rows": rows}, indent=1) + "\n")
    return path
