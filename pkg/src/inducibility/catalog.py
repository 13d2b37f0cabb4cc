"""The 42 isomorphism classes of oriented graphs on four vertices."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .graphs import (
    GraphClass,
    OrientedGraph,
    canonical_codes,
    enumerate_classes,
    format_graph,
    parse_graph,
    reverse,
)

ROWS_FILE = "table1_rows.json"


@dataclass(frozen=True)
class Catalog4:
    classes: tuple[GraphClass, ...]
    reversal_pairing: tuple[int, ...]
    pattern_lut: np.ndarray = field(repr=False)
    rows: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.classes)

    def class_id(self, H: OrientedGraph) -> int:
        if H.n != 4:
            raise ValueError(f"catalog classes live on 4 vertices, got n={H.n}")
        return int(self.pattern_lut[H.code()])

    def resolve(self, H) -> int:
        """Class id from an id, a graph string or an OrientedGraph."""
        if isinstance(H, (int, np.integer)):
            if not 0 <= H < len(self.classes):
                raise ValueError(f"class id {H} out of range")
            return int(H)
        if isinstance(H, str):
            H = parse_graph(H)
        return self.class_id(H)

    def graph(self, cid: int) -> OrientedGraph:
        return self.classes[cid].canon

    def string(self, cid: int) -> str:
        return format_graph(self.classes[cid].canon)

    def orbits(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for c, r in enumerate(self.reversal_pairing):
            if c not in seen:
                orb = tuple(sorted({c, r}))
                seen.update(orb)
                out.append(orb)
        return out

    def row_class(self, row: int) -> int | None:
        """Class id of a summary-table row's target graph, if resolved."""
        entry = self.rows.get(str(row))
        return None if entry is None else entry.get("class_id")

    def tournament_ids(self) -> list[int]:
        return [c.id for c in self.classes if c.canon.is_tournament()]


def _load_rows() -> dict:
    try:
        text = resources.files("inducibility").joinpath("data", ROWS_FILE).read_text()
    except (FileNotFoundError, OSError):
        return {}
    return json.loads(text).get("rows", {})


@lru_cache(maxsize=1)
def catalog4() -> Catalog4:
    classes = tuple(enumerate_classes(4))
    code_to_id = {c.canon.code(): c.id for c in classes}

    pats = np.array([OrientedGraph.from_code(4, c).state_matrix() for c in range(729)])
    canon, _ = canonical_codes(pats)
    lut = np.array([code_to_id[int(c)] for c in canon], dtype=np.int64)
    lut.setflags(write=False)

    pairing = tuple(int(lut[reverse(c.canon).code()]) for c in classes)
    return Catalog4(classes, pairing, lut, _load_rows())
