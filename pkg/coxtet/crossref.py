"""
Named tetrahedra and first-type family seeds, identified by diagram.

Catalog ids are assigned by our own ordering; the names used in the classical
case analysis (H_1, H_3, H_10, ...) are resolved here through their diagrams.
Family seeds keep their faces numbered from left to right along the drawn
diagram; `face_order` gives the relabeling into canonical order.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

from coxtet.catalog import CoxeterCatalog, canonical_form
from coxtet.errors import DomainError
from coxtet.models import CatalogEntry, TetShape


def _shape(labels: Mapping[Tuple[int, int], int]) -> TetShape:
    return TetShape.from_labels(labels)


def _linear(p: int, q: int, r: int) -> TetShape:
    return _shape({(0, 1): p, (1, 2): q, (2, 3): r})


def _pendant_triangle(k: int) -> TetShape:
    # face 0 hangs off a triangle 1-2-3 of pi/3 angles
    return _shape({(0, 1): k, (1, 2): 3, (1, 3): 3, (2, 3): 3})


ACTORS: Dict[str, TetShape] = {
    "H_1": _linear(5, 3, 4),
    "H_3": _shape({(0, 1): 5, (1, 2): 3, (1, 3): 3}),
    "H_10": _linear(3, 3, 6),
    "H_11": _linear(3, 4, 4),
    "H_12": _pendant_triangle(3),
    "H_17": _pendant_triangle(4),
    "H_22": _pendant_triangle(5),
    "H_24": _shape({(0, 1): 3, (0, 2): 3, (0, 3): 3, (1, 2): 3, (1, 3): 3}),
    "H_26": _pendant_triangle(6),
    "H_31": _shape({(0, 1): 4, (1, 2): 4, (2, 3): 4, (0, 3): 4}),
    "H_32": _shape({pair: 3 for pair in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))}),
}


@dataclass(frozen=True)
class FamilySeed:
    """Fundamental tetrahedron heading one first-type table family."""
    name: str
    diagram: TetShape
    bounded: bool

    @property
    def face_order(self) -> Tuple[int, ...]:
        """perm with canonical face i = drawn face perm[i]."""
        return canonical_form(self.diagram)[1]


_BOUNDED = [
    _linear(5, 3, 4),
    _linear(3, 5, 3),
    _shape({(0, 1): 5, (0, 2): 3, (0, 3): 3}),
    _linear(5, 3, 5),
]

_UNBOUNDED = [
    _linear(3, 3, 6),
    _linear(3, 4, 4),
    _pendant_triangle(3),
    _linear(4, 3, 6),
    _shape({(0, 1): 3, (1, 2): 4, (1, 3): 4}),
    _linear(3, 6, 3),
    _linear(5, 3, 6),
    _pendant_triangle(4),
    _shape({(0, 1): 6, (0, 2): 3, (0, 3): 3}),
    _linear(4, 4, 4),
    _linear(6, 3, 6),
    _pendant_triangle(5),
    _shape({(0, 1): 4, (1, 2): 4, (1, 3): 4}),
    _pendant_triangle(6),
]

FAMILIES: Dict[str, FamilySeed] = {}
for _index, _diagram in enumerate(_BOUNDED, start=1):
    FAMILIES[f"bounded:{_index}"] = FamilySeed(f"bounded:{_index}", _diagram, True)
for _index, _diagram in enumerate(_UNBOUNDED, start=1):
    FAMILIES[f"unbounded:{_index}"] = FamilySeed(f"unbounded:{_index}", _diagram, False)


def family(name: str) -> FamilySeed:
    """
    Look up a family seed by "bounded:i" or "unbounded:i".

    Raises:
        DomainError: for unknown names
    """
    try:
        return FAMILIES[name.strip().lower()]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; expected bounded:1-4 or unbounded:1-14")


def resolve_actor(catalog: CoxeterCatalog, name: str) -> CatalogEntry:
    """Catalog entry carrying the classical name `name`."""
    if name not in ACTORS:
        raise DomainError(f"no diagram recorded for {name}")
    return catalog.lookup(ACTORS[name])


def actor_table(catalog: CoxeterCatalog) -> List[Tuple[str, str, str]]:
    """Rows (classical name, catalog id, canonical key) for every named tetrahedron."""
    rows = []
    for name in sorted(ACTORS, key=lambda n: int(n.split("_")[1])):
        entry = resolve_actor(catalog, name)
        rows.append((name, entry.id, entry.canonical_key))
    return rows
