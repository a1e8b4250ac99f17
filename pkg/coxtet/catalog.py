"""
Enumeration, canonicalization and naming of the hyperbolic Coxeter tetrahedra.
"""

import itertools
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Tuple

from coxtet.config import EngineConfig
from coxtet.errors import ClassificationError, DomainError
from coxtet.geometry import is_hyperbolic, triangle_geometry
from coxtet.models import PAIRS, AngleFrac, CatalogEntry, Geometry, TetShape, VertexType
from coxtet.volume import tet_volume

logger = logging.getLogger(__name__)

PERMUTATIONS: Tuple[Tuple[int, ...], ...] = tuple(itertools.permutations(range(4)))

# Labels above this never occur in a hyperbolic Coxeter tetrahedron.
KNOWN_MAX_LABEL = 6

_TRIANGLE_A2 = (AngleFrac.coxeter(3),) * 3


class Subdiagram(NamedTuple):
    """The rank-3 subdiagram left after deleting one node."""
    node: int
    angles: Tuple[AngleFrac, AngleFrac, AngleFrac]
    geometry: Geometry


def canonical_form(t: TetShape) -> Tuple[str, Tuple[int, ...]]:
    """
    Canonical key of a shape and a relabeling that produces it.

    The key is the lexicographically smallest angle encoding over all 24 face
    relabelings; among minimizing relabelings the smallest permutation wins.

    Returns:
        (key, perm) where t.relabel(perm) has the minimal encoding
    """
    best_encoding, best_perm = None, None
    for perm in PERMUTATIONS:
        encoding = t.relabel(perm).encoding
        if best_encoding is None or encoding < best_encoding:
            best_encoding, best_perm = encoding, perm
    key = ",".join(AngleFrac.from_fraction(value).label for value in best_encoding)
    return key, best_perm


def canonical_shape(t: TetShape) -> TetShape:
    return t.relabel(canonical_form(t)[1])


def subdiagram_triangles(t: TetShape) -> List[Subdiagram]:
    """Triangles of the four rank-3 subdiagrams, one per deleted node."""
    return [Subdiagram(v, t.link_angles(v), triangle_geometry(t.link_angles(v))) for v in range(4)]


def has_triangle_subdiagram(t: TetShape) -> bool:
    """True when some rank-3 subdiagram is the cycle of three pi/3 angles."""
    return any(sorted(sub.angles, key=lambda a: a.fraction) == list(_TRIANGLE_A2)
               for sub in subdiagram_triangles(t))


def _links_admissible(labels: Tuple[int, ...]) -> bool:
    # every vertex link must be spherical or Euclidean: 1/p + 1/q + 1/r >= 1
    p01, p02, p03, p12, p13, p23 = labels
    for p, q, r in ((p12, p13, p23), (p02, p03, p23), (p01, p03, p13), (p01, p02, p12)):
        if q * r + p * r + p * q < p * q * r:
            return False
    return True


def _scan_first_label(first: int, max_label: int, tol: float) -> List[Tuple[int, ...]]:
    """Hyperbolic label tuples whose {0,1} label is `first`, canonical ones only."""
    found = set()
    for rest in itertools.product(range(2, max_label + 1), repeat=5):
        labels = (first,) + rest
        if not _links_admissible(labels):
            continue
        shape = TetShape(tuple(AngleFrac.coxeter(m) for m in labels))
        if not is_hyperbolic(shape, tol):
            continue
        canonical = canonical_shape(shape)
        found.add(tuple(angle.den for angle in canonical.angles))
    return sorted(found)


def enumerate_coxeter_tetrahedra(max_label: int = 10, *, tol: float = 1e-9, jobs: int = 1,
                                 dps: int = 64) -> List[CatalogEntry]:
    """
    Every hyperbolic Coxeter tetrahedron with labels up to max_label.

    Args:
        max_label: Largest label m (angle pi/m) tried; at least 6
        tol: Zero-eigenvalue tolerance of the signature test
        jobs: Worker processes used for the label scan
        dps: Working precision of the volume computation

    Returns:
        Entries sorted compact first, then by volume, named H_1, H_2, ...

    Raises:
        ClassificationError: if a label above 6 ever appears
    """
    if max_label < KNOWN_MAX_LABEL:
        raise DomainError(f"max_label must be at least {KNOWN_MAX_LABEL}")
    firsts = list(range(2, max_label + 1))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_scan_first_label, firsts,
                                    [max_label] * len(firsts), [tol] * len(firsts)))
    else:
        batches = [_scan_first_label(first, max_label, tol) for first in firsts]
    canonical = sorted(set(itertools.chain.from_iterable(batches)))
    logger.info("label scan up to %d: %d canonical hyperbolic diagrams", max_label, len(canonical))

    oversized = [labels for labels in canonical if max(labels) > KNOWN_MAX_LABEL]
    if oversized:
        raise ClassificationError(f"hyperbolic Coxeter tetrahedra with labels above "
                                  f"{KNOWN_MAX_LABEL}: {oversized}")

    rows = []
    for labels in canonical:
        shape = TetShape(tuple(AngleFrac.coxeter(m) for m in labels))
        volume = tet_volume(shape, dps)
        compact = all(kind == VertexType.FINITE for kind in shape.vertex_class)
        rows.append((shape, compact, float(volume.value), volume.err, canonical_form(shape)[0]))
    rows.sort(key=lambda row: (not row[1], round(row[2], 12), row[4]))
    return [CatalogEntry(id=f"H_{index}", diagram=shape, compact=compact, volume=volume,
                         canonical_key=key, volume_err=err)
            for index, (shape, compact, volume, err, key) in enumerate(rows, start=1)]


class CoxeterCatalog:
    """The named list of hyperbolic Coxeter tetrahedra with lookups."""

    def __init__(self, config: Optional[EngineConfig] = None,
                 entries: Optional[List[CatalogEntry]] = None):
        """
        Build or wrap a catalog.

        Args:
            config: Engine configuration; defaults to EngineConfig.from_env()
            entries: Precomputed entries (e.g. from the cache); enumerated if omitted
        """
        self.config = config or EngineConfig.from_env()
        if entries is None:
            entries = enumerate_coxeter_tetrahedra(self.config.max_label, tol=self.config.tol_signature,
                                                   jobs=self.config.jobs, dps=self.config.dps)
        self.entries: List[CatalogEntry] = list(entries)
        self._by_id: Dict[str, CatalogEntry] = {entry.id: entry for entry in self.entries}
        self._by_key: Dict[str, CatalogEntry] = {entry.canonical_key: entry for entry in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def compact(self) -> List[CatalogEntry]:
        return [entry for entry in self.entries if entry.compact]

    @property
    def noncompact(self) -> List[CatalogEntry]:
        return [entry for entry in self.entries if not entry.compact]

    def by_shape(self, t: TetShape) -> Optional[CatalogEntry]:
        """Entry whose diagram is isomorphic to t, if any."""
        return self._by_key.get(canonical_form(t)[0])

    def lookup(self, query) -> CatalogEntry:
        """
        Resolve an H-id, a canonical key, diagram text or a TetShape.

        Raises:
            DomainError: if nothing in the catalog matches
        """
        if isinstance(query, TetShape):
            entry = self.by_shape(query)
        elif re.fullmatch(r"H_\d+", query.strip()):
            entry = self._by_id.get(query.strip())
        elif query.strip() in self._by_key:
            entry = self._by_key[query.strip()]
        else:
            from coxtet.diagrams import parse_diagram
            entry = self.by_shape(parse_diagram(query))
        if entry is None:
            raise DomainError(f"{query} is not a hyperbolic Coxeter tetrahedron of the catalog")
        return entry

    def records(self) -> List[dict]:
        """JSON-ready catalog export."""
        return [
            {
                "id": entry.id,
                "angles": {f"{i}{j}": f"{entry.diagram.angle(i, j).num}/{entry.diagram.angle(i, j).den}"
                           for i, j in PAIRS},
                "compact": entry.compact,
                "volume": entry.volume,
                "volume_err": entry.volume_err,
                "canonical_key": entry.canonical_key,
            }
            for entry in self.entries
        ]

    @classmethod
    def from_records(cls, records: List[dict], config: Optional[EngineConfig] = None) -> "CoxeterCatalog":
        """Rebuild a catalog from records() output."""
        entries = []
        for record in records:
            mapping = {}
            for pair, text in record["angles"].items():
                num, den = (int(part) for part in text.split("/"))
                mapping[(int(pair[0]), int(pair[1]))] = AngleFrac(num, den)
            entries.append(CatalogEntry(id=record["id"], diagram=TetShape.from_mapping(mapping),
                                        compact=record["compact"], volume=record["volume"],
                                        canonical_key=record["canonical_key"],
                                        volume_err=record.get("volume_err", 0.0)))
        return cls(config=config, entries=entries)
