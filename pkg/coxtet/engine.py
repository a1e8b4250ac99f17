"""
Inductive gluing search for first-type decompositions, certification and type classification.
"""

import itertools
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.errors import (CertificationError, ClassificationError, DomainError, GlueRejection,
                           RejectReason, StructuralError)
from coxtet.geometry import angle_add, face_angle, face_angles, is_hyperbolic
from coxtet.models import (AngleFrac, CatalogEntry, CertificationReport, DecomposedTet,
                           DecompositionType, FaceTrace, Geometry, Provenance, SumKind, TetShape,
                           TriangleDecomp)
from coxtet.realization import (canonical_decomposition, certify_placements, complete_frame,
                                container_facets, facets_on, frame_isometry, frame_of, is_isometry,
                                klein_points, non_fundamental_edges, on_plane, points_match,
                                reflection, tile_klein)
from coxtet.volume import regular_ideal_volume, tet_volume

logger = logging.getLogger(__name__)

FACE_ANGLE_TOL = 1e-9
VOLUME_ADDITIVITY_TOL = 1e-8
SUP_VOLUME = float(regular_ideal_volume())


def matchings(p: int, q: int) -> List[Tuple[int, ...]]:
    """Face correspondences sigma (sigma[j] = face of the second tetrahedron) with sigma[p] = q."""
    return [perm for perm in itertools.permutations(range(4)) if perm[p] == q]


@lru_cache(maxsize=4096)
def _face_angle_table(shape: TetShape) -> Tuple[Tuple[Optional[float], ...], ...]:
    return tuple(tuple(None if f == v else face_angle(shape, f, v) for v in range(4)) for f in range(4))


@dataclass
class SearchStats:
    """Counters collected while closing a family under gluing."""
    rounds: int = 0
    attempts: int = 0
    accepted: int = 0
    duplicates: int = 0
    rejected: Counter = field(default_factory=Counter)
    frontier_sizes: List[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "attempts": self.attempts,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "rejected": {reason.value: self.rejected[reason] for reason in RejectReason},
            "frontier_sizes": list(self.frontier_sizes),
        }


@dataclass
class SearchResult:
    """All first-type decompositions of one fundamental tetrahedron, seed first."""
    fundamental: CatalogEntry
    decompositions: List[DecomposedTet]
    stats: SearchStats

    def __post_init__(self):
        self.index: Dict[str, int] = {d.key: i for i, d in enumerate(self.decompositions)}

    @property
    def nontrivial(self) -> List[DecomposedTet]:
        return [d for d in self.decompositions if not d.is_seed]

    @property
    def keys(self) -> Set[str]:
        return set(self.index)

    def tuple_line(self, d: DecomposedTet) -> str:
        """The "(k,l ; m,n,p,q)" line of a decomposition, numbered by this result."""
        if d.is_seed:
            return f"({d.tiles},{d.depth})"
        m, n = (self.index[parent] for parent in d.provenance.parents)
        p, q = d.provenance.faces
        return f"({d.tiles},{d.depth} ; {m},{n},{p},{q})"


def _order(d: DecomposedTet) -> Tuple[int, int, str]:
    return (d.tiles, d.depth, d.key)


def _preference(d: DecomposedTet) -> tuple:
    return (d.provenance.parents, d.provenance.faces, d.provenance.matching)


class DecompositionEngine:
    """Builds first-type decompositions by gluing and checks them geometrically."""

    def __init__(self, catalog: CoxeterCatalog, config: Optional[EngineConfig] = None):
        """
        Initialize the engine.

        Args:
            catalog: Catalog providing the fundamental tetrahedra
            config: Engine configuration; defaults to the catalog's
        """
        self.catalog = catalog
        self.config = config or catalog.config

    def seed(self, F: CatalogEntry) -> DecomposedTet:
        """The trivial decomposition of F by itself."""
        base = frame_of(F.diagram)
        key, shape, placements = canonical_decomposition(F.diagram, F.id, [np.eye(4)], base)
        return DecomposedTet(shape=shape, fundamental=F.id, tiles=1, depth=2,
                             provenance=Provenance(kind="seed", parents=(F.id,)),
                             key=key, placements=placements)

    def glue(self, d1: DecomposedTet, p: int, d2: DecomposedTet, q: int,
             matching: Sequence[int], max_tiles: Optional[int] = None) -> DecomposedTet:
        """
        Glue face p of d1 to face q of d2.

        Args:
            d1, d2: Decompositions with the same fundamental tetrahedron
            p, q: Glued faces
            matching: matching[j] is the face of d2 meeting face j of d1 along
                the glued face; matching[p] must be q
            max_tiles: Tile cap; defaults to the configured one

        Returns:
            The glued decomposition, canonically relabeled

        Raises:
            GlueRejection: naming the first failed condition
            StructuralError: for mismatched fundamentals or a malformed matching
        """
        sigma = tuple(matching)
        if d1.fundamental != d2.fundamental:
            raise StructuralError("glued decompositions must share the fundamental tetrahedron")
        if sorted(sigma) != [0, 1, 2, 3] or sigma[p] != q:
            raise StructuralError(f"matching {sigma} does not send face {p} to face {q}")

        F = self.catalog.lookup(d1.fundamental)
        tiles = d1.tiles + d2.tiles
        cap = max_tiles or self.config.max_tiles
        if tiles > cap or tiles * F.volume > SUP_VOLUME + 1e-9:
            raise GlueRejection(RejectReason.PRUNED, f"{tiles} tiles exceed the volume bound or cap")

        s1, s2 = d1.shape, d2.shape
        others = [j for j in range(4) if j != p]
        table1, table2 = _face_angle_table(s1), _face_angle_table(s2)
        for j in others:
            if abs(table1[p][j] - table2[q][sigma[j]]) > FACE_ANGLE_TOL:
                raise GlueRejection(RejectReason.C1, f"face {p} and face {q} are not congruent")

        sums = {j: angle_add(s1.angle(p, j), s2.angle(q, sigma[j])) for j in others}
        flat = [j for j in others if sums[j] == SumKind.FLAT]
        if len(flat) != 2:
            raise GlueRejection(RejectReason.C2, f"{len(flat)} flattened edges instead of 2")
        j1, j2 = flat
        (j3,) = [j for j in others if j not in flat]
        if s1.angle(j1, j2) != s2.angle(sigma[j1], sigma[j2]):
            raise GlueRejection(RejectReason.C3, "apex edges do not fuse into one straight edge")
        if not isinstance(sums[j3], AngleFrac):
            raise GlueRejection(RejectReason.C4, f"new dihedral angle is {sums[j3].value}")

        shape = TetShape.from_mapping({
            (j1, j2): s1.angle(j1, j2),
            (j1, j3): s1.angle(j1, j3),
            (j2, j3): s1.angle(j2, j3),
            (p, j1): s2.angle(sigma[j3], sigma[j1]),
            (p, j2): s2.angle(sigma[j3], sigma[j2]),
            (p, j3): sums[j3],
        })
        if not is_hyperbolic(shape, self.config.tol_signature):
            raise GlueRejection(RejectReason.C5, "glued shape is not a hyperbolic tetrahedron")

        placements = self._placements(d1, p, d2, q, sigma, (j1, j2, j3), shape)
        volume = float(tet_volume(shape, self.config.dps).value)
        parts = float(tet_volume(s1, self.config.dps).value) + float(tet_volume(s2, self.config.dps).value)
        if abs(volume - parts) > VOLUME_ADDITIVITY_TOL:
            logger.warning("volume not additive when gluing %s and %s: %.3e", d1.key, d2.key, volume - parts)
            raise GlueRejection(RejectReason.C5, "volume is not additive")

        base = frame_of(F.diagram)
        key, shape, placements = canonical_decomposition(shape, F.id, placements, base)
        return DecomposedTet(shape=shape, fundamental=F.id, tiles=tiles,
                             depth=1 + max(d1.depth, d2.depth),
                             provenance=Provenance(kind="glue", parents=(d1.key, d2.key),
                                                   faces=(p, q), matching=sigma),
                             key=key, placements=placements)

    def _placements(self, d1: DecomposedTet, p: int, d2: DecomposedTet, q: int,
                    sigma: Tuple[int, ...], flat: Tuple[int, int, int],
                    shape: TetShape) -> List[np.ndarray]:
        """Place d2 against face p of d1 and express every tile in the frame of `shape`."""
        tol = self.config.tol_geometry
        j1, j2, j3 = flat
        frame1, frame2 = frame_of(d1.shape), frame_of(d2.shape)
        base = frame_of(self.catalog.lookup(d1.fundamental).diagram)
        n = frame1.normals

        targets = {q: -n[:, p], sigma[j1]: n[:, j1], sigma[j2]: n[:, j2]}
        try:
            fourth = complete_frame(targets, sigma[j3], d2.shape.gram, frame1.vertices[:, j3],
                                    frame1.ideal[j3], tol)
        except DomainError as exc:
            raise GlueRejection(RejectReason.C1, f"second tetrahedron cannot be placed: {exc}")
        images = np.zeros((4, 4))
        for face, normal in targets.items():
            images[:, face] = normal
        images[:, sigma[j3]] = fourth
        motion = frame_isometry(frame2.normals, images)
        if not is_isometry(motion, tol):
            raise GlueRejection(RejectReason.C1, "placement of the second tetrahedron is not an isometry")

        placed_vertices = klein_points(motion @ frame2.vertices)
        for j in (j1, j2, j3):
            if np.abs(placed_vertices[sigma[j]] - frame1.klein[j]).max() > tol:
                raise GlueRejection(RejectReason.C1, "glued faces do not coincide")

        mirror = reflection(n[:, p])
        first = [mirror @ placement for placement in d1.placements
                 if facets_on(placement, base, n[:, p], tol)]
        placed = [motion @ placement for placement in d2.placements]
        second = [placement for placement in placed if facets_on(placement, base, -n[:, p], tol)]
        if len(first) != len(second):
            raise GlueRejection(RejectReason.C1, "face traces have different tile counts")
        second_klein = [tile_klein(placement, base) for placement in second]
        for placement in first:
            klein = tile_klein(placement, base)
            if not any(points_match(klein, other, tol) for other in second_klein):
                raise GlueRejection(RejectReason.C1, "face traces are not mirror images")

        columns = np.zeros((4, 4))
        columns[:, j1], columns[:, j2], columns[:, j3] = n[:, j1], n[:, j2], n[:, j3]
        columns[:, p] = fourth
        to_new = frame_isometry(columns, frame_of(shape).normals)
        if not is_isometry(to_new, tol):
            raise GlueRejection(RejectReason.C5, "realized union disagrees with the glued angles")
        return [to_new @ placement for placement in d1.placements] + [to_new @ placement for placement in placed]

    def search_first_type(self, F: CatalogEntry, max_tiles: Optional[int] = None,
                          shuffle_seed: Optional[int] = None) -> SearchResult:
        """
        Close the seed of F under gluing.

        Args:
            F: Fundamental tetrahedron
            max_tiles: Tile cap; defaults to the configured one
            shuffle_seed: If given, candidate pairs are visited in a shuffled order

        Returns:
            SearchResult sorted by (tiles, depth, key), seed first
        """
        stats = SearchStats()
        seed = self.seed(F)
        found: Dict[str, DecomposedTet] = {seed.key: seed}
        frontier = [seed]
        while frontier:
            stats.rounds += 1
            stats.frontier_sizes.append(len(frontier))
            fresh = {d.key for d in frontier}
            known = sorted(found.values(), key=_order)
            pairs = [(a, b) for i, a in enumerate(known) for b in known[i:]
                     if a.key in fresh or b.key in fresh]
            if shuffle_seed is not None:
                random.Random(shuffle_seed + stats.rounds).shuffle(pairs)

            candidates: Dict[str, DecomposedTet] = {}
            for d1, d2 in pairs:
                for result in self._glue_all(d1, d2, stats, max_tiles):
                    if result.key in found:
                        stats.duplicates += 1
                        continue
                    current = candidates.get(result.key)
                    if current is None or _preference(result) < _preference(current):
                        candidates[result.key] = result
            frontier = sorted(candidates.values(), key=_order)
            found.update(candidates)
            stats.accepted += len(frontier)
            logger.info("%s round %d: %d pairs, %d new, rejections %s", F.id, stats.rounds,
                        len(pairs), len(frontier), dict(stats.rejected))

        decompositions = sorted(found.values(), key=_order)
        return SearchResult(fundamental=F, decompositions=decompositions, stats=stats)

    def _glue_all(self, d1: DecomposedTet, d2: DecomposedTet, stats: SearchStats,
                  max_tiles: Optional[int]) -> Iterable[DecomposedTet]:
        for p in range(4):
            for q in range(4):
                for sigma in matchings(p, q):
                    stats.attempts += 1
                    try:
                        yield self.glue(d1, p, d2, q, sigma, max_tiles)
                    except GlueRejection as rejection:
                        stats.rejected[rejection.reason] += 1

    def realize_and_certify(self, d: DecomposedTet) -> CertificationReport:
        """
        Certify a decomposition from its tile placements.

        Raises:
            CertificationError: if the decomposition carries no placements
        """
        if not d.placements:
            raise CertificationError(f"{d.key} has no tile placements", counterexample={"key": d.key})
        F = self.catalog.lookup(d.fundamental)
        container = float(tet_volume(d.shape, self.config.dps).value)
        return certify_placements(frame_of(d.shape), d.placements, frame_of(F.diagram), container,
                                  F.volume, key=d.key, samples_per_tile=self.config.samples_per_tile,
                                  seed=self.config.seed, tol=self.config.tol_geometry)

    def face_trace(self, d: DecomposedTet, f: int) -> FaceTrace:
        """The decomposition induced on face f, read from the placements."""
        tol = self.config.tol_geometry
        frame = frame_of(d.shape)
        F = self.catalog.lookup(d.fundamental)
        base = frame_of(F.diagram)
        facets = container_facets(frame, d.placements, base, f, tol)
        corners = [v for v in range(4) if v != f]

        corner_tiles, side_patterns = [], []
        for corner in corners:
            point = frame.klein[corner]
            touching = 0
            along = 0
            for tile, facet in facets:
                klein = tile_klein(d.placements[tile], base)
                others = [k for k in range(4) if k != facet]
                if (np.abs(klein[others] - point).max(axis=1) < tol).any():
                    touching += 1
                if on_plane(klein[others], frame.normals[:, corner], tol).sum() >= 2:
                    along += 1
            corner_tiles.append(touching)
            side_patterns.append(along)

        triangle = face_angles(d.shape, f)
        fundamental = face_angles(F.diagram, facets[0][1]) if facets else triangle
        trace = TriangleDecomp(geometry=Geometry.HYPERBOLIC, outer=triangle, fundamental=fundamental,
                               tiles=len(facets), side_patterns=tuple(side_patterns),
                               corner_tiles=tuple(corner_tiles))
        return FaceTrace(face=f, triangle=triangle, trace=trace)

    def face_traces(self, d: DecomposedTet) -> Tuple[FaceTrace, ...]:
        return tuple(self.face_trace(d, f) for f in range(4))

    def classify_type(self, d: DecomposedTet, first_type_keys: Set[str]) -> DecompositionType:
        """
        First if the gluing closure produced d, Second if every container angle is fundamental.

        Raises:
            ClassificationError: if neither holds (a third-type decomposition)
        """
        if d.key in first_type_keys:
            return DecompositionType.FIRST
        F = self.catalog.lookup(d.fundamental)
        flagged = non_fundamental_edges(frame_of(d.shape), d.placements, frame_of(F.diagram),
                                        self.config.tol_geometry)
        if not flagged:
            return DecompositionType.SECOND
        raise ClassificationError(f"third-type decomposition {d.key}: mirrors through edges {flagged}")
