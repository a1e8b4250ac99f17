"""
Second-type decompositions: candidate filtering and constructive tessellation checks.

A pair (F, P) is a candidate when Vol(P)/Vol(F) is an integer N >= 2 and both
are compact or both non-compact. Counting filters eliminate candidates with a
quoted reason; independently every candidate is tested by trying to tessellate
P with reflected copies of F.
"""

import itertools
import logging
import math
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.crossref import resolve_actor
from coxtet.engine import DecompositionEngine
from coxtet.errors import CertificationError, ClassificationError
from coxtet.models import (PAIRS, CandidatePair, CatalogEntry, CertificationReport, DecomposedTet,
                           DecompositionType, FilterVerdict, Geometry, Provenance, VertexType)
from coxtet.realization import (J, canonical_decomposition, frame_of, non_fundamental_edges, reflection,
                                seat_tile, tile_klein, tile_normals, tile_signature, unit)
from coxtet.triangles import (arrangement_for, same_triangle, triangle_decomposition_exists)
from coxtet.volume import integral_pairs

logger = logging.getLogger(__name__)

FILTER_ORDER = ("volume", "two_tile", "subdiagram", "vertex_links", "ideal_count",
                "unique_ideal", "edge_multiplication", "three_planes")

# all vertices fundamental forces at least 2^3 tiles
ALL_FUNDAMENTAL_MIN_TILES = 8


@dataclass
class LinkOptions:
    """How the link of one vertex of P can sit in a decomposition by F."""
    vertex: int
    ideal: bool
    fundamental: bool
    decomposed: List[Tuple[int, int]] = field(default_factory=list)  # (tiles n, vertex w of F)

    @property
    def empty(self) -> bool:
        return not self.fundamental and not self.decomposed

    @property
    def counts(self) -> List[int]:
        return ([1] if self.fundamental else []) + [n for n, _ in self.decomposed]


@dataclass
class SecondTypeReport:
    """Everything the second-type analysis produced."""
    candidates: List[CandidatePair]
    decompositions: List[DecomposedTet]
    certificates: List[CertificationReport]
    failures: Dict[str, dict]


def _geometry(kind: VertexType) -> Geometry:
    return Geometry.SPHERICAL if kind == VertexType.FINITE else Geometry.EUCLIDEAN


def _radians(angles) -> Tuple[float, float, float]:
    return tuple(angle.radians for angle in angles)


def _inside(frame, points: np.ndarray, tol: float) -> bool:
    lifted = np.hstack([points, np.ones((len(points), 1))])
    return bool((lifted @ J @ frame.normals <= tol).all())


def _on_container_face(frame, normal: np.ndarray, tol: float) -> bool:
    return any(np.allclose(unit(normal), unit(frame.normals[:, f]), atol=tol) for f in range(4))


def _expand(frame, base, start: np.ndarray, ratio: int, tol: float) -> Tuple[Optional[List[np.ndarray]], int]:
    """Reflect a seated tile across every facet not on the container; None when it leaves P."""
    if not _inside(frame, tile_klein(start, base), tol):
        return None, 0
    tiles = [start]
    seen = {tile_signature(start, base)}
    queue = deque([start])
    while queue:
        placement = queue.popleft()
        normals = tile_normals(placement, base)
        for facet in range(4):
            if _on_container_face(frame, normals[:, facet], tol):
                continue
            image = reflection(normals[:, facet]) @ placement
            signature = tile_signature(image, base)
            if signature in seen:
                continue
            if not _inside(frame, tile_klein(image, base).mean(axis=0, keepdims=True), tol):
                return None, len(tiles)
            seen.add(signature)
            tiles.append(image)
            queue.append(image)
            if len(tiles) > ratio:
                return None, len(tiles)
    return tiles, len(tiles)


def tessellate(F: CatalogEntry, P: CatalogEntry, ratio: int, tol: float = 1e-8) -> DecomposedTet:
    """
    Tessellate P by copies of F, trying every seating of a first tile at an edge of P.

    Args:
        F: Fundamental tetrahedron
        P: Container
        ratio: Vol(P)/Vol(F)
        tol: Geometric tolerance

    Returns:
        The decomposition, canonically labeled

    Raises:
        CertificationError: if no seating expands to a second-type partition of P
    """
    frame, base = frame_of(P.diagram), frame_of(F.diagram)
    attempts, best = 0, 0
    for a, b in PAIRS:
        angle = P.diagram.angle(a, b)
        ends = [u for u in range(4) if u not in (a, b)]
        for i, j in (pair for pair in PAIRS if F.diagram.angle(*pair) == angle):
            for u in ends:
                for k in (k for k in range(4) if k not in (i, j)):
                    if F.diagram.vertex_class[k] != P.diagram.vertex_class[u]:
                        continue
                    for edge, root in itertools.product(((i, j), (j, i)), (0, 1)):
                        start = seat_tile(frame, base, (a, b), u, edge, k, root, tol)
                        if start is None:
                            continue
                        attempts += 1
                        tiles, reached = _expand(frame, base, start, ratio, tol)
                        best = max(best, reached if tiles is None else len(tiles))
                        if tiles is None or len(tiles) != ratio:
                            continue
                        if not all(_inside(frame, tile_klein(tile, base), tol * 10) for tile in tiles):
                            continue
                        if non_fundamental_edges(frame, tiles, base, tol):
                            continue
                        key, shape, placements = canonical_decomposition(P.diagram, F.id, tiles, base)
                        logger.info("%s tessellates %s with %d tiles (seating %d)", F.id, P.id, ratio, attempts)
                        return DecomposedTet(
                            shape=shape, fundamental=F.id, tiles=ratio, depth=0,
                            provenance=Provenance(kind="tessellation", parents=(F.id, P.id),
                                                  note=f"seated on edge {a}{b} at vertex {u}"),
                            key=key, placements=placements)
    raise CertificationError(f"{F.id} does not tessellate {P.id}",
                             counterexample={"F": F.id, "P": P.id, "ratio": ratio,
                                             "seatings": attempts, "best_tiles": best})


def _tessellate_job(job):
    F, P, ratio, tol = job
    try:
        return tessellate(F, P, ratio, tol), None
    except CertificationError as failure:
        return None, failure.counterexample


class SecondTypeAnalyzer:
    """Runs the counting filters and the tessellation checks over the catalog."""

    def __init__(self, catalog: CoxeterCatalog, config: Optional[EngineConfig] = None,
                 engine: Optional[DecompositionEngine] = None):
        self.catalog = catalog
        self.config = config or catalog.config
        self.engine = engine or DecompositionEngine(catalog, self.config)
        self._reports: Dict[Optional[bool], SecondTypeReport] = {}

    def candidate_pairs(self, compact: Optional[bool] = None) -> List[Tuple[CatalogEntry, CatalogEntry, int]]:
        """Integral-ratio pairs with matching compactness, optionally one class only."""
        pairs = integral_pairs(self.catalog.entries, self.config.tol_volume)
        return [(F, P, ratio) for F, P, ratio in pairs
                if F.compact == P.compact and (compact is None or F.compact == compact)]

    # -- links -------------------------------------------------------------

    def link_options(self, F: CatalogEntry, P: CatalogEntry, ratio: int) -> List[LinkOptions]:
        """Per vertex of P: fundamental, and the second-type link decompositions with n <= ratio."""
        options = []
        for v in range(4):
            kind = P.diagram.vertex_class[v]
            outer = _radians(P.diagram.link_angles(v))
            option = LinkOptions(vertex=v, ideal=kind == VertexType.IDEAL, fundamental=False)
            for w in range(4):
                if F.diagram.vertex_class[w] != kind:
                    continue
                inner = _radians(F.diagram.link_angles(w))
                if same_triangle(inner, outer):
                    option.fundamental = True
                arrangement = arrangement_for(_geometry(kind), inner, self.config.triangle_max_tiles)
                for decomposition in arrangement.decompositions(second_type_only=True):
                    if decomposition.tiles <= ratio and same_triangle(decomposition.outer, outer, 1e-7):
                        option.decomposed.append((decomposition.tiles, w))
            option.decomposed = sorted(set(option.decomposed))
            options.append(option)
        return options

    # -- filters -----------------------------------------------------------

    def filter_pair(self, F: CatalogEntry, P: CatalogEntry, ratio: int) -> CandidatePair:
        """Apply every filter in order, stopping at the first elimination."""
        pair = CandidatePair(F=F.id, P=P.id, ratio=ratio, compact=F.compact)
        pair.filters.append(FilterVerdict("volume", True, f"Vol(P)/Vol(F) = {ratio}", {"ratio": ratio}))
        if ratio == 2:
            pair.filters.append(FilterVerdict("two_tile", False,
                                              "a decomposition with N = 2 has a non-fundamental angle"))
            return pair
        pair.filters.append(FilterVerdict("two_tile", True, "N > 2"))

        checks = (self._subdiagram, self._vertex_links, self._ideal_count, self._unique_ideal,
                  self._edge_multiplication, self._three_planes)
        options = self.link_options(F, P, ratio)
        for check in checks:
            verdict = check(F, P, ratio, options)
            pair.filters.append(verdict)
            if not verdict.passed:
                break
        return pair

    def _subdiagram(self, F, P, ratio, options) -> FilterVerdict:
        for v in range(4):
            outer = _radians(P.diagram.link_angles(v))
            fits = False
            for w in range(4):
                inner = _radians(F.diagram.link_angles(w))
                if P.diagram.vertex_class[v] != F.diagram.vertex_class[w]:
                    continue
                if triangle_decomposition_exists(inner, outer, True, self.config.triangle_max_tiles):
                    fits = True
                    break
            if not fits:
                return FilterVerdict("subdiagram", False,
                                     f"subdiagram without node {v} is neither a subdiagram of F "
                                     f"nor decomposable by one", {"vertex": v})
        return FilterVerdict("subdiagram", True, "every subdiagram of P is matched in F")

    def _vertex_links(self, F, P, ratio, options) -> FilterVerdict:
        for option in options:
            if option.empty:
                return FilterVerdict("vertex_links", False,
                                     f"vertex {option.vertex} has no admissible link decomposition",
                                     {"vertex": option.vertex})
        if not any(option.decomposed for option in options) and ratio < ALL_FUNDAMENTAL_MIN_TILES:
            return FilterVerdict("vertex_links", False,
                                 f"all vertices fundamental needs N >= {ALL_FUNDAMENTAL_MIN_TILES}")
        details = {option.vertex: option.counts for option in options}
        return FilterVerdict("vertex_links", True, "every vertex link admits a decomposition", details)

    def _ideal_count(self, F, P, ratio, options) -> FilterVerdict:
        if F.compact:
            return FilterVerdict("ideal_count", True, "F is compact")
        bound = sum(max(option.counts) for option in options if option.ideal)
        if ratio > bound:
            return FilterVerdict("ideal_count", False,
                                 f"every tile has an ideal vertex, so N <= {bound} < {ratio}", {"bound": bound})
        return FilterVerdict("ideal_count", True, f"N <= {bound}", {"bound": bound})

    def _unique_ideal(self, F, P, ratio, options) -> FilterVerdict:
        if len(F.ideal_vertices) != 1:
            return FilterVerdict("unique_ideal", True, "F has no unique ideal vertex")
        minima = [min(option.counts) for option in options if option.ideal]
        bound = sum(minima)
        if ratio < bound:
            terms = " + ".join(str(m) for m in minima)
            return FilterVerdict("unique_ideal", False, f"N >= {terms} = {bound} > {ratio}",
                                 {"bound": bound, "terms": minima})
        return FilterVerdict("unique_ideal", True, f"N >= {bound}", {"bound": bound})

    def _edge_multiplication(self, F, P, ratio, options) -> FilterVerdict:
        dens = Counter(angle.den for angle in F.diagram.angles if angle.is_coxeter)
        special = [(i, j) for i, j in PAIRS
                   if F.diagram.angle(i, j).den > 3 and dens[F.diagram.angle(i, j).den] == 1]
        if len(special) != 1:
            return FilterVerdict("edge_multiplication", True, "F has no unique pi/k angle with k > 3")
        edge = special[0]
        k = F.diagram.angle(*edge).den
        if any(angle == F.diagram.angle(*edge) for angle in P.diagram.angles):
            return FilterVerdict("edge_multiplication", True, f"P has the angle pi/{k}")
        bounds = [n * k if w in edge else n for option in options for n, w in option.decomposed]
        if not bounds:
            return FilterVerdict("edge_multiplication", True, "no decomposed vertex")
        bound = min(bounds)
        if ratio < bound:
            return FilterVerdict("edge_multiplication", False,
                                 f"each pi/{k} edge lies in {k} tiles: N >= {bound} > {ratio}", {"bound": bound})
        return FilterVerdict("edge_multiplication", True, f"N >= {bound}", {"bound": bound})

    def _three_planes(self, F, P, ratio, options) -> FilterVerdict:
        if len(F.ideal_vertices) != 1:
            return FilterVerdict("three_planes", True, "F has no unique ideal vertex")
        # every tile has its one ideal vertex at an ideal vertex of P, so N is the sum of the counts there
        ideal = [option for option in options if option.ideal]
        choices = [([(1, None)] if option.fundamental else []) + option.decomposed for option in ideal]
        vertex_bounds: Dict[Tuple[int, int, int], Tuple[int, dict]] = {}
        best = None
        for assignment in itertools.product(*choices):
            counts = [n for n, _ in assignment]
            if sum(counts) != ratio:
                continue
            worst = (ratio, {})
            for option, (n, w) in zip(ideal, assignment):
                if n == 1:
                    continue
                if (option.vertex, n, w) not in vertex_bounds:
                    vertex_bounds[(option.vertex, n, w)] = self.three_planes_bound(F, P, option.vertex, n, w)
                if not worst[1] or vertex_bounds[(option.vertex, n, w)][0] > worst[0]:
                    vertex_bound, vertex_details = vertex_bounds[(option.vertex, n, w)]
                    worst = (max(ratio, vertex_bound), vertex_details)
            if best is None or worst[0] < best[0]:
                best = (worst[0], dict(worst[1], counts=counts))
        if best is None:
            return FilterVerdict("three_planes", False,
                                 f"no tile counts at the ideal vertices of P add up to N = {ratio}",
                                 {"bound": None})
        bound, details = best
        details = dict(details, bound=bound)
        if ratio < bound:
            return FilterVerdict("three_planes", False,
                                 f"faces opposite the vertex lie in several planes: N >= {bound} > {ratio}", details)
        return FilterVerdict("three_planes", True, f"N >= {bound}", details)

    def three_planes_bound(self, F: CatalogEntry, P: CatalogEntry, vertex: int, n: int, w: int) -> Tuple[int, dict]:
        """
        Lower bound n + (n - most tiles whose opposite faces share a plane) at an ideal vertex.

        In the upper half-space with the vertex at infinity each tile's face opposite
        it is a hemisphere; its centre and radius come from the angles between that
        face and the vertical faces.
        """
        faces = [f for f in range(4) if f != w]
        a, b, c = faces
        corner_angles = (F.diagram.angle(b, c), F.diagram.angle(a, c), F.diagram.angle(a, b))
        arrangement = arrangement_for(Geometry.EUCLIDEAN, corner_angles, self.config.triangle_max_tiles)
        outer = _radians(P.diagram.link_angles(vertex))
        matches = [mt for mt in arrangement.mirror_triangles()
                   if mt.decomposition.tiles == n and mt.decomposition.second_type
                   and same_triangle(mt.decomposition.outer, outer, 1e-7)]
        sides = arrangement.sides(arrangement.base)
        best, best_details = None, {"vertex": vertex, "tiles": n}
        for perm in itertools.permutations(range(3)):
            if any(corner_angles[perm[k]] != corner_angles[k] for k in range(3)):
                continue
            matrix = np.array([[sides[k][0], sides[k][1], math.cos(F.diagram.angle(w, faces[perm[k]]).radians)]
                               for k in range(3)])
            rhs = np.array([-sides[k][2] for k in range(3)])
            cx, cy, radius = np.linalg.solve(matrix, rhs)
            centre = np.array([cx, cy, 1.0])
            for mt in matches:
                centres = [transform @ centre for transform in arrangement.tiles_in(mt.lines)]
                groups = Counter(tuple(round(value, 6) + 0.0 for value in point[:2]) for point in centres)
                bound = n + (n - max(groups.values()))
                if best is None or bound < best:
                    best = bound
                    best_details = {"vertex": vertex, "tiles": n, "planes": len(groups),
                                    "largest_plane": max(groups.values()), "radius": float(radius),
                                    "plane_angles": self._plane_angles(list(groups), radius)}
        if best is None:
            logger.warning("no %d-tile link of %s at vertex %d found for %s", n, P.id, vertex, F.id)
            return n, best_details
        return best, best_details

    @staticmethod
    def _plane_angles(centres, radius: float) -> List[float]:
        """Dihedral angles between intersecting hemispheres of equal radius."""
        angles = set()
        for first, second in itertools.combinations(centres, 2):
            distance = math.dist(first, second)
            if distance < 2 * radius - 1e-9:
                value = (distance ** 2 - 2 * radius ** 2) / (2 * radius ** 2)
                angles.add(round(math.acos(max(-1.0, min(1.0, value))), 9))
        return sorted(angles)

    def filter_pipeline(self, compact: Optional[bool] = None) -> List[CandidatePair]:
        """Filter every candidate pair; results keep catalog order of (F, P)."""
        pairs = [self.filter_pair(F, P, ratio) for F, P, ratio in self.candidate_pairs(compact)]
        survivors = [pair for pair in pairs if pair.survived]
        logger.info("second-type filters: %d candidates, %d survive", len(pairs), len(survivors))
        return pairs

    # -- verification ------------------------------------------------------

    def verify_tessellation(self, F: CatalogEntry, P: CatalogEntry) -> DecomposedTet:
        """
        Tessellate P by F.

        Raises:
            CertificationError: verified failure, with the best coverage reached
        """
        ratio = round(P.volume / F.volume)
        return tessellate(F, P, ratio, self.config.tol_geometry)

    def analyze(self, compact: Optional[bool] = None) -> SecondTypeReport:
        """
        Filters, tessellation checks and certification over all candidate pairs.

        Raises:
            ClassificationError: if the outcome contradicts the classification
        """
        if compact in self._reports:
            return self._reports[compact]
        candidates = self.filter_pipeline(compact)
        jobs = [(F, P, ratio, self.config.tol_geometry) for F, P, ratio in self.candidate_pairs(compact)]
        if self.config.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                outcomes = list(pool.map(_tessellate_job, jobs))
        else:
            outcomes = [_tessellate_job(job) for job in jobs]

        verdicts = {(pair.F, pair.P): pair for pair in candidates}
        decompositions, certificates, failures = [], [], {}
        for (F, P, ratio, _), (decomposition, failure) in zip(jobs, outcomes):
            if decomposition is None:
                failures[f"{F.id}/{P.id}"] = failure
                continue
            eliminated = verdicts[(F.id, P.id)].eliminated_by
            if eliminated is not None:
                raise ClassificationError(f"filter {eliminated.name} eliminated {F.id}/{P.id}, "
                                          f"which tessellates")
            report = self.engine.realize_and_certify(decomposition)
            if not report.ok:
                raise ClassificationError(f"tessellation of {P.id} by {F.id} fails certification")
            if self.engine.classify_type(decomposition, set()) != DecompositionType.SECOND:
                raise ClassificationError(f"tessellation of {P.id} by {F.id} is not of the second type")
            decompositions.append(decomposition)
            certificates.append(report)

        expected = 0 if compact else 2
        h12 = resolve_actor(self.catalog, "H_12").id
        if len(decompositions) != expected or any(d.fundamental != h12 for d in decompositions):
            found = [(d.fundamental, d.provenance.parents[1]) for d in decompositions]
            raise ClassificationError(f"expected {expected} second-type decompositions by {h12}, found {found}")
        report = SecondTypeReport(candidates=candidates, decompositions=decompositions,
                                  certificates=certificates, failures=failures)
        self._reports[compact] = report
        return report

    def second_type_classification(self, compact: Optional[bool] = None) -> List[DecomposedTet]:
        """The certified second-type decompositions; exactly two, both by H_12, unless compact only."""
        return self.analyze(compact).decompositions
