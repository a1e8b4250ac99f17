"""
Coxeter decompositions of spherical, Euclidean and hyperbolic triangles.

A decomposition of a triangle by a Coxeter triangle f is a triangle cut out by
three mirrors of the reflection tessellation generated by f. Points are
homogeneous 3-vectors: unit vectors on the sphere, the hyperboloid
x^2 + y^2 - z^2 = -1, or (x, y, 1) in the plane. A mirror is a covector l with
l(x) = 0 on the line; its pole u = D l (D the dual form) satisfies l(u) = 1 and the
reflection is x -> x - 2 l(x) u.
"""

import itertools
import logging
import math
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from coxtet.errors import DomainError
from coxtet.models import AngleFrac, DecomposedTet, Geometry, TriangleDecomp, VertexType
from coxtet.realization import frame_of, on_plane, tile_edges_on, tile_klein, tiles_at_vertex

logger = logging.getLogger(__name__)

KEY_DIGITS = 6
TOL = 1e-9
TILE_LIMIT = 20000

_DUAL_FORMS = {
    Geometry.SPHERICAL: np.eye(3),
    Geometry.HYPERBOLIC: np.diag([1.0, 1.0, -1.0]),
    Geometry.EUCLIDEAN: np.diag([1.0, 1.0, 0.0]),
}

AngleInput = Union[AngleFrac, float]


def _radians(angle: AngleInput) -> float:
    return angle.radians if isinstance(angle, AngleFrac) else float(angle)


def triangle_kind(angles: Sequence[AngleInput], tol: float = TOL) -> Geometry:
    """Geometry of a triangle from its angle sum."""
    total = sum(_radians(angle) for angle in angles)
    if abs(total - math.pi) < tol:
        return Geometry.EUCLIDEAN
    return Geometry.SPHERICAL if total > math.pi else Geometry.HYPERBOLIC


def coxeter_triangles(geometry: Geometry, max_label: int = 10) -> List[Tuple[AngleFrac, ...]]:
    """
    Coxeter triangles (pi/p, pi/q, pi/r) of a geometry.

    Raises:
        DomainError: for the hyperbolic plane, which has infinitely many
    """
    if geometry == Geometry.SPHERICAL:
        labels = [(2, 2, n) for n in range(2, max_label + 1)] + [(2, 3, 3), (2, 3, 4), (2, 3, 5)]
    elif geometry == Geometry.EUCLIDEAN:
        labels = [(2, 3, 6), (2, 4, 4), (3, 3, 3)]
    else:
        raise DomainError("hyperbolic Coxeter triangles cannot be listed exhaustively")
    return [tuple(AngleFrac.coxeter(m) for m in triple) for triple in labels]


def triangle_area(geometry: Geometry, angles: Sequence[AngleInput]) -> Optional[float]:
    """Angle excess or defect; None for Euclidean triangles, whose area depends on scale."""
    total = sum(_radians(angle) for angle in angles)
    if geometry == Geometry.SPHERICAL:
        return total - math.pi
    if geometry == Geometry.HYPERBOLIC:
        return math.pi - total
    return None


def same_triangle(first: Sequence[float], second: Sequence[float], tol: float = TOL) -> bool:
    """Angle triples equal up to order."""
    return all(abs(a - b) < tol for a, b in zip(sorted(first), sorted(second)))


class MirrorTriangle(NamedTuple):
    """A triangle of mirrors with the decomposition it carries."""
    decomposition: TriangleDecomp
    lines: Tuple[np.ndarray, np.ndarray, np.ndarray]
    corners: Tuple[np.ndarray, np.ndarray, np.ndarray]


class MirrorArrangement:
    """The reflection tessellation of one triangle, explored around the base tile."""

    def __init__(self, geometry: Geometry, angles: Sequence[AngleInput], max_tiles: int = 64,
                 tile_limit: int = TILE_LIMIT):
        """
        Explore the tessellation far enough for decompositions of up to max_tiles tiles.

        Args:
            geometry: Geometry of the triangle
            angles: Angles at base vertices v0, v1, v2
            max_tiles: Largest decomposition that will be asked for
            tile_limit: Hard cap on explored tiles (hyperbolic growth)

        Raises:
            DomainError: if the angles do not form a triangle of that geometry
        """
        self.angles = tuple(_radians(angle) for angle in angles)
        if min(self.angles) <= 0 or triangle_kind(self.angles) != geometry:
            raise DomainError(f"angles {self.angles} do not form a compact {geometry.value} triangle")
        self.geometry = geometry
        self.max_tiles = max_tiles
        self.dual = _DUAL_FORMS[geometry]
        self.base = self._base_vertices()
        self.area = self._area(self.base)
        self._explore(tile_limit)
        self._candidates: Optional[List[MirrorTriangle]] = None

    # -- points and lines --------------------------------------------------

    def _normalize_point(self, point: np.ndarray) -> np.ndarray:
        if self.geometry == Geometry.SPHERICAL:
            return point / np.linalg.norm(point)
        if self.geometry == Geometry.EUCLIDEAN:
            return point / point[2]
        norm = point[0] ** 2 + point[1] ** 2 - point[2] ** 2
        return point / math.sqrt(-norm) * (1.0 if point[2] > 0 else -1.0)

    def _normalize_line(self, line: np.ndarray) -> np.ndarray:
        return line / math.sqrt(line @ self.dual @ line)

    def line_through(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return self._normalize_line(np.cross(p, q))

    def reflection(self, line: np.ndarray) -> np.ndarray:
        return np.eye(3) - 2.0 * np.outer(self.dual @ line, line)

    def _key(self, point: np.ndarray) -> Tuple[float, ...]:
        return tuple(round(c, KEY_DIGITS) + 0.0 for c in point)

    def _line_key(self, line: np.ndarray) -> Tuple[float, ...]:
        leading = next(c for c in line if abs(c) > 1e-7)
        return self._key(line if leading > 0 else -line)

    def _base_vertices(self) -> np.ndarray:
        alpha, beta, gamma = self.angles
        if self.geometry == Geometry.EUCLIDEAN:
            length = math.sin(beta) / math.sin(gamma)
            return np.array([[0.0, 1.0, length * math.cos(alpha)],
                             [0.0, 0.0, length * math.sin(alpha)],
                             [1.0, 1.0, 1.0]])
        # side k is opposite vertex k; sides 1 and 2 meet at v0 with angle alpha
        gram = np.array([[1.0, -math.cos(gamma), -math.cos(beta)],
                         [-math.cos(gamma), 1.0, -math.cos(alpha)],
                         [-math.cos(beta), -math.cos(alpha), 1.0]])
        s1 = math.sin(gamma)
        x = gram[0, 2]
        y = (gram[1, 2] - gram[0, 1] * x) / s1
        if self.geometry == Geometry.SPHERICAL:
            z = math.sqrt(max(1.0 - x * x - y * y, 0.0))
        else:
            z = math.sqrt(max(x * x + y * y - 1.0, 0.0))
        normals = np.array([[1.0, gram[0, 1], x], [0.0, s1, y], [0.0, 0.0, z]])
        vertices = -normals @ np.linalg.inv(gram)
        return np.column_stack([self._normalize_point(vertices[:, k]) for k in range(3)])

    def _area(self, vertices: np.ndarray) -> float:
        if self.geometry == Geometry.EUCLIDEAN:
            (x0, x1, x2), (y0, y1, y2) = vertices[0], vertices[1]
            return abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2.0
        return triangle_area(self.geometry, self.angles)

    def sides(self, vertices: np.ndarray) -> List[np.ndarray]:
        """Lines of the three sides, side k opposite vertex k, oriented inside-negative."""
        sides = []
        for k in range(3):
            i, j = [v for v in range(3) if v != k]
            line = self.line_through(vertices[:, i], vertices[:, j])
            sides.append(line if line @ vertices[:, k] < 0 else -line)
        return sides

    # -- exploration -------------------------------------------------------

    def _explore(self, tile_limit: int) -> None:
        radius = None
        if self.geometry == Geometry.EUCLIDEAN:
            diameter = max(np.linalg.norm(self.base[:2, i] - self.base[:2, j])
                           for i, j in itertools.combinations(range(3), 2))
            span = math.sqrt(4.0 * self.max_tiles * self.area / math.tan(min(self.angles)))
            radius = span + 2.0 * diameter
        depth_limit = self.max_tiles if self.geometry == Geometry.HYPERBOLIC else None

        self.transforms: List[np.ndarray] = [np.eye(3)]
        self.vertex_angles: Dict[Tuple[float, ...], float] = {}
        seen = {self._signature(np.eye(3))}
        frontier = [np.eye(3)]
        depth = 0
        while frontier and len(self.transforms) < tile_limit:
            depth += 1
            if depth_limit is not None and depth > depth_limit:
                break
            following = []
            for transform in frontier:
                vertices = transform @ self.base
                for line in self.sides(vertices):
                    image = self.reflection(line) @ transform
                    signature = self._signature(image)
                    if signature in seen:
                        continue
                    if radius is not None and np.linalg.norm((image @ self.base)[:2].mean(axis=1)) > radius:
                        continue
                    seen.add(signature)
                    self.transforms.append(image)
                    following.append(image)
            frontier = following
        if frontier and len(self.transforms) >= tile_limit:
            logger.warning("%s arrangement of %s stopped at %d tiles", self.geometry.value,
                           self.angles, tile_limit)

        self.tile_vertices = np.stack([transform @ self.base for transform in self.transforms])
        mirrors: Dict[Tuple[float, ...], np.ndarray] = {}
        for transform, vertices in zip(self.transforms, self.tile_vertices):
            for k in range(3):
                self.vertex_angles.setdefault(self._key(vertices[:, k]), self.angles[k])
            for line in self.sides(vertices):
                mirrors.setdefault(self._line_key(line), line)
        self.mirrors: List[np.ndarray] = [mirrors[key] for key in sorted(mirrors)]
        logger.debug("%s arrangement of %s: %d tiles, %d mirrors", self.geometry.value,
                     self.angles, len(self.transforms), len(self.mirrors))

    def _signature(self, transform: np.ndarray) -> Tuple[Tuple[float, ...], ...]:
        vertices = transform @ self.base
        return tuple(sorted(self._key(vertices[:, k]) for k in range(3)))

    # -- triangles of mirrors ----------------------------------------------

    def tiles_in(self, lines: Sequence[np.ndarray], tol: float = 1e-7) -> List[np.ndarray]:
        """Tile transforms of explored tiles inside {l(x) <= 0} for every line."""
        matrix = np.stack(lines)
        values = np.einsum("lc,tcv->tlv", matrix, self.tile_vertices)
        inside = (values <= tol).all(axis=(1, 2))
        return [self.transforms[index] for index in np.flatnonzero(inside)]

    def _corner(self, first: np.ndarray, second: np.ndarray, third: np.ndarray) -> Optional[np.ndarray]:
        point = np.cross(first, second)
        if self.geometry == Geometry.EUCLIDEAN:
            if abs(point[2]) < 1e-12:
                return None
            point = point / point[2]
            return point if third @ point < -TOL else None
        if third @ point > 0:
            point = -point
        if third @ point > -1e-12:
            return None
        if self.geometry == Geometry.HYPERBOLIC:
            if point[0] ** 2 + point[1] ** 2 - point[2] ** 2 > -1e-12 or point[2] <= 0:
                return None
        return self._normalize_point(point)

    def _angle(self, first: np.ndarray, second: np.ndarray) -> float:
        return math.acos(max(-1.0, min(1.0, -(first @ self.dual @ second))))

    def _triangle_area(self, corners: Sequence[np.ndarray], angles: Sequence[float]) -> float:
        if self.geometry == Geometry.EUCLIDEAN:
            return self._area(np.column_stack(corners))
        return triangle_area(self.geometry, angles)

    def _decompose(self, lines: Tuple[np.ndarray, ...], c1: np.ndarray) -> Optional[MirrorTriangle]:
        l1, l2, l3 = lines
        c2 = self._corner(l1, l3, l2)
        c3 = self._corner(l2, l3, l1)
        if c2 is None or c3 is None:
            return None
        corners = (c1, c2, c3)
        outer = (self._angle(l1, l2), self._angle(l1, l3), self._angle(l2, l3))
        if self.geometry == Geometry.SPHERICAL and sum(outer) <= math.pi + TOL:
            return None
        ratio = self._triangle_area(corners, outer) / self.area
        tiles = round(ratio)
        if tiles < 1 or tiles > self.max_tiles or abs(ratio - tiles) > 1e-6:
            return None

        inside = self.tiles_in(lines)
        if len(inside) != tiles:
            logger.debug("mirror triangle with %d tiles only covers %d explored tiles", tiles, len(inside))
            return None
        vertex_sets = [transform @ self.base for transform in inside]
        points = {self._key(v[:, k]): v[:, k] for v in vertex_sets for k in range(3)}
        # side k lies on the line not through corner k
        side_lines = (l3, l2, l1)
        side_patterns = tuple(sum(1 for point in points.values() if abs(line @ point) < 1e-7) - 1
                              for line in side_lines)
        corner_tiles = tuple(sum(1 for v in vertex_sets
                                 if (np.abs(v - corner[:, None]).max(axis=0) < 1e-7).any())
                             for corner in corners)
        decomposition = TriangleDecomp(
            geometry=self.geometry, outer=outer, fundamental=self.angles, tiles=tiles,
            side_patterns=side_patterns, corner_tiles=corner_tiles,
            provenance=("mirrors",) + tuple(self._line_key(line) for line in lines))
        return MirrorTriangle(decomposition, lines, corners)

    def mirror_triangles(self) -> List[MirrorTriangle]:
        """Every triangle of mirrors containing the base tile with a base vertex as corner."""
        if self._candidates is not None:
            return self._candidates
        centroid = self.base.mean(axis=1)
        oriented = [line if line @ centroid < 0 else -line for line in self.mirrors]
        base_sides = self.sides(self.base)
        found = []
        for k in range(3):
            c1 = self.base[:, k]
            through = [line for line in oriented if abs(line @ c1) < 1e-7]
            others = [line for line in oriented if abs(line @ c1) >= 1e-7]
            for side in (s for index, s in enumerate(base_sides) if index != k):
                for second in through:
                    if self._line_key(second) == self._line_key(side):
                        continue
                    for third in others:
                        candidate = self._decompose((side, second, third), c1)
                        if candidate is not None:
                            found.append(candidate)
        self._candidates = found
        return found

    def decompositions(self, max_tiles: Optional[int] = None, second_type_only: bool = False,
                       include_trivial: bool = False) -> List[TriangleDecomp]:
        """Distinct decompositions by this triangle, sorted by tile count."""
        cap = max_tiles or self.max_tiles
        unique: Dict[tuple, TriangleDecomp] = {}
        for candidate in self.mirror_triangles():
            decomposition = candidate.decomposition
            if decomposition.tiles > cap or (decomposition.trivial and not include_trivial):
                continue
            if second_type_only and not decomposition.second_type:
                continue
            unique.setdefault(decomposition.key, decomposition)
        return sorted(unique.values(), key=lambda d: (d.tiles, d.key))


@lru_cache(maxsize=256)
def _arrangement(geometry: Geometry, angles: Tuple[float, ...], max_tiles: int) -> MirrorArrangement:
    return MirrorArrangement(geometry, angles, max_tiles)


def arrangement_for(geometry: Geometry, angles: Sequence[AngleInput], max_tiles: int) -> MirrorArrangement:
    """Shared, cached arrangement for a triangle."""
    return _arrangement(geometry, tuple(round(_radians(angle), 12) for angle in angles), max_tiles)


def search_triangle_decompositions(geometry: Geometry, fundamental: Optional[Sequence[AngleInput]] = None,
                                   max_tiles: int = 24, second_type_only: bool = True, *,
                                   include_trivial: bool = False,
                                   max_label: int = 10) -> List[TriangleDecomp]:
    """
    Decompositions of triangles by a fundamental triangle.

    Args:
        geometry: Spherical, Euclidean or hyperbolic
        fundamental: Fundamental triangle angles; every Coxeter triangle of the
            geometry when omitted
        max_tiles: Largest tile count
        second_type_only: Keep only decompositions with every outer angle fundamental
        include_trivial: Keep the one-tile decomposition of each fundamental
        max_label: Largest dihedral label of the spherical (2,2,n) family

    Returns:
        Decompositions sorted by (tiles, key)

    Raises:
        DomainError: for a hyperbolic search without a fundamental triangle
    """
    if fundamental is None:
        fundamentals = coxeter_triangles(geometry, max_label)
    else:
        fundamentals = [tuple(fundamental)]
    found: Dict[tuple, TriangleDecomp] = {}
    for angles in fundamentals:
        arrangement = arrangement_for(geometry, angles, max_tiles)
        for decomposition in arrangement.decompositions(max_tiles, second_type_only, include_trivial):
            found.setdefault(decomposition.key, decomposition)
    logger.info("%s triangle search (max %d tiles): %d decompositions", geometry.value, max_tiles, len(found))
    return sorted(found.values(), key=lambda d: (d.tiles, d.key))


def triangle_decomposition_exists(fundamental: Sequence[AngleInput], outer: Sequence[AngleInput],
                                  second_type_only: bool = True, max_tiles: int = 64) -> bool:
    """
    Whether `outer` admits a Coxeter decomposition with fundamental triangle `fundamental`.

    Hyperbolic corners at infinity are not searched: such an outer triangle is
    decomposable here only when it equals the fundamental one.

    Raises:
        DomainError: if the two triangles have different geometries
    """
    f = tuple(_radians(angle) for angle in fundamental)
    p = tuple(_radians(angle) for angle in outer)
    geometry = triangle_kind(f)
    if triangle_kind(p) != geometry:
        raise DomainError(f"{geometry.value} fundamental triangle cannot tile a "
                          f"{triangle_kind(p).value} triangle")
    if same_triangle(f, p):
        return True
    cap = max_tiles
    if geometry != Geometry.EUCLIDEAN:
        ratio = triangle_area(geometry, p) / triangle_area(geometry, f)
        if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 2 or round(ratio) > max_tiles:
            return False
        cap = round(ratio)
    if min(p) <= 0:
        return False
    arrangement = arrangement_for(geometry, f, cap)
    return any(same_triangle(d.outer, p, 1e-7)
               for d in arrangement.decompositions(cap, second_type_only))


def link_decomposition(d: DecomposedTet, v: int, fundamental_shape, tol: float = 1e-8) -> TriangleDecomp:
    """
    Decomposition induced on the link of the container vertex opposite face v.

    Args:
        d: Decomposition with placements
        v: Vertex index (the vertex opposite face v)
        fundamental_shape: Shape of the fundamental tetrahedron
        tol: Geometric tolerance

    Raises:
        DomainError: if the vertex is ultra-ideal
    """
    kind = d.shape.vertex_class[v]
    if kind == VertexType.INVALID:
        raise DomainError(f"vertex {v} of {d.key} is ultra-ideal")
    geometry = Geometry.SPHERICAL if kind == VertexType.FINITE else Geometry.EUCLIDEAN
    frame = frame_of(d.shape)
    base = frame_of(fundamental_shape)
    at_vertex = tiles_at_vertex(frame, d.placements, base, v, tol)
    tile_vertex = dict(at_vertex)

    a, b, c = [face for face in range(4) if face != v]
    corners = ((a, b), (a, c), (b, c))
    corner_tiles = []
    for edge in corners:
        tiles = {tile for tile, (i, j) in tile_edges_on(frame, d.placements, base, edge, tol)
                 if tile in tile_vertex and tile_vertex[tile] not in (i, j)}
        corner_tiles.append(len(tiles))

    side_patterns = []
    for face in (c, b, a):
        # a tile facet through the vertex lies on the face
        count = sum(1 for tile, _ in at_vertex
                    if on_plane(tile_klein(d.placements[tile], base), frame.normals[:, face], tol).sum() >= 3)
        side_patterns.append(count)

    k0 = at_vertex[0][1] if at_vertex else v
    return TriangleDecomp(
        geometry=geometry,
        outer=tuple(angle.radians for angle in d.shape.link_angles(v)),
        fundamental=tuple(angle.radians for angle in fundamental_shape.link_angles(k0)),
        tiles=len(at_vertex), side_patterns=tuple(side_patterns), corner_tiles=tuple(corner_tiles),
        provenance=("link", d.key, v))
