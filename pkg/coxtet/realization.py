"""
Hyperboloid-model realizations of tetrahedra and of their tilings.

Points and face normals live in R^{3,1} with the form diag(1, 1, 1, -1). Face i
of a realized shape has outward unit normal e_i with <e_i, e_j> = G_ij, and the
tetrahedron is {x : <x, e_i> <= 0 for all i} on the future sheet. A tile is an
isometry L applied to the realization of the fundamental tetrahedron.
"""

import hashlib
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from coxtet.catalog import PERMUTATIONS, canonical_form
from coxtet.errors import DomainError
from coxtet.models import PAIRS, CertificationReport, TetShape, VertexType

logger = logging.getLogger(__name__)

J = np.diag([1.0, 1.0, 1.0, -1.0])
ERROR_THRESHOLD = 1e-8
KEY_DIGITS = 6
SAMPLE_SHRINK = 0.98
MAX_COUNTEREXAMPLES = 10


def minkowski(x: np.ndarray, y: np.ndarray) -> float:
    return float(x @ J @ y)


def reflection(normal: np.ndarray) -> np.ndarray:
    """Matrix of x -> x - 2<x, n> n for a unit spacelike n."""
    return np.eye(4) - 2.0 * np.outer(normal, normal @ J)


def is_isometry(matrix: np.ndarray, tol: float = ERROR_THRESHOLD) -> bool:
    return bool(np.allclose(matrix.T @ J @ matrix, J, atol=tol * 100))


def unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def klein_points(vertices: np.ndarray) -> np.ndarray:
    """Rows of Klein-model coordinates for the columns of `vertices`."""
    return (vertices[:3, :] / vertices[3, :]).T


def canonical_normals(gram: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """
    Face normals in the canonical frame, one column per face.

    Face 0 is the plane x = 0, face 1 contains the z and t axes and face 2 is
    orthogonal to the t axis unless faces 0, 1, 2 meet at an ideal vertex.

    Raises:
        DomainError: if the Gram matrix has no realization with these normals
    """
    g = np.asarray(gram, dtype=float)
    normals = np.zeros((4, 4))
    normals[:, 0] = [1.0, 0.0, 0.0, 0.0]
    s1 = math.sqrt(1.0 - g[0, 1] ** 2)
    normals[:, 1] = [g[0, 1], s1, 0.0, 0.0]

    x = g[0, 2]
    y = (g[1, 2] - g[0, 1] * x) / s1
    r = 1.0 - x * x - y * y
    a = g[0, 3]
    b = (g[1, 3] - g[0, 1] * a) / s1
    if r > tol:
        normals[:, 2] = [x, y, math.sqrt(r), 0.0]
        c = (g[2, 3] - x * a - y * b) / math.sqrt(r)
        t2 = a * a + b * b + c * c - 1.0
        if t2 < -tol:
            raise DomainError("Gram matrix is not of hyperbolic signature")
        normals[:, 3] = [a, b, c, math.sqrt(max(t2, 0.0))]
    elif r > -tol:
        # faces 0, 1, 2 meet at an ideal vertex
        normals[:, 2] = [x, y, 1.0, 1.0]
        difference = g[2, 3] - x * a - y * b  # z - t
        if abs(difference) < tol:
            raise DomainError("degenerate ideal frame")
        total = (1.0 - a * a - b * b) / difference  # z + t
        normals[:, 3] = [a, b, (total + difference) / 2.0, (total - difference) / 2.0]
    else:
        raise DomainError("faces 0, 1, 2 meet beyond infinity")
    return normals


def _vertices(normals: np.ndarray, gram: np.ndarray,
              vertex_class: Sequence[VertexType]) -> Tuple[np.ndarray, np.ndarray]:
    vertices = -normals @ np.linalg.inv(gram)
    for k, kind in enumerate(vertex_class):
        if kind == VertexType.INVALID:
            raise DomainError(f"vertex {k} is ultra-ideal")
        if kind == VertexType.FINITE:
            norm = minkowski(vertices[:, k], vertices[:, k])
            if norm >= 0:
                raise DomainError(f"vertex {k} is not timelike")
            vertices[:, k] /= math.sqrt(-norm)
    if vertices[3, :].sum() < 0:
        normals, vertices = -normals, -vertices
    for k, kind in enumerate(vertex_class):
        if kind == VertexType.IDEAL:
            vertices[:, k] /= vertices[3, k]
    return normals, vertices


@dataclass(frozen=True, eq=False)
class ShapeFrame:
    """A realized tetrahedron: normals and vertices as columns indexed by face."""
    shape: TetShape
    normals: np.ndarray
    vertices: np.ndarray
    ideal: Tuple[bool, ...]

    @property
    def klein(self) -> np.ndarray:
        return klein_points(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        return self.klein.mean(axis=0)


@lru_cache(maxsize=4096)
def frame_of(shape: TetShape) -> ShapeFrame:
    """Canonical realization of a hyperbolic shape."""
    normals = canonical_normals(shape.gram)
    normals, vertices = _vertices(normals, shape.gram, shape.vertex_class)
    ideal = tuple(kind == VertexType.IDEAL for kind in shape.vertex_class)
    return ShapeFrame(shape=shape, normals=normals, vertices=vertices, ideal=ideal)


def complete_frame(targets: Dict[int, np.ndarray], missing: int, gram: np.ndarray,
                   apex: np.ndarray, apex_ideal: bool, tol: float = ERROR_THRESHOLD) -> np.ndarray:
    """
    Fourth face normal given the images of three others.

    The normal m satisfies <m, targets[i]> = gram[missing, i], <m, m> = 1 and
    puts the apex (the vertex opposite face `missing`, common to the three target
    planes) strictly inside: <apex, m> < 0.

    Raises:
        DomainError: if no such normal exists
    """
    faces = sorted(targets)
    system = np.column_stack([targets[i] for i in faces]).T @ J
    rhs = np.array([gram[missing, i] for i in faces])
    base = np.linalg.lstsq(system, rhs, rcond=None)[0]
    a = minkowski(base, base)
    if apex_ideal:
        b = minkowski(base, apex)
        if b >= -tol:
            raise DomainError("ideal apex cannot lie inside the completed tetrahedron")
        s = (1.0 - a) / (2.0 * b)
    else:
        apex = apex / math.sqrt(-minkowski(apex, apex))
        b = minkowski(base, apex)
        discriminant = b * b + a - 1.0
        if discriminant < -tol:
            raise DomainError("no unit normal completes the frame")
        s = b + math.sqrt(max(discriminant, 0.0))
    return base + s * apex


def frame_isometry(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """The linear map sending the normal columns of `source` to those of `target`."""
    return target @ np.linalg.inv(source)


# -- tiles -----------------------------------------------------------------


def tile_normals(placement: np.ndarray, base: ShapeFrame) -> np.ndarray:
    return placement @ base.normals


def tile_klein(placement: np.ndarray, base: ShapeFrame) -> np.ndarray:
    return klein_points(placement @ base.vertices)


def facets_on(placement: np.ndarray, base: ShapeFrame, normal: np.ndarray,
              tol: float = ERROR_THRESHOLD) -> List[int]:
    """Facets of a tile whose outward normal is `normal`."""
    target = unit(normal)
    normals = tile_normals(placement, base)
    return [k for k in range(4) if np.allclose(unit(normals[:, k]), target, atol=tol)]


def points_match(first: np.ndarray, second: np.ndarray, tol: float = ERROR_THRESHOLD) -> bool:
    """True when two point sets (rows) coincide up to order."""
    if first.shape != second.shape:
        return False
    gaps = np.abs(first[:, None, :] - second[None, :, :]).max(axis=2)
    return bool((gaps.min(axis=1) < tol).all() and (gaps.min(axis=0) < tol).all())


def on_plane(points: np.ndarray, normal: np.ndarray, tol: float = ERROR_THRESHOLD) -> np.ndarray:
    """Mask of Klein points lying on the plane with the given normal."""
    lifted = np.hstack([points, np.ones((len(points), 1))])
    return np.abs(lifted @ J @ unit(normal)) < tol


def _rounded(value: float) -> str:
    return f"{round(value, KEY_DIGITS) + 0.0:.{KEY_DIGITS}f}"


def tile_signature(placement: np.ndarray, base: ShapeFrame) -> Tuple[Tuple[str, ...], ...]:
    """Rounded, sorted Klein vertices of a tile."""
    return tuple(sorted(tuple(_rounded(c) for c in point) for point in tile_klein(placement, base)))


def _placement_material(placements: Sequence[np.ndarray], base: ShapeFrame) -> str:
    return repr(sorted(tile_signature(placement, base) for placement in placements))


def canonical_decomposition(shape: TetShape, fundamental: str, placements: Sequence[np.ndarray],
                            base: ShapeFrame) -> Tuple[str, TetShape, Tuple[np.ndarray, ...]]:
    """
    Canonical labeling and key of a tiled shape.

    Among the relabelings achieving the canonical angle encoding, the one whose
    tile set has the smallest rounded description wins.

    Returns:
        (key, relabeled shape, placements in the relabeled canonical frame)
    """
    frame = frame_of(shape)
    shape_key, perm0 = canonical_form(shape)
    target = shape.relabel(perm0).encoding
    best = None
    for perm in PERMUTATIONS:
        relabeled = shape.relabel(perm)
        if relabeled.encoding != target:
            continue
        mapping = frame_isometry(frame.normals[:, list(perm)], frame_of(relabeled).normals)
        mapped = tuple(mapping @ placement for placement in placements)
        material = _placement_material(mapped, base)
        if best is None or material < best[0]:
            best = (material, relabeled, mapped)
    material, relabeled, mapped = best
    payload = f"{fundamental}|{shape_key}|{len(placements)}|{material}"
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:20], relabeled, mapped


# -- traces ----------------------------------------------------------------


def container_facets(frame: ShapeFrame, placements: Sequence[np.ndarray], base: ShapeFrame,
                     face: int, tol: float = ERROR_THRESHOLD) -> List[Tuple[int, int]]:
    """(tile, facet) pairs whose facet lies on the given container face."""
    found = []
    for index, placement in enumerate(placements):
        for facet in facets_on(placement, base, frame.normals[:, face], tol):
            found.append((index, facet))
    return found


def tiles_at_vertex(frame: ShapeFrame, placements: Sequence[np.ndarray], base: ShapeFrame,
                    vertex: int, tol: float = ERROR_THRESHOLD) -> List[Tuple[int, int]]:
    """(tile, tile vertex) pairs located at the given container vertex."""
    point = frame.klein[vertex]
    found = []
    for index, placement in enumerate(placements):
        klein = tile_klein(placement, base)
        for k in range(4):
            if np.abs(klein[k] - point).max() < tol:
                found.append((index, k))
    return found


def tile_edges_on(frame: ShapeFrame, placements: Sequence[np.ndarray], base: ShapeFrame,
                  edge: Tuple[int, int], tol: float = ERROR_THRESHOLD) -> List[Tuple[int, Tuple[int, int]]]:
    """(tile, tile edge) pairs lying on the container edge `edge`."""
    a, b = edge
    found = []
    for index, placement in enumerate(placements):
        klein = tile_klein(placement, base)
        on_both = on_plane(klein, frame.normals[:, a], tol) & on_plane(klein, frame.normals[:, b], tol)
        for i, j in PAIRS:
            ends = [k for k in range(4) if k not in (i, j)]
            if on_both[ends].all():
                found.append((index, (i, j)))
    return found


def non_fundamental_edges(frame: ShapeFrame, placements: Sequence[np.ndarray], base: ShapeFrame,
                          tol: float = ERROR_THRESHOLD) -> List[Tuple[int, int]]:
    """Container edges crossed by a mirror: some tile edge on them has a smaller angle."""
    shape, fundamental = frame.shape, base.shape
    flagged = []
    for edge in PAIRS:
        angle = shape.angle(*edge)
        if any(fundamental.angle(*tile_edge) != angle
               for _, tile_edge in tile_edges_on(frame, placements, base, edge, tol)):
            flagged.append(edge)
    return flagged


# -- certification ---------------------------------------------------------


def _sample_weights(count: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=4, scramble=True, seed=seed)
    uniform = sampler.random_base2(max(1, math.ceil(math.log2(max(count, 2)))))[:count]
    weights = -np.log1p(-np.clip(uniform, 0.0, 1.0 - 1e-12))
    return weights / weights.sum(axis=1, keepdims=True)


def certify_placements(frame: ShapeFrame, placements: Sequence[np.ndarray], base: ShapeFrame,
                       container_volume: float, tile_volume: float, *, key: str = "",
                       samples_per_tile: int = 64, seed: int = 0,
                       tol: float = ERROR_THRESHOLD) -> CertificationReport:
    """
    Check that placed tiles partition the container with the mirror condition.

    Args:
        frame: Realized container
        placements: Tile isometries relative to `base`
        base: Realized fundamental tetrahedron
        container_volume: Volume of the container
        tile_volume: Volume of the fundamental tetrahedron
        key: Decomposition key for the report
        samples_per_tile: Quasi-random interior points per tile
        seed: Seed of the scrambled Sobol sequence
        tol: Geometric tolerance on Klein coordinates

    Returns:
        CertificationReport with residual, overlap and mirror counts
    """
    counterexamples: List[dict] = []
    residual = abs(len(placements) * tile_volume - container_volume)
    if residual > 1e-6 * len(placements):
        counterexamples.append({"check": "volume", "residual": residual})

    weights = _sample_weights(samples_per_tile, seed)
    normals = [tile_normals(placement, base) for placement in placements]
    kleins = [tile_klein(placement, base) for placement in placements]

    overlaps = 0
    for t, klein in enumerate(kleins):
        centroid = klein.mean(axis=0)
        points = centroid + SAMPLE_SHRINK * (weights @ klein - centroid)
        lifted = np.hstack([points, np.ones((len(points), 1))])
        outside = (lifted @ J @ frame.normals > tol).any(axis=1)
        if outside.any():
            overlaps += 1
            if len(counterexamples) < MAX_COUNTEREXAMPLES:
                counterexamples.append({"check": "containment", "tile": t,
                                        "point": points[outside.argmax()].tolist()})
        for s in range(len(placements)):
            if s == t:
                continue
            inside = (lifted @ J @ normals[s] < -tol).all(axis=1)
            if inside.any():
                overlaps += 1
                if len(counterexamples) < MAX_COUNTEREXAMPLES:
                    counterexamples.append({"check": "overlap", "tiles": [t, s],
                                            "point": points[inside.argmax()].tolist()})

    mirror_violations = 0
    for t, placement in enumerate(placements):
        for facet in range(4):
            normal = normals[t][:, facet]
            if any(np.allclose(unit(normal), unit(frame.normals[:, f]), atol=tol) for f in range(4)):
                continue
            mirrored = klein_points(reflection(normal) @ placement @ base.vertices)
            if not any(points_match(mirrored, kleins[s], tol) for s in range(len(placements)) if s != t):
                mirror_violations += 1
                if len(counterexamples) < MAX_COUNTEREXAMPLES:
                    counterexamples.append({"check": "mirror", "tile": t, "facet": facet})

    report = CertificationReport(key=key, tiles=len(placements), volume_residual=residual,
                                 overlaps=overlaps, mirror_violations=mirror_violations,
                                 samples=samples_per_tile * len(placements), seed=seed,
                                 counterexamples=counterexamples)
    if not report.ok:
        logger.error("certification of %s failed: %s", key or "decomposition", counterexamples[:3])
    return report


def seat_tile(frame: ShapeFrame, base: ShapeFrame, container_edge: Tuple[int, int], vertex: int,
              tile_edge: Tuple[int, int], tile_vertex: int, root: int,
              tol: float = ERROR_THRESHOLD) -> Optional[np.ndarray]:
    """
    Place a tile with vertex `tile_vertex` at container vertex `vertex` and its
    faces tile_edge[0], tile_edge[1] on container faces container_edge[0], container_edge[1].

    The third face through the vertex is fixed up to two choices, picked by `root`.
    Returns the placement, or None when the constraints have no real solution.
    """
    a, b = container_edge
    i, j = tile_edge
    (third,) = [face for face in range(4) if face not in (i, j, tile_vertex)]
    gram = base.shape.gram
    point = frame.vertices[:, vertex]
    n_a, n_b = frame.normals[:, a], frame.normals[:, b]

    system = np.vstack([n_a @ J, n_b @ J, point @ J])
    rhs = np.array([gram[third, i], gram[third, j], 0.0])
    particular = np.linalg.lstsq(system, rhs, rcond=None)[0]
    _, _, vh = np.linalg.svd(system)
    direction = vh[-1]
    qa = minkowski(direction, direction)
    qb = minkowski(particular, direction)
    qc = minkowski(particular, particular) - 1.0
    if abs(qa) < tol:
        return None
    discriminant = qb * qb - qa * qc
    if discriminant < -tol:
        return None
    s = (-qb + (1 if root == 0 else -1) * math.sqrt(max(discriminant, 0.0))) / qa
    third_normal = particular + s * direction

    targets = {i: n_a, j: n_b, third: third_normal}
    try:
        last = complete_frame(targets, tile_vertex, gram, point, frame.ideal[vertex], tol)
    except DomainError:
        return None
    images = np.zeros((4, 4))
    for face, normal in targets.items():
        images[:, face] = normal
    images[:, tile_vertex] = last
    placement = frame_isometry(base.normals, images)
    if not is_isometry(placement, tol):
        return None
    return placement
