"""
Exact angle arithmetic, Gram matrices, signatures and link geometry of generalized tetrahedra.
"""

from fractions import Fraction
from functools import lru_cache
from math import acos, cos, sin
from typing import Sequence, Tuple, Union

import mpmath
import numpy as np

from coxtet.errors import StructuralError
from coxtet.models import PAIRS, AngleFrac, Geometry, SumKind, TetShape, VertexType

DEFAULT_TOL = 1e-9

# cos(q*pi) for the denominators 2 and 3
_EXACT_COS = {
    Fraction(1, 2): Fraction(0),
    Fraction(1, 3): Fraction(1, 2),
    Fraction(2, 3): Fraction(-1, 2),
}


def angle_add(a: AngleFrac, b: AngleFrac) -> Union[AngleFrac, SumKind]:
    """
    Add two angles exactly.

    Returns:
        The sum as an AngleFrac when it is below pi, otherwise SumKind.FLAT (= pi)
        or SumKind.REFLEX (> pi)
    """
    total = a.fraction + b.fraction
    if total == 1:
        return SumKind.FLAT
    if total > 1:
        return SumKind.REFLEX
    return AngleFrac.from_fraction(total)


@lru_cache(maxsize=None)
def cos_of(a: AngleFrac) -> mpmath.mpf:
    """cos(a) to at least 30 significant digits."""
    exact = _EXACT_COS.get(a.fraction)
    if exact is not None:
        return mpmath.mpf(exact.numerator) / exact.denominator
    with mpmath.workdps(30):
        return mpmath.cospi(mpmath.mpf(a.num) / a.den)


def gram_matrix(t: TetShape) -> np.ndarray:
    """
    Gram matrix of the face normals: G_ii = 1, G_ij = -cos(angle{i,j}).

    Raises:
        StructuralError: if t does not carry six angles
    """
    angles = getattr(t, "angles", None)
    if angles is None or len(angles) != 6:
        raise StructuralError("gram_matrix needs a shape with all six angles")
    gram = np.eye(4)
    for (i, j), angle in zip(PAIRS, angles):
        gram[i, j] = gram[j, i] = -float(cos_of(angle))
    return gram


def signature(gram: np.ndarray, tol: float = DEFAULT_TOL) -> Tuple[int, int, int]:
    """Counts of (positive, negative, zero) eigenvalues, |lambda| < tol counting as zero."""
    eigenvalues = np.linalg.eigvalsh(np.asarray(gram, dtype=float))
    zeros = int(np.sum(np.abs(eigenvalues) < tol))
    positives = int(np.sum(eigenvalues >= tol))
    return positives, len(eigenvalues) - positives - zeros, zeros


def link_matrix(gram: np.ndarray, v: int) -> np.ndarray:
    """The 3x3 principal minor of the Gram matrix without row and column v: the link of vertex v."""
    keep = [index for index in range(len(gram)) if index != v]
    return gram[np.ix_(keep, keep)]


def vertex_type(t: TetShape, v: int, tol: float = DEFAULT_TOL) -> VertexType:
    """Finite if the link of the vertex opposite face v is spherical, Ideal if Euclidean."""
    positives, negatives, zeros = signature(link_matrix(t.gram, v), tol)
    if positives == 3:
        return VertexType.FINITE
    if negatives == 0 and zeros == 1:
        return VertexType.IDEAL
    return VertexType.INVALID


def is_hyperbolic(t: TetShape, tol: float = DEFAULT_TOL) -> bool:
    """Signature (3,1) and no ultra-ideal vertex."""
    if signature(t.gram, tol) != (3, 1, 0):
        return False
    return all(vertex_type(t, v, tol) != VertexType.INVALID for v in range(4))


def triangle_geometry(angles: Sequence[AngleFrac]) -> Geometry:
    """Geometry of a triangle with the given rational angles (exact)."""
    total = sum((angle.fraction for angle in angles), Fraction(0))
    if total > 1:
        return Geometry.SPHERICAL
    if total == 1:
        return Geometry.EUCLIDEAN
    return Geometry.HYPERBOLIC


def link_face_angle(theta_a: float, theta_b: float, theta_c: float) -> float:
    """
    Side of a link triangle from its three angles.

    theta_a and theta_b are the angles at the two ends of the side, theta_c the
    opposite one. Euclidean links give 0, as at an ideal vertex.
    """
    sin_a, sin_b = sin(theta_a), sin(theta_b)
    if sin_a < 1e-15 or sin_b < 1e-15:
        raise StructuralError("degenerate link: a dihedral angle is 0 or pi")
    value = (cos(theta_c) + cos(theta_a) * cos(theta_b)) / (sin_a * sin_b)
    return acos(max(-1.0, min(1.0, value)))


def face_angle(t: TetShape, f: int, v: int) -> float:
    """
    Planar angle of face f at the vertex opposite face v.

    Args:
        t: The shape
        f: Face index
        v: Vertex index (the vertex opposite face v); must differ from f

    Returns:
        The angle in radians
    """
    if f == v:
        raise StructuralError(f"vertex {v} is not on face {f}")
    g, h = [face for face in range(4) if face not in (f, v)]
    return link_face_angle(t.angle(f, g).radians, t.angle(f, h).radians, t.angle(g, h).radians)


def face_angles(t: TetShape, f: int) -> Tuple[float, float, float]:
    """Angles of face f at its three vertices, in increasing vertex order."""
    return tuple(face_angle(t, f, v) for v in range(4) if v != f)
