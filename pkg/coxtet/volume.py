"""
Hyperbolic volumes of generalized tetrahedra and the volume-ratio test.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import mpmath

from coxtet.errors import DomainError, PrecisionError
from coxtet.geometry import is_hyperbolic
from coxtet.models import PAIRS, RIGHT_ANGLE, AngleFrac, CatalogEntry, TetShape, VertexType, VolumeValue

logger = logging.getLogger(__name__)

WORKING_DPS = 64
CROSS_CHECK_TOL = 1e-8

# Edge names of the dilogarithm formula: A, B, C meet at the vertex opposite face 3,
# D, E, F are the opposite edges.
_EDGE_A, _EDGE_B, _EDGE_C = (0, 1), (0, 2), (1, 2)
_EDGE_D, _EDGE_E, _EDGE_F = (2, 3), (1, 3), (0, 3)


def lobachevsky(theta) -> mpmath.mpf:
    """
    Lobachevsky function -integral_0^theta log|2 sin t| dt.

    Reduced to (-pi/2, pi/2] by pi-periodicity and oddness, then evaluated as
    half the Clausen function Cl_2(2 theta).
    """
    theta = mpmath.mpf(theta)
    reduced = theta - mpmath.pi * mpmath.floor(theta / mpmath.pi + mpmath.mpf(1) / 2)
    if reduced == 0:
        return mpmath.mpf(0)
    sign = 1
    if reduced < 0:
        sign, reduced = -1, -reduced
    return sign * mpmath.clsin(2, 2 * reduced) / 2


def regular_ideal_volume(dps: int = WORKING_DPS) -> mpmath.mpf:
    """3*Lambda(pi/3), the largest volume of any hyperbolic tetrahedron."""
    with mpmath.workdps(dps):
        return 3 * lobachevsky(mpmath.pi / 3)


def _cis(angle: AngleFrac) -> mpmath.mpc:
    return mpmath.expjpi(mpmath.mpf(angle.num) / angle.den)


def _poly_mul(left: List, right: List) -> List:
    product = [mpmath.mpc(0)] * (len(left) + len(right) - 1)
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            product[i + j] += a * b
    return product


def _product_of_linear(coefficients: Sequence) -> List:
    poly = [mpmath.mpc(1)]
    for coefficient in coefficients:
        poly = _poly_mul(poly, [mpmath.mpc(1), coefficient])
    return poly


def dilogarithm_volume(t: TetShape) -> mpmath.mpf:
    """
    General-tetrahedron volume from dilogarithms at the two stationary points.

    U(z) is half the signed sum of eight Li_2 terms; its stationary points are the
    roots of a quadratic obtained after cancelling the constant and quartic
    terms of the product condition. The volume is |Im(U(z1) - U(z2))| / 2.
    """
    a, b, c = (_cis(t.angle(*edge)) for edge in (_EDGE_A, _EDGE_B, _EDGE_C))
    d, e, f = (_cis(t.angle(*edge)) for edge in (_EDGE_D, _EDGE_E, _EDGE_F))
    cycles = [mpmath.mpc(1), a * b * d * e, a * c * d * f, b * c * e * f]
    vertices = [a * b * c, a * e * f, b * d * f, c * d * e]

    lhs = _product_of_linear([-k for k in cycles])
    rhs = _product_of_linear(vertices)
    diff = [x - y for x, y in zip(lhs, rhs)]
    c1, c2, c3 = diff[1], diff[2], diff[3]
    if abs(c3) < mpmath.mpf(10) ** (-mpmath.mp.dps // 2):
        raise DomainError(f"degenerate stationary-point equation for {t}")
    root = mpmath.sqrt(c2 * c2 - 4 * c3 * c1)
    z_plus = (-c2 + root) / (2 * c3)
    z_minus = (-c2 - root) / (2 * c3)

    def u(z):
        total = sum(mpmath.polylog(2, k * z) for k in cycles)
        total -= sum(mpmath.polylog(2, -k * z) for k in vertices)
        return total / 2

    return abs(mpmath.im(u(z_plus) - u(z_minus))) / 2


def linear_path(t: TetShape) -> Optional[Tuple[int, int, int, int]]:
    """Face order n0-n1-n2-n3 if the non-right angles form a path through all faces."""
    edges = [pair for pair, angle in zip(PAIRS, t.angles) if angle != RIGHT_ANGLE]
    if len(edges) != 3:
        return None
    degree = {face: sum(face in edge for edge in edges) for face in range(4)}
    if sorted(degree.values()) != [1, 1, 2, 2]:
        return None
    start = min(face for face, count in degree.items() if count == 1)
    path, remaining = [start], list(edges)
    while remaining:
        step = next(edge for edge in remaining if path[-1] in edge)
        remaining.remove(step)
        path.append(step[0] if step[1] == path[-1] else step[1])
    return tuple(path)


def orthoscheme_volume(alpha1, alpha2, alpha3) -> mpmath.mpf:
    """Lobachevsky-function volume of an orthoscheme with essential angles alpha1..3."""
    alpha1, alpha2, alpha3 = (mpmath.mpf(x) for x in (alpha1, alpha2, alpha3))
    radicand = mpmath.cos(alpha2) ** 2 - mpmath.sin(alpha1) ** 2 * mpmath.sin(alpha3) ** 2
    if radicand <= 0:
        raise DomainError("essential angles do not describe a hyperbolic orthoscheme")
    delta = mpmath.atan(mpmath.sqrt(radicand) / (mpmath.cos(alpha1) * mpmath.cos(alpha3)))
    half_pi = mpmath.pi / 2
    lam = lobachevsky
    return (lam(alpha1 + delta) - lam(alpha1 - delta)
            + lam(alpha3 + delta) - lam(alpha3 - delta)
            - lam(half_pi - alpha2 + delta) + lam(half_pi - alpha2 - delta)
            + 2 * lam(half_pi - delta)) / 4


def _orthoscheme_cross_check(t: TetShape) -> Optional[mpmath.mpf]:
    path = linear_path(t)
    if path is None:
        return None
    essential = [t.angle(path[k], path[k + 1]) for k in range(3)]
    if any(angle.fraction >= AngleFrac.coxeter(2).fraction for angle in essential):
        return None
    return orthoscheme_volume(*(mpmath.pi * angle.num / angle.den for angle in essential))


def _ideal_cross_check(t: TetShape) -> Optional[mpmath.mpf]:
    if any(kind != VertexType.IDEAL for kind in t.vertex_class):
        return None
    return sum(lobachevsky(mpmath.pi * t.angle(*edge).num / t.angle(*edge).den)
               for edge in (_EDGE_A, _EDGE_B, _EDGE_C))


@lru_cache(maxsize=None)
def _volume_cached(t: TetShape, dps: int) -> VolumeValue:
    with mpmath.workdps(dps):
        value = dilogarithm_volume(t)
        err = float(mpmath.mpf(10) ** (-(dps - 10)))
        for check in (_orthoscheme_cross_check, _ideal_cross_check):
            other = check(t)
            if other is None:
                continue
            gap = float(abs(other - value))
            if gap > CROSS_CHECK_TOL:
                raise PrecisionError(f"volume formulas disagree on {t}: gap {gap:.3e}",
                                     err=gap, tol=CROSS_CHECK_TOL)
            err = max(err, gap)
        return VolumeValue(value=+value, err=err)


def tet_volume(t: TetShape, dps: int = WORKING_DPS) -> VolumeValue:
    """
    Volume of a hyperbolic tetrahedron with finite or ideal vertices.

    Args:
        t: The shape
        dps: Working precision in decimal digits

    Returns:
        The volume and an absolute error bound

    Raises:
        DomainError: if the shape is not hyperbolic
        PrecisionError: if the built-in cross-checks disagree
    """
    if not is_hyperbolic(t):
        raise DomainError(f"{t} is not a hyperbolic tetrahedron")
    return _volume_cached(t, dps)


def ratio_integrality(F: CatalogEntry, P: CatalogEntry, tol: float = 1e-6) -> Optional[int]:
    """
    Nearest integer to Vol(P)/Vol(F) when it is within tol, else None.

    Raises:
        PrecisionError: if the volume error bounds are too wide for a verdict
    """
    ratio = P.volume / F.volume
    relative_err = (P.volume_err + ratio * F.volume_err) / F.volume
    if relative_err > tol / 10:
        raise PrecisionError(f"volume error {relative_err:.2e} too large for tolerance {tol:.1e}",
                             err=relative_err, tol=tol)
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) < tol:
        return int(nearest)
    return None


def integral_pairs(entries: Sequence[CatalogEntry], tol: float = 1e-6) -> List[Tuple[CatalogEntry, CatalogEntry, int]]:
    """
    Ordered pairs (F, P) of distinct entries with Vol(P)/Vol(F) an integer >= 2.

    Pairs mixing compact and non-compact entries are included; callers filter them.
    """
    found = []
    for F in entries:
        for P in entries:
            if P.id == F.id or P.volume < 1.5 * F.volume:
                continue
            ratio = ratio_integrality(F, P, tol)
            if ratio is not None and ratio >= 2:
                found.append((F, P, ratio))
    logger.info("%d integral volume ratios among %d tetrahedra", len(found), len(entries))
    return found


def max_unbounded_ratio(entries: Sequence[CatalogEntry]) -> Tuple[float, CatalogEntry, CatalogEntry]:
    """Largest Vol(P)/Vol(F) over non-compact entries, with the attaining pair (F, P)."""
    noncompact = [entry for entry in entries if not entry.compact]
    if len(noncompact) < 2:
        raise DomainError("need at least two non-compact tetrahedra")
    smallest = min(noncompact, key=lambda entry: entry.volume)
    largest = max(noncompact, key=lambda entry: entry.volume)
    return largest.volume / smallest.volume, smallest, largest
