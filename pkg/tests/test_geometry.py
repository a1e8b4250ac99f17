from itertools import permutations
from math import acos, pi, sin

import numpy as np
import pytest

from coxtet.errors import StructuralError
from coxtet.geometry import (angle_add, face_angle, face_angles, gram_matrix, is_hyperbolic,
                             link_face_angle, signature, triangle_geometry, vertex_type)
from coxtet.models import AngleFrac, Geometry, SumKind, TetShape, VertexType


def linear(p, q, r):
    return TetShape.from_labels({(0, 1): p, (1, 2): q, (2, 3): r})


ALL_THIRDS = TetShape.from_labels({pair: 3 for pair in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))})


def test_angle_add():
    assert angle_add(AngleFrac(1, 4), AngleFrac(1, 4)) == AngleFrac(1, 2)
    assert angle_add(AngleFrac(1, 3), AngleFrac(2, 3)) is SumKind.FLAT
    assert angle_add(AngleFrac(1, 2), AngleFrac(1, 2)) is SumKind.FLAT
    assert angle_add(AngleFrac(1, 2), AngleFrac(2, 3)) is SumKind.REFLEX


def test_gram_matrix_entries():
    gram = gram_matrix(linear(5, 3, 4))
    assert np.allclose(np.diag(gram), 1.0)
    assert gram[0, 1] == pytest.approx(-np.cos(pi / 5))
    assert gram[2, 3] == pytest.approx(-np.cos(pi / 4))
    assert gram[0, 3] == pytest.approx(0.0)
    assert np.allclose(gram, gram.T)


def test_gram_matrix_needs_six_angles():
    with pytest.raises(StructuralError):
        gram_matrix(object())


def test_compact_orthoscheme():
    shape = linear(5, 3, 4)
    assert signature(shape.gram) == (3, 1, 0)
    assert all(vertex_type(shape, v) == VertexType.FINITE for v in range(4))
    assert is_hyperbolic(shape)


def test_one_ideal_vertex():
    shape = linear(3, 3, 6)
    # deleting face 0 leaves the Euclidean [3,6]
    assert vertex_type(shape, 0) == VertexType.IDEAL
    assert [vertex_type(shape, v) for v in (1, 2, 3)] == [VertexType.FINITE] * 3
    assert is_hyperbolic(shape)


def test_regular_ideal_tetrahedron():
    assert signature(ALL_THIRDS.gram) == (3, 1, 0)
    assert ALL_THIRDS.vertex_class == (VertexType.IDEAL,) * 4
    for f in range(4):
        assert face_angles(ALL_THIRDS, f) == pytest.approx((0.0, 0.0, 0.0), abs=1e-7)


def test_spherical_and_ultra_ideal_shapes_are_not_hyperbolic():
    assert signature(linear(3, 3, 3).gram) == (4, 0, 0)
    assert not is_hyperbolic(linear(3, 3, 3))
    # the [7,3] links are hyperbolic triangles
    assert not is_hyperbolic(linear(7, 3, 7))


def test_face_angle_of_orthoscheme():
    shape = linear(5, 3, 4)
    # cosine rule of the link triangle with angles pi/5, pi/2 at the side ends and pi/3 opposite
    expected = acos(0.5 / sin(pi / 5))
    assert face_angle(shape, 0, 3) == pytest.approx(expected)
    assert face_angle(shape, 0, 1) == pytest.approx(pi / 4)
    with pytest.raises(StructuralError):
        face_angle(shape, 2, 2)


def test_link_face_angle_degenerate():
    with pytest.raises(StructuralError):
        link_face_angle(0.0, pi / 3, pi / 3)


@pytest.mark.parametrize("labels, geometry", [
    ((2, 3, 5), Geometry.SPHERICAL),
    ((3, 3, 3), Geometry.EUCLIDEAN),
    ((2, 3, 7), Geometry.HYPERBOLIC),
])
def test_triangle_geometry(labels, geometry):
    assert triangle_geometry([AngleFrac.coxeter(m) for m in labels]) == geometry


@pytest.mark.parametrize("shape", [linear(5, 3, 4), linear(3, 3, 6), linear(3, 3, 3), ALL_THIRDS])
def test_signature_ignores_face_order(shape):
    expected = signature(shape.gram)
    for perm in permutations(range(4)):
        relabeled = shape.relabel(perm)
        assert signature(relabeled.gram) == expected
        assert [vertex_type(relabeled, v) for v in range(4)] == [vertex_type(shape, perm[v]) for v in range(4)]


def test_link_face_angle_is_symmetric():
    for a, b, c in permutations((pi / 2, pi / 3, pi / 5)):
        assert link_face_angle(a, b, c) == pytest.approx(link_face_angle(b, a, c))


def test_face_angle_follows_relabeling():
    shape = linear(5, 3, 4)
    for perm in permutations(range(4)):
        relabeled = shape.relabel(perm)
        for f in range(4):
            for v in range(4):
                if v != f:
                    assert face_angle(relabeled, f, v) == pytest.approx(face_angle(shape, perm[f], perm[v]))
