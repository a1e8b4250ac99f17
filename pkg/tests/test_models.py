from fractions import Fraction
from math import pi

import numpy as np
import pytest

from coxtet.errors import StructuralError
from coxtet.models import (PAIRS, RIGHT_ANGLE, AngleFrac, CandidatePair, DecomposedTet, FaceTrace,
                           FilterVerdict, Geometry, Provenance, TetShape, TriangleDecomp, as_angle,
                           pair_index)


def test_angle_frac_reduces():
    angle = AngleFrac(2, 6)
    assert (angle.num, angle.den) == (1, 3)
    assert angle.is_coxeter
    assert angle.radians == pytest.approx(pi / 3)
    assert angle.label == "3"
    assert AngleFrac(2, 5).label == "2/5"


@pytest.mark.parametrize("num, den", [(0, 3), (1, 1), (3, 2), (-1, 4)])
def test_angle_frac_rejects_non_angles(num, den):
    with pytest.raises(StructuralError):
        AngleFrac(num, den)


def test_as_angle():
    assert as_angle(4) == AngleFrac(1, 4)
    assert as_angle(Fraction(2, 5)) == AngleFrac(2, 5)
    with pytest.raises(StructuralError):
        as_angle("3")


def test_pair_index():
    assert [pair_index(i, j) for i, j in PAIRS] == list(range(6))
    assert pair_index(3, 1) == pair_index(1, 3)
    with pytest.raises(StructuralError):
        pair_index(2, 2)


def test_shape_from_labels_defaults_to_right_angles():
    shape = TetShape.from_labels({(0, 1): 5, (2, 1): 3, (2, 3): 4})
    assert shape.angle(1, 0) == AngleFrac.coxeter(5)
    assert shape.angle(0, 3) == RIGHT_ANGLE
    assert shape.is_coxeter


def test_shape_from_mapping_requires_every_pair():
    with pytest.raises(StructuralError):
        TetShape.from_mapping({(0, 1): 3})


def test_shape_relabel_and_links():
    shape = TetShape.from_labels({(0, 1): 5, (1, 2): 3, (2, 3): 4})
    reversed_shape = shape.relabel((3, 2, 1, 0))
    assert reversed_shape.angle(0, 1) == AngleFrac.coxeter(4)
    assert reversed_shape.angle(2, 3) == AngleFrac.coxeter(5)
    assert shape.link_angles(3) == (AngleFrac.coxeter(5), RIGHT_ANGLE, AngleFrac.coxeter(3))


def test_triangle_decomp_key_ignores_corner_order():
    first = TriangleDecomp(Geometry.EUCLIDEAN, (pi / 2, pi / 3, pi / 6), (pi / 2, pi / 3, pi / 6), 6,
                           side_patterns=(1, 2, 3), corner_tiles=(2, 1, 1))
    rotated = TriangleDecomp(Geometry.EUCLIDEAN, (pi / 3, pi / 6, pi / 2), (pi / 6, pi / 2, pi / 3), 6,
                             side_patterns=(2, 3, 1), corner_tiles=(1, 1, 2))
    assert first.key == rotated.key
    assert not first.second_type
    assert not first.trivial


def test_triangle_decomp_validates():
    with pytest.raises(ValueError):
        TriangleDecomp(Geometry.SPHERICAL, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0), 0, (0, 0, 0))


def test_face_trace_rejects_non_hyperbolic_face():
    trace = TriangleDecomp(Geometry.HYPERBOLIC, (1.0, 1.0, 1.5), (1.0, 1.0, 1.5), 1, (0, 0, 0))
    with pytest.raises(ValueError):
        FaceTrace(face=0, triangle=(1.0, 1.0, 1.5), trace=trace)


def test_provenance_checks_gluings():
    with pytest.raises(ValueError):
        Provenance(kind="glue", parents=("a",), faces=(0, 1), matching=(0, 1, 2, 3))
    with pytest.raises(ValueError):
        Provenance(kind="merge")


def test_decomposed_tet_seed_shape():
    shape = TetShape.from_labels({(0, 1): 5, (1, 2): 3, (2, 3): 4})
    with pytest.raises(ValueError):
        DecomposedTet(shape=shape, fundamental="H_1", tiles=2, depth=2,
                      provenance=Provenance(kind="seed"), key="0" * 20)
    with pytest.raises(ValueError):
        DecomposedTet(shape=shape, fundamental="H_1", tiles=1, depth=2,
                      provenance=Provenance(kind="seed"), key="0" * 20,
                      placements=(np.eye(4), np.eye(4)))


def test_candidate_pair_verdicts():
    pair = CandidatePair(F="H_12", P="H_24", ratio=5, compact=False)
    assert pair.survived and pair.eliminated_by is None
    pair.filters.append(FilterVerdict("volume", True, "ratio 5"))
    pair.filters.append(FilterVerdict("two_tile", False, "N = 2"))
    assert not pair.survived
    assert pair.eliminated_by.name == "two_tile"
    with pytest.raises(ValueError):
        CandidatePair(F="a", P="b", ratio=0, compact=True)
