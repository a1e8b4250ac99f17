from math import pi

import pytest

from coxtet.errors import DomainError
from coxtet.models import AngleFrac, Geometry
from coxtet.triangles import (MirrorArrangement, arrangement_for, coxeter_triangles, link_decomposition,
                              same_triangle, search_triangle_decompositions, triangle_area,
                              triangle_decomposition_exists, triangle_kind)


def angles(*labels):
    return tuple(pi / m for m in labels)


def test_coxeter_triangles():
    spherical = coxeter_triangles(Geometry.SPHERICAL, max_label=6)
    assert tuple(AngleFrac.coxeter(m) for m in (2, 3, 5)) in spherical
    assert len(spherical) == 5 + 3
    assert len(coxeter_triangles(Geometry.EUCLIDEAN)) == 3
    with pytest.raises(DomainError):
        coxeter_triangles(Geometry.HYPERBOLIC)


def test_triangle_kind_and_area():
    assert triangle_kind(angles(2, 3, 5)) == Geometry.SPHERICAL
    assert triangle_kind(angles(2, 3, 6)) == Geometry.EUCLIDEAN
    assert triangle_kind(angles(2, 3, 7)) == Geometry.HYPERBOLIC
    assert triangle_area(Geometry.SPHERICAL, angles(2, 3, 5)) == pytest.approx(pi / 30)
    assert triangle_area(Geometry.HYPERBOLIC, angles(2, 3, 7)) == pytest.approx(pi / 42)
    assert triangle_area(Geometry.EUCLIDEAN, angles(3, 3, 3)) is None


def test_same_triangle():
    assert same_triangle(angles(2, 3, 6), angles(6, 2, 3))
    assert not same_triangle(angles(2, 4, 4), angles(2, 3, 6))


def test_arrangement_rejects_wrong_geometry():
    with pytest.raises(DomainError):
        MirrorArrangement(Geometry.EUCLIDEAN, angles(2, 3, 5))


def test_base_tile_area():
    arrangement = arrangement_for(Geometry.SPHERICAL, angles(2, 3, 5), 32)
    assert arrangement.area == pytest.approx(pi / 30, rel=1e-6)
    assert len(arrangement.tiles_in(arrangement.sides(arrangement.base))) == 1


def test_spherical_second_type():
    found = search_triangle_decompositions(Geometry.SPHERICAL, max_tiles=24)
    assert len(found) == 1
    (decomposition,) = found
    assert decomposition.tiles == 15
    assert decomposition.second_type
    assert any(abs(angle - pi / 5) < 1e-9 for angle in decomposition.fundamental)
    # a (pi/2, pi/2, pi/2) triangle cut into 15 triangles (pi/2, pi/3, pi/5)
    assert same_triangle(decomposition.outer, angles(2, 2, 2), 1e-7)
    assert decomposition.tiles * pi / 30 == pytest.approx(triangle_area(Geometry.SPHERICAL, decomposition.outer))


@pytest.mark.slow
def test_spherical_second_type_list_is_complete():
    found = search_triangle_decompositions(Geometry.SPHERICAL, max_tiles=60)
    assert [d.key for d in found] == [d.key for d in search_triangle_decompositions(Geometry.SPHERICAL, max_tiles=24)]
    assert [d.tiles for d in found] == [15]


def test_euclidean_second_type():
    found = search_triangle_decompositions(Geometry.EUCLIDEAN, max_tiles=24)
    assert len(found) == 5
    assert sorted(d.tiles for d in found) == [4, 9, 9, 16, 18]
    equilateral = sorted(d.tiles for d in found if same_triangle(d.outer, angles(3, 3, 3), 1e-7))
    assert equilateral[:2] == [4, 9]
    assert all(d.second_type for d in found)


def test_first_type_triangle_decompositions():
    found = search_triangle_decompositions(Geometry.SPHERICAL, angles(2, 3, 5), max_tiles=4,
                                           second_type_only=False)
    assert found
    assert all(not d.second_type for d in found)
    doubled = [d for d in found if d.tiles == 2]
    # doubling across a side
    assert doubled
    trivial = search_triangle_decompositions(Geometry.SPHERICAL, angles(2, 3, 5), max_tiles=1,
                                             second_type_only=False, include_trivial=True)
    assert [d.tiles for d in trivial] == [1]


def test_hyperbolic_search_needs_fundamental():
    with pytest.raises(DomainError):
        search_triangle_decompositions(Geometry.HYPERBOLIC)


def test_decomposition_exists():
    assert triangle_decomposition_exists(angles(2, 4, 4), angles(2, 4, 4), max_tiles=64)
    assert triangle_decomposition_exists(angles(2, 3, 5), angles(2, 2, 2))
    assert not triangle_decomposition_exists(angles(2, 3, 5), angles(2, 3, 3))
    assert triangle_decomposition_exists(angles(2, 3, 6), angles(3, 3, 3))
    with pytest.raises(DomainError):
        triangle_decomposition_exists(angles(2, 3, 5), angles(3, 3, 3))


def test_nine_tile_right_isosceles():
    arrangement = arrangement_for(Geometry.EUCLIDEAN, angles(2, 4, 4), 64)
    counts = {d.tiles for d in arrangement.decompositions(second_type_only=True)}
    assert 9 in counts
    assert min(counts) == 9


def test_link_decomposition(doubled_orthoscheme):
    F, _, _, d = doubled_orthoscheme
    links = [link_decomposition(d, v, F.diagram) for v in range(4)]
    assert sorted(link.tiles for link in links) == [1, 1, 2, 2]
    for v, link in enumerate(links):
        assert link.geometry == Geometry.SPHERICAL
        assert same_triangle(link.outer, [angle.radians for angle in d.shape.link_angles(v)])
