import pytest

from coxtet.engine import SearchResult, SearchStats, matchings
from coxtet.errors import CertificationError, GlueRejection, RejectReason, StructuralError
from coxtet.models import RIGHT_ANGLE, DecomposedTet, DecompositionType, Geometry
from coxtet.triangles import link_decomposition, triangle_area, triangle_kind


def test_matchings():
    found = matchings(1, 3)
    assert len(found) == 6
    assert all(sigma[1] == 3 for sigma in found)
    assert len(set(found)) == 6


def test_seed(catalog, engine):
    F = catalog.lookup("[5,3,4]")
    seed = engine.seed(F)
    assert seed.is_seed
    assert (seed.tiles, seed.depth) == (1, 2)
    assert seed.shape == F.diagram
    assert len(seed.key) == 20
    assert len(seed.placements) == 1
    assert engine.seed(F).key == seed.key


def test_doubling_the_orthoscheme(catalog, doubled_orthoscheme):
    F, seed, p, d = doubled_orthoscheme
    assert (d.tiles, d.depth) == (2, 3)
    assert d.provenance.kind == "glue"
    assert d.provenance.parents == (seed.key, seed.key)
    assert d.provenance.faces == (p, p)
    assert catalog.by_shape(d.shape) is catalog.lookup("01:5, 12:3, 13:3")
    assert len(d.placements) == 2


def _face_with_one_right_angle(shape):
    for p in range(4):
        if sum(shape.angle(p, j) == RIGHT_ANGLE for j in range(4) if j != p) == 1:
            return p
    raise AssertionError("no such face")


def test_glue_rejects_one_flat_edge(catalog, engine):
    seed = engine.seed(catalog.lookup("[5,3,4]"))
    p = _face_with_one_right_angle(seed.shape)
    with pytest.raises(GlueRejection) as excinfo:
        engine.glue(seed, p, seed, p, (0, 1, 2, 3))
    assert excinfo.value.reason == RejectReason.C2


def test_glue_prunes_by_volume(catalog, engine):
    seed = engine.seed(catalog.lookup("H_32"))
    with pytest.raises(GlueRejection) as excinfo:
        engine.glue(seed, 0, seed, 0, (0, 1, 2, 3))
    assert excinfo.value.reason == RejectReason.PRUNED


def test_glue_prunes_by_tile_cap(catalog, engine):
    seed = engine.seed(catalog.lookup("[5,3,4]"))
    with pytest.raises(GlueRejection) as excinfo:
        engine.glue(seed, 0, seed, 0, (0, 1, 2, 3), max_tiles=1)
    assert excinfo.value.reason == RejectReason.PRUNED


def test_glue_structural_errors(catalog, engine):
    first = engine.seed(catalog.lookup("[5,3,4]"))
    second = engine.seed(catalog.lookup("[3,5,3]"))
    with pytest.raises(StructuralError):
        engine.glue(first, 0, second, 0, (0, 1, 2, 3))
    with pytest.raises(StructuralError):
        engine.glue(first, 0, first, 1, (0, 1, 2, 3))
    with pytest.raises(StructuralError):
        engine.glue(first, 0, first, 0, (0, 1, 1, 3))


def test_certify_doubling(engine, doubled_orthoscheme):
    _, _, _, d = doubled_orthoscheme
    report = engine.realize_and_certify(d)
    assert report.ok
    assert report.tiles == 2
    assert report.volume_residual < 1e-6 * 2
    assert report.seed == engine.config.seed
    assert report.samples > 0


def test_certify_needs_placements(engine, doubled_orthoscheme):
    _, _, _, d = doubled_orthoscheme
    bare = DecomposedTet(shape=d.shape, fundamental=d.fundamental, tiles=d.tiles, depth=d.depth,
                         provenance=d.provenance, key=d.key)
    with pytest.raises(CertificationError):
        engine.realize_and_certify(bare)


def test_face_traces_of_doubling(engine, doubled_orthoscheme):
    _, _, _, d = doubled_orthoscheme
    traces = engine.face_traces(d)
    assert [trace.face for trace in traces] == [0, 1, 2, 3]
    assert sorted(trace.trace.tiles for trace in traces) == [1, 1, 2, 2]
    for trace in traces:
        assert trace.trace.geometry == Geometry.HYPERBOLIC
        assert len(trace.trace.side_patterns) == 3


def test_face_traces_agree_with_triangle_engine(engine, doubled_orthoscheme):
    F, _, _, d = doubled_orthoscheme
    for trace in engine.face_traces(d):
        outer = trace.trace
        assert triangle_kind(trace.triangle) == Geometry.HYPERBOLIC
        assert outer.tiles * triangle_area(Geometry.HYPERBOLIC, outer.fundamental) == \
            pytest.approx(triangle_area(Geometry.HYPERBOLIC, trace.triangle))
        corners = [v for v in range(4) if v != trace.face]
        for v, touching in zip(corners, outer.corner_tiles):
            assert 1 <= touching <= link_decomposition(d, v, F.diagram).tiles


def test_classify_type(engine, doubled_orthoscheme):
    _, _, _, d = doubled_orthoscheme
    assert engine.classify_type(d, {d.key}) == DecompositionType.FIRST


def test_tuple_lines(catalog, engine, doubled_orthoscheme):
    F, seed, p, d = doubled_orthoscheme
    result = SearchResult(fundamental=F, decompositions=[seed, d], stats=SearchStats())
    assert result.tuple_line(seed) == "(1,2)"
    assert result.tuple_line(d) == f"(2,3 ; 0,0,{p},{p})"
    assert result.nontrivial == [d]
    assert result.keys == {seed.key, d.key}


def test_search_stats_as_dict():
    stats = SearchStats(rounds=2, attempts=10)
    stats.rejected[RejectReason.C2] += 3
    record = stats.as_dict()
    assert record["rejected"]["C2"] == 3
    assert record["rejected"]["pruned"] == 0
    assert set(record) == {"rounds", "attempts", "accepted", "duplicates", "rejected", "frontier_sizes"}


@pytest.mark.slow
def test_bounded_family_counts(family_search):
    counts = [len(family_search(f"bounded:{index}").nontrivial) for index in range(1, 5)]
    assert counts == [5, 5, 3, 2]


@pytest.mark.slow
def test_bounded_family_one_tiles(family_search):
    result = family_search("bounded:1")
    assert sorted(d.tiles for d in result.nontrivial) == [2, 2, 4, 4, 8]
    assert result.decompositions[0].is_seed
    assert result.stats.rejected[RejectReason.C1] > 0


@pytest.mark.slow
def test_unbounded_family_counts(family_search):
    counts = [len(family_search(f"unbounded:{index}").nontrivial) for index in range(1, 15)]
    assert counts == [19, 9, 1, 5, 2, 5, 3, 1, 3, 3, 2, 1, 1, 1]


@pytest.mark.slow
def test_unbounded_family_one_ends_with_24_tiles(family_search):
    result = family_search("unbounded:1")
    last = result.decompositions[-1]
    assert (last.tiles, last.depth) == (24, 8)
    assert result.tuple_line(last).startswith("(24,8 ; ")
    m, n = (result.index[parent] for parent in last.provenance.parents)
    assert result.decompositions[m].tiles + result.decompositions[n].tiles == 24


@pytest.mark.slow
def test_search_order_and_provenance(family_search):
    for name in ("bounded:1", "bounded:2", "unbounded:2"):
        result = family_search(name)
        order = [(d.tiles, d.depth, d.key) for d in result.decompositions]
        assert order == sorted(order)
        for d in result.nontrivial:
            m, n = (result.index[parent] for parent in d.provenance.parents)
            assert m < result.index[d.key] and n < result.index[d.key]
            assert d.depth == 1 + max(result.decompositions[m].depth, result.decompositions[n].depth)


@pytest.mark.slow
def test_glue_is_symmetric(engine, family_search):
    result = family_search("bounded:1")
    for d in result.nontrivial:
        first, second = (result.decompositions[result.index[key]] for key in d.provenance.parents)
        p, q = d.provenance.faces
        sigma = d.provenance.matching
        inverse = tuple(sigma.index(face) for face in range(4))
        swapped = engine.glue(second, q, first, p, inverse)
        assert (swapped.key, swapped.tiles, swapped.depth) == (d.key, d.tiles, d.depth)
        assert swapped.shape == d.shape


@pytest.mark.slow
def test_shuffled_search_is_identical(catalog, engine, family_search):
    result = family_search("bounded:2")
    shuffled = engine.search_first_type(result.fundamental, shuffle_seed=7)
    assert [d.key for d in shuffled.decompositions] == [d.key for d in result.decompositions]
    assert [shuffled.tuple_line(d) for d in shuffled.decompositions] == \
        [result.tuple_line(d) for d in result.decompositions]


@pytest.mark.slow
def test_every_bounded_decomposition_certifies(engine, family_search):
    for index in range(1, 5):
        result = family_search(f"bounded:{index}")
        for d in result.decompositions:
            report = engine.realize_and_certify(d)
            assert report.ok, report.counterexamples
            assert report.volume_residual < 1e-6 * d.tiles
            assert engine.classify_type(d, result.keys) == DecompositionType.FIRST


@pytest.mark.slow
def test_unbounded_family_one_certifies(engine, family_search):
    result = family_search("unbounded:1")
    for d in result.decompositions:
        assert engine.realize_and_certify(d).ok


@pytest.mark.slow
def test_every_unbounded_decomposition_is_first_type(engine, family_search):
    for index in range(1, 15):
        result = family_search(f"unbounded:{index}")
        for d in result.decompositions:
            assert engine.realize_and_certify(d).ok
            assert engine.classify_type(d, result.keys) == DecompositionType.FIRST
