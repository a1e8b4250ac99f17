from math import pi

import pytest

from coxtet.errors import CertificationError
from coxtet.models import DecompositionType
from coxtet.second_type import FILTER_ORDER, LinkOptions, tessellate


def _ratio(F, P):
    return round(P.volume / F.volume)


def test_link_options_counts():
    option = LinkOptions(vertex=0, ideal=True, fundamental=True, decomposed=[(4, 1), (9, 1)])
    assert option.counts == [1, 4, 9]
    assert not option.empty
    assert LinkOptions(vertex=1, ideal=False, fundamental=False).empty


def test_self_similar_links_are_kept(analyzer, actor):
    F, P = actor("H_12"), actor("H_32")
    for option in analyzer.link_options(F, P, 12):
        assert option.ideal and option.fundamental
        assert option.counts == [1, 4, 9]


@pytest.mark.parametrize("container, ratio, counts", [("H_24", 5, [1, 4]), ("H_32", 12, [1, 1, 1, 9])])
def test_ideal_counts_add_up(analyzer, actor, container, ratio, counts):
    pair = analyzer.filter_pair(actor("H_12"), actor(container), ratio)
    verdict = pair.filters[-1]
    assert verdict.name == "three_planes" and verdict.passed
    assert sorted(verdict.details["counts"]) == counts
    assert verdict.details["bound"] == ratio


def test_compact_candidates(analyzer, actor):
    pairs = [(F.id, P.id, ratio) for F, P, ratio in analyzer.candidate_pairs(compact=True)]
    assert pairs == [(actor("H_1").id, actor("H_3").id, 2)]


def test_noncompact_candidates_match_compactness(analyzer):
    pairs = analyzer.candidate_pairs(compact=False)
    assert pairs
    assert all(not F.compact and not P.compact and ratio >= 2 for F, P, ratio in pairs)


def test_two_tiles_eliminated(analyzer, actor):
    pair = analyzer.filter_pair(actor("H_1"), actor("H_3"), 2)
    assert [verdict.name for verdict in pair.filters] == ["volume", "two_tile"]
    assert pair.eliminated_by.name == "two_tile"


def test_three_planes_elimination(analyzer, actor):
    F, P = actor("H_11"), actor("H_31")
    assert _ratio(F, P) == 12
    pair = analyzer.filter_pair(F, P, 12)
    verdict = pair.eliminated_by
    assert verdict.name == "three_planes"
    assert verdict.details["bound"] == 14
    assert any(abs(angle - 2 * pi / 3) < 1e-6 for angle in verdict.details["plane_angles"])


def test_unique_ideal_elimination(analyzer, actor):
    F, P = actor("H_10"), actor("H_32")
    assert _ratio(F, P) == 24
    verdict = analyzer.filter_pair(F, P, 24).eliminated_by
    assert verdict.name == "unique_ideal"
    assert verdict.details["bound"] == 72
    assert "72 > 24" in verdict.reason


@pytest.mark.parametrize("container, ratio", [("H_24", 5), ("H_32", 12)])
def test_survivors(analyzer, actor, container, ratio):
    F, P = actor("H_12"), actor(container)
    assert _ratio(F, P) == ratio
    pair = analyzer.filter_pair(F, P, ratio)
    assert pair.survived, pair.eliminated_by
    assert [verdict.name for verdict in pair.filters] == list(FILTER_ORDER)
    assert all(not option.empty for option in analyzer.link_options(F, P, ratio))


def test_filters_run_in_order(analyzer):
    for pair in analyzer.filter_pipeline(compact=False):
        names = [verdict.name for verdict in pair.filters]
        assert names == list(FILTER_ORDER[:len(names)])
        assert all(verdict.passed for verdict in pair.filters[:-1])
        assert pair.filters[-1].reason


def test_three_planes_bound_without_match(analyzer, actor):
    F, P = actor("H_12"), actor("H_24")
    bound, details = analyzer.three_planes_bound(F, P, P.ideal_vertices[0], 23, F.ideal_vertices[0])
    assert bound == 23
    assert details["tiles"] == 23


@pytest.mark.slow
def test_tessellation_of_h24(analyzer, engine, actor):
    d = analyzer.verify_tessellation(actor("H_12"), actor("H_24"))
    assert d.tiles == 5
    assert d.provenance.kind == "tessellation"
    assert d.provenance.parents == (actor("H_12").id, actor("H_24").id)
    assert engine.realize_and_certify(d).ok
    assert engine.classify_type(d, set()) == DecompositionType.SECOND


@pytest.mark.slow
def test_failed_tessellation_reports_counterexample(actor):
    F, P = actor("H_11"), actor("H_31")
    with pytest.raises(CertificationError) as excinfo:
        tessellate(F, P, 12)
    counterexample = excinfo.value.counterexample
    assert (counterexample["F"], counterexample["P"], counterexample["ratio"]) == (F.id, P.id, 12)
    assert {"seatings", "best_tiles"} <= set(counterexample)


@pytest.mark.slow
def test_second_type_classification(analyzer, actor):
    decompositions = analyzer.second_type_classification()
    assert sorted(d.tiles for d in decompositions) == [5, 12]
    assert {d.fundamental for d in decompositions} == {actor("H_12").id}
    assert {d.provenance.parents[1] for d in decompositions} == {actor("H_24").id, actor("H_32").id}
    report = analyzer.analyze()
    assert all(certificate.ok for certificate in report.certificates)
    survivors = {(pair.F, pair.P) for pair in report.candidates if pair.survived}
    assert survivors >= {(actor("H_12").id, actor("H_24").id), (actor("H_12").id, actor("H_32").id)}


@pytest.mark.slow
def test_bounded_only_has_no_second_type(analyzer):
    assert analyzer.second_type_classification(compact=True) == []
