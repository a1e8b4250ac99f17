import math

import pandas as pd

from coxtet.engine import SearchResult, SearchStats
from coxtet.models import CandidatePair, FilterVerdict
from coxtet.tables import TableBuilder, frame_records, markdown_table
from coxtet.volume import integral_pairs


def test_catalog_frame(catalog):
    frame = TableBuilder.catalog_frame(catalog)
    assert frame.shape == (32, 7)
    assert list(frame["id"]) == [entry.id for entry in catalog]
    assert frame["compact"].sum() == 9
    assert (frame.loc[~frame["compact"], "ideal"] > 0).all()


def test_markdown_table():
    frame = pd.DataFrame([{"name": "a|b", "flag": True, "value": 0.5, "empty": None}])
    lines = markdown_table(frame).splitlines()
    assert lines[0] == "| name | flag | value | empty |"
    assert lines[1] == "|---|---|---|---|"
    assert lines[2] == "| a\\|b | yes | 0.5000000000 |  |"


def test_ratio_frame_order(catalog):
    frame = TableBuilder.ratio_frame(integral_pairs(catalog.entries, catalog.config.tol_volume))
    assert list(frame["ratio"]) == sorted(frame["ratio"])
    assert frame["ratio"].min() >= 2
    compact = frame[frame["compact"] == True]  # noqa: E712
    assert [tuple(row) for row in compact[["F", "P", "ratio"]].itertuples(index=False)] == [("H_1", "H_3", 2)]


def test_candidate_frame():
    eliminated = CandidatePair(F="H_11", P="H_31", ratio=12, compact=False, filters=[
        FilterVerdict("two_tile", True, "ratio 12"),
        FilterVerdict("three_planes", False, "at most 14 tiles but no plane fits"),
    ])
    kept = CandidatePair(F="H_12", P="H_24", ratio=5, compact=False, filters=[
        FilterVerdict("two_tile", True, "ratio 5"),
        FilterVerdict("tessellation", True, "5 tiles"),
    ])
    frame = TableBuilder.candidate_frame([eliminated, kept])
    assert list(frame["filter"]) == ["three_planes", ""]
    assert list(frame["survived"]) == [False, True]
    assert frame.loc[1, "reason"] == "5 tiles"


def test_decomposition_frame(doubled_orthoscheme):
    F, seed, p, d = doubled_orthoscheme
    frame = TableBuilder.decomposition_frame(SearchResult(F, [seed, d], SearchStats()))
    assert list(frame["tuple"]) == ["(1,2)", f"(2,3 ; 0,0,{p},{p})"]
    assert list(frame["kind"]) == ["seed", "glue"]


def test_frame_records_are_native():
    frame = pd.DataFrame({"n": [1, 2], "x": [0.5, math.nan], "flag": [True, False]})
    records = frame_records(frame)
    assert records == [{"n": 1, "x": 0.5, "flag": True}, {"n": 2, "x": None, "flag": False}]
    assert type(records[0]["n"]) is int
    assert type(records[0]["flag"]) is bool
