import json

import pytest

from coxtet import cli
from coxtet.engine import DecompositionEngine, SearchResult, SearchStats
from coxtet.errors import ClassificationError, PrecisionError
from coxtet.models import CertificationReport
from coxtet.second_type import SecondTypeAnalyzer


@pytest.fixture(autouse=True)
def shared_cache(monkeypatch, cache_dir):
    monkeypatch.setenv("COXTET_CACHE_DIR", str(cache_dir))


def test_every_command_has_a_handler():
    assert set(cli.COMMANDS) == set(cli.HANDLERS)


def test_enumerate_json_from_suffix(tmp_path):
    target = tmp_path / "cat.json"
    assert cli.main(["enumerate", "--out", str(target)]) == cli.EXIT_OK
    document = json.loads(target.read_text())
    assert document["kind"] == "catalog"
    assert len(document["entries"]) == 32


def test_enumerate_markdown(capsys):
    assert cli.main(["enumerate"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("32 hyperbolic Coxeter tetrahedra (9 compact, 23 non-compact)")


def test_out_directory(tmp_path):
    assert cli.main(["enumerate", "--format", "dot", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert (tmp_path / "enumerate.dot").read_text().count("graph ") == 32


def test_volumes_json(capsys):
    assert cli.main(["volumes", "--format", "json"]) == cli.EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["max_unbounded_ratio"] == pytest.approx(24.0, abs=1e-6)
    assert (document["smallest"], document["largest"]) == ("H_10", "H_32")
    assert {"F": "H_1", "P": "H_3", "ratio": 2, "compact": True} in document["integral_pairs"]


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["search"],
    ["search", "--fundamental", "H_1", "--family", "bounded:1"],
    ["search", "--fundamental", "[3,3,3]"],
    ["search", "--family", "bounded:9"],
    ["volumes", "--format", "dot"],
    ["enumerate", "--max-label", "4"],
    ["report", "--families", "bounded:1,nowhere:2"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == cli.EXIT_USAGE
    assert capsys.readouterr().err


def test_seed_search_dot(capsys):
    assert cli.main(["search", "--fundamental", "[5,3,4]", "--format", "dot",
                     "--max-tiles", "1", "--no-cache"]) == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("graph ")


@pytest.mark.parametrize("error, code", [
    (ClassificationError("third type"), cli.EXIT_CLASSIFICATION),
    (PrecisionError("ratio not resolved", err=1e-3, tol=1e-6), cli.EXIT_PRECISION),
])
def test_error_exit_codes(monkeypatch, error, code):
    def fail(self, compact=None):
        raise error

    monkeypatch.setattr(SecondTypeAnalyzer, "analyze", fail)
    assert cli.main(["second-type"]) == code


@pytest.mark.slow
def test_unbounded_family_search(capsys):
    assert cli.main(["search", "--family", "unbounded:1", "--format", "md"]) == cli.EXIT_OK
    block = capsys.readouterr().out.split("```")[1].strip().splitlines()
    assert len(block) == 19
    assert block[-1].startswith("(24,8")


@pytest.mark.slow
def test_second_type(tmp_path):
    target = tmp_path / "second.json"
    assert cli.main(["second-type", "--out", str(target)]) == cli.EXIT_OK
    second = json.loads(target.read_text())["second_type"]
    assert sorted(d["tiles"] for d in second["decompositions"]) == [5, 12]


@pytest.mark.slow
def test_report_is_identical_across_jobs(tmp_path):
    outputs = []
    for jobs in ("1", "2"):
        target = tmp_path / f"report-{jobs}.md"
        argv = ["report", "--families", "bounded:1,unbounded:3", "--jobs", jobs, "--no-cache", "--out", str(target)]
        assert cli.main(argv) == cli.EXIT_OK
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]


def test_report_fails_on_bad_certificate(monkeypatch, tmp_path):
    def seed_only(self, entry, shuffle_seed=None):
        return SearchResult(entry, [self.engine.seed(entry)], SearchStats())

    def broken(self, d):
        return CertificationReport(key=d.key, tiles=d.tiles, volume_residual=0.0, overlaps=1,
                                   mirror_violations=0, samples=64, seed=0)

    monkeypatch.setattr(cli.Session, "search", seed_only)
    monkeypatch.setattr(DecompositionEngine, "realize_and_certify", broken)
    target = tmp_path / "report.md"
    argv = ["report", "--families", "bounded:1", "--skip-second-type", "--out", str(target)]
    assert cli.main(argv) == cli.EXIT_CLASSIFICATION
    assert "# Verification" in target.read_text()
    assert cli.main(argv + ["--skip-certify"]) == cli.EXIT_OK
