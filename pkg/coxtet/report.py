"""
Report documents and exports: catalog, first-type tables, second-type case analysis.

Every document is rendered deterministically: rows follow catalog and search
order, floats are rounded before serialization and JSON keys are sorted.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from coxtet import __version__
from coxtet.cache import decomposition_record
from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.crossref import FamilySeed, actor_table
from coxtet.diagrams import DiagramRenderer
from coxtet.engine import DecompositionEngine, SearchResult
from coxtet.models import CertificationReport, DecomposedTet, FaceTrace
from coxtet.schemas import validate
from coxtet.second_type import SecondTypeReport
from coxtet.tables import TableBuilder, frame_records, markdown_table
from coxtet.volume import integral_pairs, max_unbounded_ratio

logger = logging.getLogger(__name__)

FORMATS = ("json", "md", "dot")
DIGITS = 12

FACE_ORDER_NOTE = ("Faces are numbered in the catalog's canonical order. For a family drawn "
                   "from left to right, canonical face i is drawn face face_order[i].")


def _round(value: float) -> float:
    return round(float(value), DIGITS) + 0.0


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def trace_record(trace: FaceTrace) -> Dict[str, Any]:
    return {
        "face": trace.face,
        "triangle": [_round(angle) for angle in trace.triangle],
        "fundamental": [_round(angle) for angle in trace.trace.fundamental],
        "tiles": trace.trace.tiles,
        "side_patterns": list(trace.trace.side_patterns),
        "corner_tiles": list(trace.trace.corner_tiles),
    }


def catalog_document(catalog: CoxeterCatalog) -> Dict[str, Any]:
    """The catalog export, validated against catalog.schema.json."""
    entries = []
    for record in catalog.records():
        record = dict(record, volume=_round(record["volume"]), volume_err=float(record["volume_err"]))
        entries.append(record)
    document = {
        "kind": "catalog",
        "version": __version__,
        "config_fingerprint": catalog.config.fingerprint(),
        "entries": entries,
    }
    validate(document, "catalog")
    return document


def search_document(result: SearchResult, engine: DecompositionEngine,
                    family: Optional[FamilySeed] = None) -> Dict[str, Any]:
    """The first-type export of one search, validated against decomposition.schema.json."""
    decompositions = []
    for d in result.decompositions:
        record = decomposition_record(d, placements=False)
        record["tuple"] = result.tuple_line(d)
        record["faces"] = [trace_record(trace) for trace in engine.face_traces(d)]
        decompositions.append(record)
    document = {
        "kind": "search",
        "version": __version__,
        "fundamental": result.fundamental.id,
        "family": family.name if family else None,
        "face_order": list(family.face_order if family else range(4)),
        "seed": engine.config.seed,
        "decompositions": decompositions,
        "stats": result.stats.as_dict(),
    }
    validate(document, "decomposition")
    return document


def search_markdown(result: SearchResult, family: Optional[FamilySeed] = None) -> str:
    """
    Tuple lines of the non-trivial decompositions of one search, each followed by its canonical key.

    The seed is number 0 in the (m,n) references and is listed above the block.
    """
    title = family.name if family else result.fundamental.id
    lines = [f"## {title} ({result.fundamental.id})", ""]
    if family is not None:
        lines.append(f"face_order = {list(family.face_order)}")
        lines.append("")
    frame = TableBuilder.decomposition_frame(result)
    seeds = frame[frame["kind"] == "seed"]
    if len(seeds):
        lines.append(f"0 = {seeds.iloc[0]['tuple']} seed {seeds.iloc[0]['key']}")
        lines.append("")
    lines.append("```")
    for record in frame[frame["kind"] != "seed"].itertuples(index=False):
        lines.append(f"{record.tuple:<22} {record.key}")
    lines.append("```")
    return "\n".join(lines) + "\n"


def catalog_dot(catalog: CoxeterCatalog) -> str:
    """DOT source with one graph per catalog entry."""
    return "".join(DiagramRenderer.to_dot(entry.diagram, entry.id, tuple(entry.ideal_vertices))
                   for entry in catalog)


@dataclass
class FamilySection:
    """One first-type table: the search over a family seed and its certificates."""
    family: FamilySeed
    result: SearchResult
    certificates: List[CertificationReport] = field(default_factory=list)

    def certificate(self, key: str) -> Optional[CertificationReport]:
        for report in self.certificates:
            if report.key == key:
                return report
        return None


@dataclass
class ReportDocument:
    """The full classification report."""
    catalog: CoxeterCatalog
    config: EngineConfig
    families: List[FamilySection]
    second_type: Optional[SecondTypeReport] = None

    def failed_certificates(self) -> List[CertificationReport]:
        """Certificates that are not ok, first-type sections first."""
        reports = [report for section in self.families for report in section.certificates]
        if self.second_type is not None:
            reports += self.second_type.certificates
        return [report for report in reports if not report.ok]

    # -- json --------------------------------------------------------------

    def _line(self, result: SearchResult, d: DecomposedTet,
              report: Optional[CertificationReport]) -> Dict[str, Any]:
        return {
            "tuple": result.tuple_line(d),
            "key": d.key,
            "tiles": d.tiles,
            "depth": d.depth,
            "certified": report.ok if report else None,
            "volume_residual": _round(report.volume_residual) if report else None,
        }

    def to_dict(self) -> Dict[str, Any]:
        """JSON form, validated against report.schema.json."""
        ratio, _, _ = max_unbounded_ratio(self.catalog.entries)
        pairs = integral_pairs(self.catalog.entries, self.config.tol_volume)
        families = []
        for section in self.families:
            result = section.result
            families.append({
                "name": section.family.name,
                "fundamental": result.fundamental.id,
                "face_order": list(section.family.face_order),
                "lines": [self._line(result, d, section.certificate(d.key)) for d in result.decompositions],
                "rejections": result.stats.as_dict()["rejected"],
            })
        second: Dict[str, Any] = {"candidates": [], "decompositions": [], "failures": {}}
        if self.second_type is not None:
            second["candidates"] = [{
                "F": pair.F,
                "P": pair.P,
                "ratio": pair.ratio,
                "survived": pair.survived,
                "filters": [{"name": v.name, "passed": v.passed, "reason": v.reason}
                            for v in pair.filters],
            } for pair in self.second_type.candidates]
            second["decompositions"] = [{
                "tuple": f"({d.tiles},{d.depth})",
                "key": d.key,
                "tiles": d.tiles,
                "depth": d.depth,
                "certified": report.ok,
                "volume_residual": _round(report.volume_residual),
            } for d, report in zip(self.second_type.decompositions, self.second_type.certificates)]
            second["failures"] = self.second_type.failures
        document = {
            "kind": "report",
            "version": __version__,
            "config_fingerprint": self.config.fingerprint(),
            "seed": self.config.seed,
            "catalog": self._catalog_rows(),
            "volumes": {
                "max_unbounded_ratio": _round(ratio),
                "integral_pairs": frame_records(TableBuilder.ratio_frame(pairs)),
            },
            "families": families,
            "second_type": second,
        }
        validate(document, "report")
        return document

    def _catalog_rows(self) -> List[Dict[str, Any]]:
        frame = TableBuilder.catalog_frame(self.catalog)
        rows = frame_records(frame[["id", "diagram", "compact", "volume", "canonical_key"]])
        return [dict(row, volume=_round(row["volume"])) for row in rows]

    def to_json(self) -> str:
        return dumps(self.to_dict())

    # -- markdown ----------------------------------------------------------

    def to_markdown(self) -> str:
        """Markdown with catalog, volume ratios, first-type tables, second type and an appendix."""
        parts = [
            "# Coxeter decompositions of hyperbolic tetrahedra",
            "",
            f"coxtet {__version__}, configuration {self.config.fingerprint()}, "
            f"sampling seed {self.config.seed}.",
            "",
            FACE_ORDER_NOTE,
            "",
            "## Catalog",
            "",
            markdown_table(TableBuilder.catalog_frame(self.catalog)),
            "",
            "Named tetrahedra:",
            "",
        ]
        parts.extend(f"- {name} = {entry_id}" for name, entry_id, _ in actor_table(self.catalog))
        parts.append("")

        ratio, smallest, largest = max_unbounded_ratio(self.catalog.entries)
        parts += [
            "## Volume ratios",
            "",
            f"Largest ratio of non-compact volumes: {ratio:.9f} ({largest.id}/{smallest.id}).",
            "",
            markdown_table(TableBuilder.ratio_frame(integral_pairs(self.catalog.entries,
                                                                   self.config.tol_volume))),
            "",
        ]

        if self.families:
            parts += ["# First type", "",
                      markdown_table(TableBuilder.family_summary(
                          [(section.family.name, section.result) for section in self.families])), ""]
            for section in self.families:
                parts.append(search_markdown(section.result, section.family))

        if self.second_type is not None:
            parts += ["# Second type", "",
                      markdown_table(TableBuilder.candidate_frame(self.second_type.candidates)), ""]
            if self.second_type.decompositions:
                parts.append("Second-type decompositions:")
                parts.append("")
                for d in self.second_type.decompositions:
                    F, P = d.provenance.parents
                    parts.append(f"- {P} by {F}: {d.tiles} tiles, key {d.key}")
            else:
                parts.append("No second-type decompositions.")
            parts.append("")

        parts += self._appendix()
        return "\n".join(parts).rstrip("\n") + "\n"

    def _appendix(self) -> List[str]:
        rows = []
        for section in self.families:
            for report in section.certificates:
                rows.append((section.family.name, report))
        if self.second_type is not None:
            rows += [("second type", report) for report in self.second_type.certificates]
        if not rows:
            return []
        lines = ["# Verification", "",
                 "| source | key | tiles | volume residual | overlaps | mirror violations | samples | ok |",
                 "|---|---|---|---|---|---|---|---|"]
        for source, report in rows:
            lines.append(f"| {source} | {report.key} | {report.tiles} | {report.volume_residual:.3e} | "
                         f"{report.overlaps} | {report.mirror_violations} | {report.samples} | "
                         f"{'yes' if report.ok else 'no'} |")
        lines.append("")
        if self.second_type is not None:
            lines += ["Filter reasons:", ""]
            for pair in self.second_type.candidates:
                reasons = "; ".join(f"{v.name}: {v.reason}" for v in pair.filters)
                lines.append(f"- {pair.F}/{pair.P}: {reasons}")
            lines.append("")
        return lines

    # -- dot ---------------------------------------------------------------

    def to_dot(self) -> str:
        """Diagrams of the catalog entries that head a family or take part in a second-type pair."""
        ids: List[str] = [section.result.fundamental.id for section in self.families]
        if self.second_type is not None:
            for d in self.second_type.decompositions:
                ids.extend(d.provenance.parents)
        if not ids:
            return catalog_dot(self.catalog)
        seen = []
        for entry_id in ids:
            if entry_id not in seen:
                seen.append(entry_id)
        entries = [self.catalog.lookup(entry_id) for entry_id in seen]
        return "".join(DiagramRenderer.to_dot(entry.diagram, entry.id, tuple(entry.ideal_vertices))
                       for entry in entries)

    def render(self, fmt: str) -> str:
        """
        Render in one of FORMATS.

        Raises:
            ValueError: for unknown formats
        """
        if fmt == "json":
            return self.to_json()
        if fmt == "md":
            return self.to_markdown()
        if fmt == "dot":
            return self.to_dot()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


class ReportBuilder:
    """Runs the searches, certification and second-type analysis behind a report."""

    def __init__(self, catalog: CoxeterCatalog, engine: DecompositionEngine, analyzer=None, search=None):
        """
        Initialize the builder.

        Args:
            catalog: The catalog
            engine: Engine used for searches and certification
            analyzer: SecondTypeAnalyzer; the second-type section is skipped when None
            search: Callable (family seed, entry) -> SearchResult, e.g. a cached search;
                    defaults to engine.search_first_type
        """
        self.catalog = catalog
        self.engine = engine
        self.analyzer = analyzer
        self.search = search or (lambda seed, entry: engine.search_first_type(entry))

    def family_section(self, seed: FamilySeed, certify: bool = True) -> FamilySection:
        """Search one family and, unless certify is False, realize and certify each of its decompositions."""
        entry = self.catalog.lookup(seed.diagram)
        result = self.search(seed, entry)
        certificates = [self.engine.realize_and_certify(d) for d in result.decompositions] if certify else []
        failed = [report.key for report in certificates if not report.ok]
        if failed:
            logger.error("%s: certification failed for %s", seed.name, failed)
        return FamilySection(family=seed, result=result, certificates=certificates)

    def build(self, families: Sequence[FamilySeed], certify: bool = True,
              compact: Optional[bool] = None) -> ReportDocument:
        """
        Assemble the whole report.

        Args:
            families: Family seeds to search, in report order
            certify: Whether to certify each decomposition found
            compact: Restrict the second-type analysis to compact (True) or non-compact (False) pairs

        Returns:
            The report document; the second-type part is None without an analyzer
        """
        sections = [self.family_section(seed, certify) for seed in families]
        second = self.analyzer.analyze(compact) if self.analyzer is not None else None
        return ReportDocument(catalog=self.catalog, config=self.engine.config, families=sections,
                              second_type=second)


def write_text(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as stream:
        stream.write(text)

