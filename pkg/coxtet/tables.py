"""
Tabular views of catalogs, searches and second-type candidates.
"""

import logging
from typing import Iterable, List, Sequence, Tuple

import pandas as pd

from coxtet.catalog import CoxeterCatalog
from coxtet.diagrams import DiagramRenderer
from coxtet.engine import SearchResult
from coxtet.models import CandidatePair, CatalogEntry

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.10f}"


class TableBuilder:
    """Builds pandas DataFrames for the report and the command line."""

    @staticmethod
    def catalog_frame(catalog: CoxeterCatalog) -> pd.DataFrame:
        """One row per catalog entry, in catalog order."""
        rows = []
        for entry in catalog:
            rows.append({
                "id": entry.id,
                "diagram": DiagramRenderer.to_text(entry.diagram),
                "compact": entry.compact,
                "ideal": len(entry.ideal_vertices),
                "volume": entry.volume,
                "volume_err": entry.volume_err,
                "canonical_key": entry.canonical_key,
            })
        return pd.DataFrame(rows, columns=["id", "diagram", "compact", "ideal", "volume",
                                           "volume_err", "canonical_key"])

    @staticmethod
    def decomposition_frame(result: SearchResult) -> pd.DataFrame:
        """
        The tuple lines of a first-type search.

        Args:
            result: Search over one fundamental tetrahedron

        Returns:
            DataFrame numbered like the search, seed in row 0
        """
        rows = []
        for number, d in enumerate(result.decompositions):
            rows.append({
                "number": number,
                "tuple": result.tuple_line(d),
                "tiles": d.tiles,
                "depth": d.depth,
                "kind": d.provenance.kind,
                "key": d.key,
            })
        return pd.DataFrame(rows, columns=["number", "tuple", "tiles", "depth", "kind", "key"])

    @staticmethod
    def candidate_frame(pairs: Sequence[CandidatePair]) -> pd.DataFrame:
        """Second-type candidates with the filter that decided each one."""
        rows = []
        for pair in pairs:
            eliminated = pair.eliminated_by
            rows.append({
                "F": pair.F,
                "P": pair.P,
                "ratio": pair.ratio,
                "compact": pair.compact,
                "survived": pair.survived,
                "filter": eliminated.name if eliminated else "",
                "reason": eliminated.reason if eliminated else pair.filters[-1].reason,
            })
        return pd.DataFrame(rows, columns=["F", "P", "ratio", "compact", "survived", "filter", "reason"])

    @staticmethod
    def ratio_frame(pairs: Iterable[Tuple[CatalogEntry, CatalogEntry, int]]) -> pd.DataFrame:
        """Ordered pairs (F, P) with an integral volume ratio."""
        rows = [{
            "F": F.id,
            "P": P.id,
            "ratio": ratio,
            "compact": F.compact if F.compact == P.compact else None,
        } for F, P, ratio in pairs]
        frame = pd.DataFrame(rows, columns=["F", "P", "ratio", "compact"])
        return frame.sort_values(["ratio", "F", "P"], kind="mergesort").reset_index(drop=True)

    @staticmethod
    def family_summary(results: Sequence[Tuple[str, SearchResult]]) -> pd.DataFrame:
        """Non-trivial decomposition counts per family."""
        rows = []
        for name, result in results:
            nontrivial = result.nontrivial
            rows.append({
                "family": name,
                "fundamental": result.fundamental.id,
                "nontrivial": len(nontrivial),
                "max_tiles": max((d.tiles for d in nontrivial), default=1),
                "rounds": result.stats.rounds,
            })
        return pd.DataFrame(rows, columns=["family", "fundamental", "nontrivial", "max_tiles", "rounds"])


def _cell(value) -> str:
    if value is None or (isinstance(value, float) and pd.isna(value)):
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value).replace("|", "\\|")


def markdown_table(frame: pd.DataFrame) -> str:
    """GitHub-flavoured markdown for a DataFrame, without the index."""
    header = list(frame.columns)
    lines: List[str] = [
        "| " + " | ".join(str(name) for name in header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for record in frame.itertuples(index=False):
        lines.append("| " + " | ".join(_cell(value) for value in record) + " |")
    return "\n".join(lines)


def frame_records(frame: pd.DataFrame) -> List[dict]:
    """JSON-ready rows with native Python scalars."""
    records = []
    for record in frame.to_dict(orient="records"):
        clean = {}
        for name, value in record.items():
            if hasattr(value, "item"):
                value = value.item()
            if isinstance(value, float) and pd.isna(value):
                value = None
            clean[name] = value
        records.append(clean)
    return records
