"""
File-backed state for the coxtet pipeline.

Each cached document is JSON {schema_version, config_fingerprint, payload}. A
document written by another schema version or configuration is ignored with a
warning, as is a corrupt one; callers then recompute.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.engine import SearchResult, SearchStats
from coxtet.errors import CacheError, RejectReason
from coxtet.models import PAIRS, AngleFrac, DecomposedTet, Provenance, TetShape

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def angle_text(angle: AngleFrac) -> str:
    """An angle as "num/den", in units of pi."""
    return f"{angle.num}/{angle.den}"


def shape_record(shape: TetShape) -> Dict[str, str]:
    """A shape as its six dihedral angles keyed by face pair ("01", "02", ...)."""
    return {f"{i}{j}": angle_text(shape.angle(i, j)) for i, j in PAIRS}


def shape_from_record(record: Dict[str, str]) -> TetShape:
    mapping = {}
    for pair, text in record.items():
        num, den = (int(part) for part in text.split("/"))
        mapping[(int(pair[0]), int(pair[1]))] = AngleFrac(num, den)
    return TetShape.from_mapping(mapping)


def decomposition_record(d: DecomposedTet, placements: bool = True) -> Dict[str, Any]:
    """JSON-ready form of a decomposition; placements are row-major 4x4 matrices."""
    record = {
        "key": d.key,
        "fundamental": d.fundamental,
        "shape": shape_record(d.shape),
        "tiles": d.tiles,
        "depth": d.depth,
        "provenance": {
            "kind": d.provenance.kind,
            "parents": list(d.provenance.parents),
            "faces": list(d.provenance.faces),
            "matching": list(d.provenance.matching),
            "note": d.provenance.note,
        },
    }
    if placements:
        record["placements"] = [np.asarray(p).ravel().tolist() for p in d.placements]
    return record


def decomposition_from_record(record: Dict[str, Any]) -> DecomposedTet:
    provenance = record["provenance"]
    return DecomposedTet(
        shape=shape_from_record(record["shape"]),
        fundamental=record["fundamental"],
        tiles=record["tiles"],
        depth=record["depth"],
        provenance=Provenance(kind=provenance["kind"], parents=tuple(provenance["parents"]),
                              faces=tuple(provenance["faces"]), matching=tuple(provenance["matching"]),
                              note=provenance.get("note", "")),
        key=record["key"],
        placements=tuple(np.array(p, dtype=float).reshape(4, 4) for p in record.get("placements", [])),
    )


def search_record(result: SearchResult) -> Dict[str, Any]:
    return {
        "fundamental": result.fundamental.id,
        "decompositions": [decomposition_record(d) for d in result.decompositions],
        "stats": result.stats.as_dict(),
    }


def search_from_record(record: Dict[str, Any], catalog: CoxeterCatalog) -> SearchResult:
    raw = record["stats"]
    stats = SearchStats(rounds=raw["rounds"], attempts=raw["attempts"], accepted=raw["accepted"],
                        duplicates=raw["duplicates"], frontier_sizes=list(raw["frontier_sizes"]))
    for reason in RejectReason:
        stats.rejected[reason] = raw["rejected"].get(reason.value, 0)
    return SearchResult(fundamental=catalog.lookup(record["fundamental"]),
                        decompositions=[decomposition_from_record(d) for d in record["decompositions"]],
                        stats=stats)


class CacheManager:
    """Versioned JSON documents under the configured cache directory."""

    def __init__(self, config: EngineConfig, enabled: bool = True):
        """
        Initialize the cache.

        Args:
            config: Engine configuration; its cache_dir and fingerprint are used
            enabled: When False nothing is read or written
        """
        self.config = config
        self.directory = Path(config.cache_dir)
        self.enabled = enabled
        self.warnings = 0

    def path(self, name: str) -> Path:
        return self.directory / f"{name}.json"

    def _warn(self, message: str, *args) -> None:
        self.warnings += 1
        logger.warning(message, *args)

    def save(self, name: str, payload: Any) -> Optional[Path]:
        """Write a payload atomically; returns the file path."""
        if not self.enabled:
            return None
        document = {
            "schema_version": SCHEMA_VERSION,
            "config_fingerprint": self.config.fingerprint(),
            "payload": payload,
        }
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.path(name)
        handle, temporary = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            json.dump(document, stream, sort_keys=True)
        os.replace(temporary, target)
        return target

    def _read(self, name: str) -> Any:
        """
        Read a payload.

        Raises:
            CacheError: if the document is corrupt, stale or from another configuration
        """
        target = self.path(name)
        try:
            with open(target, encoding="utf-8") as stream:
                document = json.load(stream)
        except (UnicodeDecodeError, json.JSONDecodeError, OSError) as exc:
            raise CacheError(f"{target} is unreadable: {exc}")
        if not isinstance(document, dict) or "payload" not in document:
            raise CacheError(f"{target} has no payload")
        if document.get("schema_version") != SCHEMA_VERSION:
            raise CacheError(f"{target} has schema version {document.get('schema_version')}, "
                             f"expected {SCHEMA_VERSION}")
        if document.get("config_fingerprint") != self.config.fingerprint():
            raise CacheError(f"{target} was written with another configuration")
        return document["payload"]

    def load(self, name: str) -> Any:
        """The cached payload, or None when missing or unusable."""
        if not self.enabled or not self.path(name).exists():
            return None
        try:
            return self._read(name)
        except CacheError as exc:
            self._warn("ignoring cache: %s", exc)
            return None

    def roundtrip(self, name: str, payload: Any) -> Any:
        """load(save(payload)); raises CacheError if the document cannot be read back."""
        self.save(name, payload)
        loaded = self.load(name)
        if loaded is None and payload is not None:
            raise CacheError(f"{self.path(name)} could not be read back")
        return loaded

    def get_or_compute(self, name: str, compute: Callable[[], Any], encode: Callable[[Any], Any],
                       decode: Callable[[Any], Any]) -> Any:
        """Decode the cached payload, or compute, encode and store it."""
        payload = self.load(name)
        if payload is not None:
            try:
                return decode(payload)
            except (KeyError, TypeError, ValueError) as exc:
                self._warn("ignoring cache %s: %s", name, exc)
        value = compute()
        self.save(name, encode(value))
        return value

    # -- pipeline state ----------------------------------------------------

    def catalog(self) -> CoxeterCatalog:
        return self.get_or_compute("catalog", lambda: CoxeterCatalog(self.config),
                                   lambda catalog: catalog.records(),
                                   lambda records: CoxeterCatalog.from_records(records, self.config))

    def search(self, name: str, compute: Callable[[], SearchResult], catalog: CoxeterCatalog) -> SearchResult:
        return self.get_or_compute(f"search-{name}", compute, search_record,
                                   lambda record: search_from_record(record, catalog))

    def clear(self) -> List[Path]:
        """Delete every cached document; returns the removed paths."""
        removed = []
        if self.directory.exists():
            for target in sorted(self.directory.glob("*.json")):
                target.unlink()
                removed.append(target)
        return removed
