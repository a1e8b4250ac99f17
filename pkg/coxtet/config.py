"""
Engine configuration shared by the library and the command line.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

CACHE_ENV_VAR = "COXTET_CACHE_DIR"


def _default_cache_dir() -> str:
    return os.environ.get(CACHE_ENV_VAR, str(Path.home() / ".cache" / "coxtet"))


@dataclass(frozen=True)
class EngineConfig:
    """Tolerances and limits used throughout the pipeline."""
    max_label: int = 10
    max_tiles: int = 64
    tol_signature: float = 1e-9
    tol_volume: float = 1e-6
    tol_geometry: float = 1e-8
    dps: int = 64
    seed: int = 0
    jobs: int = 1
    samples_per_tile: int = 64
    triangle_max_tiles: int = 64
    cache_dir: str = field(default_factory=_default_cache_dir)

    def __post_init__(self):
        if self.max_label < 6:
            raise ValueError("max_label must be at least 6")
        if self.max_tiles < 1:
            raise ValueError("max_tiles must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if min(self.tol_signature, self.tol_volume, self.tol_geometry) <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def from_env(cls) -> "EngineConfig":
        """Build the default configuration, honouring COXTET_CACHE_DIR."""
        return cls(cache_dir=_default_cache_dir())

    def with_overrides(self, **overrides) -> "EngineConfig":
        """Return a copy with every non-None override applied."""
        changes = {name: value for name, value in overrides.items() if value is not None}
        return replace(self, **changes)

    def fingerprint(self) -> str:
        """Hash of the settings that influence results (not jobs or cache location)."""
        relevant = asdict(self)
        for name in ("jobs", "cache_dir"):
            relevant.pop(name)
        payload = json.dumps(relevant, sort_keys=True)
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:16]
