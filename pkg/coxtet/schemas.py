"""
The JSON schemas shipped with coxtet (draft 7) and validation against them.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List

from jsonschema import Draft7Validator

SCHEMA_DIR = Path(__file__).parent / "schema"
SCHEMAS = ("catalog", "decomposition", "report")


class SchemaViolation(ValueError):
    """A document does not match its schema."""

    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors[:5]))
        self.errors = errors


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Read a shipped schema by name ("catalog", "decomposition" or "report")."""
    if name not in SCHEMAS:
        raise KeyError(f"unknown schema {name!r}")
    with open(SCHEMA_DIR / f"{name}.schema.json", encoding="utf-8") as stream:
        return json.load(stream)


@lru_cache(maxsize=None)
def validator(name: str) -> Draft7Validator:
    schema = load_schema(name)
    Draft7Validator.check_schema(schema)
    return Draft7Validator(schema)


def validate(document: Any, name: str) -> None:
    """
    Validate a document against a shipped schema.

    Raises:
        SchemaViolation: listing every mismatch found, as "<json path>: <message>"
    """
    errors = sorted(validator(name).iter_errors(document), key=lambda error: error.json_path)
    if errors:
        raise SchemaViolation([f"{error.json_path}: {error.message}" for error in errors])
