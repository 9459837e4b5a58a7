"""Ingestion of synthetic tables produced by external generators.

External files follow the layout ``<root>/<dataset>/<seed>/<generator>.csv``,
optionally with a ``.schema.json`` manifest next to each CSV.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from ..data.io import load_csv, manifest_from_json, manifest_path_for
from ..data.table import ColumnSchema, DataTable
from ..errors import SchemaError


def external_path(root: str | Path, dataset: str, seed: int, generator: str) -> Path:
    return Path(root) / dataset / str(seed) / f"{generator}.csv"


def ingest_synthetic(
    csv_text: str,
    schema: Sequence[ColumnSchema],
    name: str,
    target: Optional[str] = None,
    manifest_text: Optional[str] = None,
) -> DataTable:
    """Parse an external synthetic CSV against the dataset's schema.

    A manifest, when supplied, must declare exactly the dataset's schema.
    """
    if manifest_text is not None:
        declared, declared_target = manifest_from_json(manifest_text)
        if list(declared) != list(schema):
            raise SchemaError(f"manifest of {name!r} does not match the dataset schema")
        if declared_target is not None and declared_target != target:
            raise SchemaError(f"manifest of {name!r} names target {declared_target!r}, expected {target!r}")
    return load_csv(csv_text, schema, target=target, source=name)


def ingest_synthetic_file(path: str | Path, schema: Sequence[ColumnSchema], target: Optional[str] = None,
                          name: Optional[str] = None) -> DataTable:
    p = Path(path)
    manifest = manifest_path_for(p)
    return ingest_synthetic(
        p.read_text(),
        schema,
        name or p.stem,
        target,
        manifest.read_text() if manifest.exists() else None,
    )
