"""CSV and schema-manifest reading/writing.

Numeric cells are written with ``repr(float)``, the shortest string that
parses back to the same double; missing cells are empty fields.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import SchemaError
from .table import MISSING_CODE, ColumnSchema, DataTable, Kind


def load_csv(
    text: str,
    schema: Sequence[ColumnSchema],
    target: Optional[str] = None,
    source: Optional[str] = None,
) -> DataTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty CSV: missing header row", row=0) from None
    expected = [c.name for c in schema]
    if header != expected:
        raise SchemaError(f"header {header} does not match schema {expected}", row=0)

    lookups = [{c: i for i, c in enumerate(col.categories)} for col in schema]
    columns: list[list] = [[] for _ in schema]
    for r, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(schema):
            raise SchemaError(f"expected {len(schema)} fields, got {len(row)}", row=r)
        for j, (cell, col) in enumerate(zip(row, schema)):
            if cell == "":
                columns[j].append(MISSING_CODE if col.is_categorical else math.nan)
            elif col.is_categorical:
                try:
                    columns[j].append(lookups[j][cell])
                except KeyError:
                    raise SchemaError(f"undeclared category {cell!r}", row=r, column=col.name) from None
            else:
                try:
                    v = float(cell)
                except ValueError:
                    raise SchemaError(f"cannot parse {cell!r} as a number", row=r, column=col.name) from None
                if not math.isfinite(v):
                    raise SchemaError(f"non-finite number {cell!r}", row=r, column=col.name)
                columns[j].append(v)
    data = {
        col.name: np.array(vals, dtype=np.int64 if col.is_categorical else np.float64)
        for col, vals in zip(schema, columns)
    }
    return DataTable(schema, data, target=target, source=source)


def write_csv(table: DataTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.names)
    cols = []
    for col in table.schema:
        arr = table.column(col.name)
        if col.is_categorical:
            cols.append(["" if c == MISSING_CODE else col.categories[c] for c in arr])
        else:
            cols.append(["" if np.isnan(v) else repr(float(v)) for v in arr])
    writer.writerows(zip(*cols))
    return buf.getvalue()


def manifest_to_json(schema: Sequence[ColumnSchema], target: Optional[str] = None) -> str:
    entries = []
    for col in schema:
        entry: dict = {"name": col.name, "kind": col.kind.value}
        if col.is_categorical:
            entry["categories"] = list(col.categories)
        if col.name == target:
            entry["target"] = True
        entries.append(entry)
    return json.dumps(entries, indent=2)


def manifest_from_json(text: str) -> tuple[list[ColumnSchema], Optional[str]]:
    entries = json.loads(text)
    if not isinstance(entries, list):
        raise SchemaError("manifest must be a JSON list")
    schema, target = [], None
    for i, e in enumerate(entries):
        try:
            kind = Kind(e["kind"])
            schema.append(ColumnSchema(e["name"], kind, tuple(e.get("categories", ()))))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad manifest entry {i}: {exc}") from None
        if e.get("target"):
            if target is not None:
                raise SchemaError("manifest declares more than one target")
            target = e["name"]
    return schema, target


def manifest_path_for(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(".schema.json")


def save_dataset(table: DataTable, csv_path: str | Path, manifest_path: str | Path | None = None) -> None:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(write_csv(table))
    Path(manifest_path or manifest_path_for(csv_path)).write_text(manifest_to_json(table.schema, table.target))


def load_dataset(
    csv_path: str | Path, manifest_path: str | Path | None = None, source: Optional[str] = None
) -> DataTable:
    schema, target = manifest_from_json(Path(manifest_path or manifest_path_for(csv_path)).read_text())
    return load_csv(Path(csv_path).read_text(), schema, target=target, source=source)
