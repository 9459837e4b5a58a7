"""Typed tables, CSV/manifest I/O, splitting and preprocessing."""

from .io import (
    load_csv,
    load_dataset,
    manifest_from_json,
    manifest_path_for,
    manifest_to_json,
    save_dataset,
    write_csv,
)
from .preprocess import Preprocessor, apply_preprocessor, fit_preprocessor
from .split import SplitIndices, split, split_sizes
from .table import MISSING_CODE, ColumnSchema, DataTable, Kind, check_same_schema

__all__ = [
    "MISSING_CODE",
    "ColumnSchema",
    "DataTable",
    "Kind",
    "Preprocessor",
    "SplitIndices",
    "apply_preprocessor",
    "check_same_schema",
    "fit_preprocessor",
    "load_csv",
    "load_dataset",
    "manifest_from_json",
    "manifest_path_for",
    "manifest_to_json",
    "save_dataset",
    "split",
    "split_sizes",
    "write_csv",
]
