"""Benchmark orchestration: sweeps, ADTM aggregation and reports."""

from .aggregate import AggregateReport, Cell, DimensionScore, adtm_aggregate, affine, dimension_average
from .config import OUTPUT_DIR_ENV, REFERENCE, GeneratorSpec, RunConfig
from .records import (
    DIMENSIONS,
    METRICS,
    Orientation,
    RunRecord,
    metrics_for_task,
    read_jsonl,
    records_from_json,
    records_to_json,
)
from .report import FORMATS, emit_report, report_csv, report_json, report_markdown
from .runner import evaluate_synthetic, load_records, prepare, run_benchmark, run_triple, triples

__all__ = [
    "AggregateReport",
    "Cell",
    "DIMENSIONS",
    "DimensionScore",
    "FORMATS",
    "GeneratorSpec",
    "METRICS",
    "OUTPUT_DIR_ENV",
    "Orientation",
    "REFERENCE",
    "RunConfig",
    "RunRecord",
    "adtm_aggregate",
    "affine",
    "dimension_average",
    "emit_report",
    "evaluate_synthetic",
    "load_records",
    "metrics_for_task",
    "prepare",
    "read_jsonl",
    "records_from_json",
    "records_to_json",
    "report_csv",
    "report_json",
    "report_markdown",
    "run_benchmark",
    "run_triple",
    "triples",
]
