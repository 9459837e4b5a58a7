"""Report files: full JSON, flat CSV and a markdown leaderboard."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .aggregate import AggregateReport
from .config import REFERENCE
from .records import METRICS, Orientation, RunRecord, metrics_for_task

FORMATS = ("json", "csv", "markdown")
CSV_COLUMNS = ("dataset", "seed", "generator", "task", "metric", "value", "error")


def report_json(records: Sequence[RunRecord], aggregate: AggregateReport) -> str:
    doc = {"records": [r.to_dict() for r in records], "aggregate": aggregate.to_dict()}
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def report_csv(records: Sequence[RunRecord]) -> str:
    """One row per record per task metric; failed cells have an empty value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        vals = r.metrics()
        for m in metrics_for_task(r.task):
            v = vals.get(m)
            w.writerow([r.dataset, r.seed, r.generator, r.task, m, "" if v is None else repr(v), r.error or ""])
    return buf.getvalue()


def _arrow(metric: str) -> str:
    return "↑" if METRICS[metric][1] is Orientation.HIGHER_BETTER else "↓"


def report_markdown(aggregate: AggregateReport) -> str:
    """Leaderboard per task: generators as rows, normalised metrics x100 as columns."""
    lines = []
    for task, gens in aggregate.scores.items():
        metrics = [m for m in metrics_for_task(task) if any(m in ms for ms in gens.values())]
        lines.append(f"### {task}\n")
        lines.append("| generator | " + " | ".join(f"{m} {_arrow(m)}" for m in metrics) + " |")
        lines.append("|---" * (len(metrics) + 1) + "|")
        for g, ms in gens.items():
            cells = [f"{100 * ms[m][0]:.2f} ± {100 * ms[m][1]:.2f}" if m in ms else "n/a" for m in metrics]
            label = f"*{g}*" if g == REFERENCE else g
            lines.append(f"| {label} | " + " | ".join(cells) + " |")
        lines.append("")
    if aggregate.degenerate_cells:
        lines.append("Degenerate cells (all generators tied): "
                     + ", ".join(f"{d}/{m}" for d, m in aggregate.degenerate_cells) + "\n")
    if aggregate.failed:
        lines.append("Failed runs: " + ", ".join(f"{d}/{s}/{g}" for d, s, g in aggregate.failed) + "\n")
    return "\n".join(lines)


def emit_report(records: Sequence[RunRecord], aggregate: AggregateReport, out_dir: str | Path,
                formats: Iterable[str] = FORMATS) -> list[Path]:
    """Write the requested report formats into ``out_dir`` and return their paths."""
    if not records:
        raise ValueError("no records to report")
    formats = list(formats)
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown report formats {bad}; choose from {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for f in formats:
        if f == "json":
            path, text = out / "report.json", report_json(records, aggregate)
        elif f == "csv":
            path, text = out / "report.csv", report_csv(records)
        else:
            path, text = out / "leaderboard.md", report_markdown(aggregate)
        path.write_text(text)
        written.append(path)
    return written
