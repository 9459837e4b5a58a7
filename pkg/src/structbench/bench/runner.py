"""Benchmark sweep over (dataset, seed, generator) triples."""

from __future__ import annotations

import functools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from ..data.split import split
from ..data.table import DataTable
from ..errors import ConfigError, StructBenchError
from ..generators import GenRequest, external_path, generate, ingest_synthetic_file
from ..graph import CiRelationSet, Level, enumerate_ci_relations
from ..metrics import density_report, privacy_report, structural_fidelity, utility_eval
from ..scm import ScmModel, load_scm, prior_sample
from .config import REFERENCE, GeneratorSpec, RunConfig
from .records import RunRecord, canonical_json, read_jsonl, records_from_json, records_to_json

RECORDS_LOG = "records.jsonl"
RECORDS_JSON = "records.json"
TIMINGS = "timings.jsonl"


def dataset_name(path: str) -> str:
    return Path(path).stem


@dataclass(frozen=True)
class PreparedDataset:
    name: str
    model: ScmModel
    data: DataTable
    global_relations: CiRelationSet
    local_relations: Optional[CiRelationSet]

    @property
    def task(self) -> str:
        return "classification" if self.data.is_classification else "regression"

    def train_test(self, seed: int) -> tuple[DataTable, DataTable]:
        idx = split(self.data, seed)
        return self.data.take(idx.train).with_source(REFERENCE), self.data.take(idx.test)


def load_model(path: str) -> ScmModel:
    try:
        model = load_scm(path)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc}") from None
    if model.target is None:
        raise ConfigError(f"dataset {path} declares no target variable")
    return model


@functools.lru_cache(maxsize=8)
def prepare(path: str, n_rows: int, data_seed: int, max_cond_size: int, cap: int) -> PreparedDataset:
    """Sample a dataset once and enumerate its ground-truth relation sets."""
    model = load_model(path)
    data = prior_sample(model, n_rows, data_seed)
    glob = enumerate_ci_relations(model.dag, max_cond_size=max_cond_size, cap=cap)
    local = enumerate_ci_relations(model.dag, model.target, Level.LOCAL, max_cond_size, cap=cap)
    return PreparedDataset(dataset_name(path), model, data, glob, local)


def synthesise(gen: Optional[GeneratorSpec], ds: PreparedDataset, train: DataTable, seed: int,
               ratio: float) -> DataTable:
    if gen is None:
        return train
    if gen.external:
        path = external_path(gen.directory, ds.name, seed, gen.name)
        return ingest_synthetic_file(path, train.schema, train.target, gen.name)
    return generate(gen.name, GenRequest.with_ratio(train, ratio, seed))


def evaluate_synthetic(ds: PreparedDataset, train: DataTable, test: DataTable, syn: DataTable, seed: int,
                       generator: str, alpha: float) -> RunRecord:
    """Score one synthetic table on all four dimensions."""
    return RunRecord(
        ds.name,
        seed,
        generator,
        ds.task,
        structural=structural_fidelity(ds.global_relations, ds.local_relations, syn, alpha),
        density=density_report(train, syn),
        privacy=privacy_report(train, syn),
        utility=utility_eval(syn, test),
    )


def run_triple(cfg: RunConfig, dataset: str, seed: int, generator: str) -> RunRecord:
    """Evaluate one triple; errors become a failed record instead of propagating."""
    t0 = time.perf_counter()
    name = dataset_name(dataset)
    task = "classification"
    try:
        ds = prepare(dataset, cfg.n_rows, cfg.data_seed, cfg.max_cond_size, cfg.statement_cap)
        task = ds.task
        train, test = ds.train_test(seed)
        gen = None if generator == REFERENCE else next(g for g in cfg.generators if g.name == generator)
        syn = synthesise(gen, ds, train, seed, cfg.n_syn_ratio)
        rec = evaluate_synthetic(ds, train, test, syn, seed, generator, cfg.alpha)
    except (StructBenchError, ValueError, OSError, ArithmeticError) as exc:
        rec = RunRecord(name, seed, generator, task, error=f"{type(exc).__name__}: {exc}")
    return replace(rec, wall_time_s=time.perf_counter() - t0)


def _run_triple_packed(args) -> RunRecord:
    return run_triple(*args)


def triples(cfg: RunConfig) -> list[tuple[str, int, str]]:
    return [(d, s, g) for d in cfg.datasets for s in cfg.seeds for g in cfg.generator_names]


def check_inputs(cfg: RunConfig) -> None:
    """Fail fast on unreadable datasets or missing external files."""
    for d in cfg.datasets:
        if not Path(d).is_file():
            raise ConfigError(f"dataset file not found: {d}")
        load_model(d)
        for g in cfg.generators:
            if g.external:
                for s in cfg.seeds:
                    p = external_path(g.directory, dataset_name(d), s, g.name)
                    if not p.is_file():
                        raise ConfigError(f"missing external synthetic file {p}")


def run_benchmark(cfg: RunConfig, workers: int = 1,
                  on_record: Optional[Callable[[RunRecord], None]] = None) -> list[RunRecord]:
    """Run (or resume) a sweep and return its records in canonical order.

    Completed triples found in ``<output_dir>/records.jsonl`` are skipped.
    New records are appended there as they finish; at the end the log is
    rewritten in canonical order and ``records.json`` holds the full set.
    Wall times go to ``timings.jsonl`` so the record files stay
    byte-identical across runs and worker counts.
    """
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    check_inputs(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    log, timings = out / RECORDS_LOG, out / TIMINGS
    wanted = triples(cfg)
    order = {(dataset_name(d), s, g): i for i, (d, s, g) in enumerate(wanted)}
    done = {r.key: r for r in read_jsonl(log) if r.key in order}
    todo = [t for t in wanted if (dataset_name(t[0]), t[1], t[2]) not in done]

    def append(rec: RunRecord) -> None:
        with log.open("a") as fh:
            fh.write(canonical_json(rec.to_dict()) + "\n")
        with timings.open("a") as fh:
            fh.write(canonical_json({"dataset": rec.dataset, "seed": rec.seed, "generator": rec.generator,
                                     "wall_time_s": round(rec.wall_time_s, 6)}) + "\n")
        done[rec.key] = rec
        if on_record is not None:
            on_record(rec)

    # drop any truncated tail before appending
    log.write_text("".join(canonical_json(r.to_dict()) + "\n" for r in sorted(done.values(), key=lambda r: order[r.key])))
    if workers == 1 or len(todo) <= 1:
        for t in todo:
            append(run_triple(cfg, *t))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_run_triple_packed, [(cfg, *t) for t in todo]):
                append(rec)
    records = sorted(done.values(), key=lambda r: order[r.key])
    log.write_text("".join(canonical_json(r.to_dict()) + "\n" for r in records))
    (out / RECORDS_JSON).write_text(records_to_json(records))
    return records


def load_records(path: str | Path) -> list[RunRecord]:
    """Records from ``records.json`` or a ``records.jsonl`` log."""
    p = Path(path)
    if p.is_dir():
        p = p / RECORDS_JSON if (p / RECORDS_JSON).exists() else p / RECORDS_LOG
    if p.suffix == ".jsonl":
        return read_jsonl(p)
    return records_from_json(p.read_text())


__all__ = [
    "PreparedDataset",
    "evaluate_synthetic",
    "load_records",
    "prepare",
    "run_benchmark",
    "run_triple",
    "triples",
]
