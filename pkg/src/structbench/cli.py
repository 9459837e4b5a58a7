"""Command-line interface: ``structbench <subcommand> ...``.

Exit codes: 0 success, 2 configuration or input error, 3 the run finished
with failed cells.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import (
    FORMATS,
    REFERENCE,
    RunConfig,
    adtm_aggregate,
    dimension_average,
    emit_report,
    evaluate_synthetic,
    load_records,
    run_benchmark,
)
from .bench.runner import PreparedDataset, load_model
from .data import load_dataset, save_dataset, split
from .errors import ConfigError, StructBenchError
from .generators import BUILTIN, GenRequest, generate
from .graph import Level, enumerate_ci_relations
from .scm import prior_sample

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3


def _cmd_sample(a) -> int:
    model = load_model(a.scm)
    table = prior_sample(model, a.rows, a.seed)
    save_dataset(table, a.out)
    print(f"wrote {len(table)} rows to {a.out}")
    return EXIT_OK


def _cmd_split(a) -> int:
    table = load_dataset(a.data)
    idx = split(table, a.seed)
    out = Path(a.out_dir)
    for part in ("train", "val", "test"):
        save_dataset(table.take(getattr(idx, part)), out / f"{part}.csv")
    (out / "split.json").write_text(json.dumps(idx.to_dict()) + "\n")
    print(f"train {len(idx.train)}, val {len(idx.val)}, test {len(idx.test)} rows in {out}")
    return EXIT_OK


def _cmd_generate(a) -> int:
    train = load_dataset(a.train)
    syn = generate(a.generator, GenRequest.with_ratio(train, a.n_syn_ratio, a.seed))
    save_dataset(syn, a.out)
    print(f"wrote {len(syn)} {a.generator} rows to {a.out}")
    return EXIT_OK


def _cmd_evaluate(a) -> int:
    model = load_model(a.scm)
    train = load_dataset(a.train)
    test = load_dataset(a.test)
    syn = load_dataset(a.synthetic) if a.synthetic else train
    glob = enumerate_ci_relations(model.dag, max_cond_size=a.max_cond_size, cap=a.statement_cap)
    local = enumerate_ci_relations(model.dag, model.target, Level.LOCAL, a.max_cond_size, cap=a.statement_cap)
    ds = PreparedDataset(Path(a.scm).stem, model, train, glob, local)
    name = a.name or (Path(a.synthetic).stem if a.synthetic else REFERENCE)
    rec = evaluate_synthetic(ds, train, test, syn, a.seed, name, a.alpha)
    text = json.dumps(rec.to_dict(), sort_keys=True, indent=1) + "\n"
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _aggregate(a):
    records = load_records(a.records)
    if not records:
        raise ConfigError(f"no records found in {a.records}")
    return records, adtm_aggregate(records, include_reference=not a.exclude_reference)


def _cmd_aggregate(a) -> int:
    records, agg = _aggregate(a)
    dims = {t: {g: {d: [s.value, s.flagged] for d, s in ds.items()} for g, ds in gs.items()}
            for t, gs in dimension_average(agg).items()}
    text = json.dumps({"aggregate": agg.to_dict(), "dimensions": dims}, sort_keys=True, indent=1) + "\n"
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PARTIAL if agg.failed else EXIT_OK


def _cmd_report(a) -> int:
    records, agg = _aggregate(a)
    for p in emit_report(records, agg, a.out_dir, a.format or FORMATS):
        print(f"wrote {p}")
    return EXIT_PARTIAL if agg.failed else EXIT_OK


def _cmd_run(a) -> int:
    cfg = RunConfig.load(a.config)
    overrides = {}
    if a.seed_count is not None:
        overrides["seeds"] = tuple(range(a.seed_count))
    for key in ("n_syn_ratio", "alpha", "max_cond_size"):
        if getattr(a, key) is not None:
            overrides[key] = getattr(a, key)
    if overrides:
        cfg = cfg.replace(**overrides)

    def progress(rec):
        status = "ok" if rec.ok else f"FAILED ({rec.error})"
        print(f"{rec.dataset} seed={rec.seed} {rec.generator}: {status} [{rec.wall_time_s:.1f}s]", flush=True)

    records = run_benchmark(cfg, workers=a.workers, on_record=progress)
    agg = adtm_aggregate(records)
    for p in emit_report(records, agg, cfg.output_dir, a.format or FORMATS):
        print(f"wrote {p}")
    n_failed = sum(not r.ok for r in records)
    if n_failed:
        print(f"{n_failed} of {len(records)} runs failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="structbench", description="Structural-fidelity benchmark for tabular generators.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="prior-sample an SCM to CSV plus schema manifest")
    s.add_argument("scm")
    s.add_argument("--rows", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sample)

    s = sub.add_parser("split", help="stratified train/val/test split of a sampled dataset")
    s.add_argument("data")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=_cmd_split)

    s = sub.add_parser("generate", help="run a built-in generator on a training CSV")
    s.add_argument("train")
    s.add_argument("--generator", choices=sorted(BUILTIN), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-syn-ratio", type=float, default=3.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_generate)

    s = sub.add_parser("evaluate", help="score one synthetic table on all four dimensions")
    s.add_argument("--scm", required=True)
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--synthetic", help="synthetic CSV; omit to score the training split itself")
    s.add_argument("--name")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--max-cond-size", type=int, default=2)
    s.add_argument("--statement-cap", type=int, default=20_000)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_evaluate)

    for name, func, help_ in (("aggregate", _cmd_aggregate, "ADTM aggregate of run records"),
                              ("report", _cmd_report, "write JSON/CSV/markdown reports")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("records", help="records.json, records.jsonl or a run output directory")
        s.add_argument("--exclude-reference", action="store_true", help=f"leave {REFERENCE} out of the aggregate")
        if name == "aggregate":
            s.add_argument("--out")
        else:
            s.add_argument("--out-dir", required=True)
            s.add_argument("--format", action="append", choices=FORMATS)
        s.set_defaults(func=func)

    s = sub.add_parser("run", help="full sweep from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--seed-count", type=int, help="use seeds 0..N-1 (config default: 10)")
    s.add_argument("--n-syn-ratio", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--max-cond-size", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--format", action="append", choices=FORMATS)
    s.set_defaults(func=_cmd_run)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StructBenchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
