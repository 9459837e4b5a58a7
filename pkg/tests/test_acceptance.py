"""Acceptance gate: ten criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from structbench.bench import REFERENCE, GeneratorSpec, RunConfig, adtm_aggregate, run_benchmark
from structbench.bench.runner import RECORDS_JSON
from structbench.citests import chi_square_ci, partial_corr_ci, residual_ci
from structbench.data import ColumnSchema, DataTable, split, split_sizes
from structbench.generators import GenRequest, gen_bayes_net, gen_marginal, gen_smote, generate
from structbench.graph import Dag, Level, enumerate_ci_relations, is_d_separated, to_cpdag
from structbench.metrics import authenticity, beta_recall, dcr, shape_score, structural_fidelity, trend_score, utility_eval
from structbench.networks import network_path
from structbench.scm import load_scm, prior_sample

from .oracles import all_dags, all_queries, cpdag_by_class_intersection, d_connected_by_paths, random_dag

VERDICTS: list[tuple[int, bool, str]] = []
ALPHA = 0.01


def verdict(n: int, ok: bool, detail: str) -> None:
    VERDICTS.append((n, ok, detail))
    assert ok, f"criterion {n}: {detail}"


@pytest.fixture(scope="module")
def clinic():
    return load_scm(network_path("clinic.bif"))


def test_criterion_01_d_separation_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    total = agree = 0
    for _ in range(200):
        nodes, edges = random_dag(rng, int(rng.integers(2, 6)))
        dag = Dag(nodes, edges)
        for x, y, z in all_queries(nodes):
            total += 1
            agree += is_d_separated(dag, x, y, set(z)) == (not d_connected_by_paths(nodes, edges, x, y, set(z)))
    elapsed = time.perf_counter() - t0
    verdict(1, agree == total and elapsed < 60,
            f"{agree}/{total} queries agree with path enumeration in {elapsed:.1f}s")


def test_criterion_02_cpdag_oracle():
    nodes = ["A", "B", "C", "D"]
    dags = list(all_dags(nodes))
    bad = 0
    for edges in dags:
        got = to_cpdag(Dag(nodes, edges))
        directed, undirected = cpdag_by_class_intersection(nodes, edges)
        bad += got.directed_edges != directed or got.undirected_edges != undirected
    verdict(2, bad == 0 and len(dags) == 543, f"{len(dags) - bad}/{len(dags)} four-node DAGs match")


def _cats(**cols):
    schema = [ColumnSchema.categorical(k, [str(i) for i in range(max(2, int(v.max()) + 1))]) for k, v in cols.items()]
    return DataTable(schema, cols)


def _nums(**cols):
    return DataTable([ColumnSchema.numeric(k) for k in cols], cols)


def _mixed(cats, nums):
    schema = [ColumnSchema.categorical(k, [str(i) for i in range(max(2, int(v.max()) + 1))]) for k, v in cats.items()]
    return DataTable(schema + [ColumnSchema.numeric(k) for k in nums], {**cats, **nums})


def _binary(rng, logits):
    return (rng.random(len(logits)) < 1 / (1 + np.exp(-logits))).astype(int)


# Null designs: x and y dependent on z but independent given z.
def _null_chi(rng, n):
    z = rng.integers(0, 3, n)
    return chi_square_ci(_cats(x=_binary(rng, z - 1.0), y=_binary(rng, 1.0 - z), z=z), "x", "y", ("z",), ALPHA)


def _null_pc(rng, n):
    z = rng.normal(size=n)
    return partial_corr_ci(_nums(x=z + rng.normal(size=n), y=-z + rng.normal(size=n), z=z), "x", "y", ("z",), ALPHA)


def _null_res(rng, n):
    z = rng.normal(size=n)
    return residual_ci(_mixed({"c": _binary(rng, 1.5 * z)}, {"u": z + rng.normal(size=n), "z": z}),
                       "c", "u", ("z",), ALPHA)


# Alternatives: chain a -> b -> c tested marginally; collider a -> c <- b tested given c.
def _chain_chi(rng, n):
    a = rng.integers(0, 2, n)
    b = np.where(rng.random(n) < 0.7, a, 1 - a)
    c = np.where(rng.random(n) < 0.7, b, 1 - b)
    return chi_square_ci(_cats(a=a, c=c), "a", "c", (), ALPHA)


def _collider_chi(rng, n):
    a, b = rng.integers(0, 2, n), rng.integers(0, 2, n)
    c = np.where(rng.random(n) < 0.8, a ^ b, 1 - (a ^ b))
    return chi_square_ci(_cats(a=a, b=b, c=c), "a", "b", ("c",), ALPHA)


def _chain_pc(rng, n):
    a = rng.normal(size=n)
    b = 0.5 * a + rng.normal(size=n)
    return partial_corr_ci(_nums(a=a, c=0.5 * b + rng.normal(size=n)), "a", "c", (), ALPHA)


def _collider_pc(rng, n):
    a, b = rng.normal(size=n), rng.normal(size=n)
    return partial_corr_ci(_nums(a=a, b=b, c=a + b + rng.normal(size=n)), "a", "b", ("c",), ALPHA)


def _chain_res(rng, n):
    a = rng.integers(0, 2, n)
    b = 0.5 * a + rng.normal(size=n)
    return residual_ci(_mixed({"a": a}, {"c": 0.5 * b + rng.normal(size=n)}), "a", "c", (), ALPHA)


def _collider_res(rng, n):
    a, b = rng.integers(0, 2, n), rng.normal(size=n)
    return residual_ci(_mixed({"a": a}, {"b": b, "c": a + b + rng.normal(size=n)}), "a", "b", ("c",), ALPHA)


def test_criterion_03_ci_calibration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    parts, ok = [], True
    for name, null, alts in (("chi_square", _null_chi, (_chain_chi, _collider_chi)),
                             ("partial_correlation", _null_pc, (_chain_pc, _collider_pc)),
                             ("residualisation", _null_res, (_chain_res, _collider_res))):
        type1 = np.mean([not null(rng, 2000).independent for _ in range(500)])
        power = [np.mean([not alt(rng, 5000).independent for _ in range(100)]) for alt in alts]
        ok &= 0.002 <= type1 <= 0.03 and min(power) >= 0.9
        parts.append(f"{name} type-I {type1:.3f} power chain {power[0]:.2f} collider {power[1]:.2f}")
    elapsed = time.perf_counter() - t0
    verdict(3, ok and elapsed < 300, "; ".join(parts) + f"; {elapsed:.0f}s")


def test_criterion_04_fidelity_self_consistency(clinic):
    glob = enumerate_ci_relations(clinic.dag, max_cond_size=2)
    local = enumerate_ci_relations(clinic.dag, clinic.target, Level.LOCAL, 2)
    table_a = prior_sample(clinic, 2000, 101)
    table_b = prior_sample(clinic, 2000, 202)
    assert not table_a.equals(table_b)
    rep = structural_fidelity(glob, local, table_b, ALPHA)
    verdict(4, rep.global_bacc >= 90.0 and rep.local_bacc >= 90.0,
            f"global {rep.global_bacc:.2f}, local {rep.local_bacc:.2f} over "
            f"{len(glob.statements)}/{len(local.statements)} statements")


def test_criterion_05_metric_identities(clinic):
    worst = 0.0
    ok = True
    for model, seed in ((clinic, 1), (load_scm(network_path("screening.json")), 2),
                        (load_scm(network_path("housing.json")), 3)):
        t = prior_sample(model, 1000, seed)
        copies = t.take(np.tile(np.arange(len(t)), 3))
        s, tr = shape_score(t, t), trend_score(t, t)
        worst = max(worst, abs(s - 1), abs(tr - 1))
        ok &= dcr(t, t) == 0.0 and authenticity(t, copies) == 0.0
    ok &= worst <= 1e-9
    verdict(5, ok, f"max |shape-1|, |trend-1| = {worst:.1e}; dcr and authenticity exactly 0: {ok}")


def test_criterion_06_directional_ordering(clinic):
    glob = enumerate_ci_relations(clinic.dag, max_cond_size=2)
    data = prior_sample(clinic, 2000, 0)
    wins = np.zeros(3, dtype=int)
    for seed in range(10):
        idx = split(data, seed)
        train = data.take(idx.train)
        req = GenRequest(train, seed=seed)
        smote, bn, marg = gen_smote(req), gen_bayes_net(req), gen_marginal(req)
        wins[0] += beta_recall(train, smote) > beta_recall(train, bn)
        wins[1] += dcr(train, smote) < dcr(train, bn)
        wins[2] += (structural_fidelity(glob, None, bn, ALPHA).global_bacc
                    > structural_fidelity(glob, None, marg, ALPHA).global_bacc)
    verdict(6, bool(np.all(wins >= 8)),
            f"seeds won: (a) smote beta-recall {wins[0]}/10, (b) smote dcr {wins[1]}/10, "
            f"(c) bayes_net global fidelity {wins[2]}/10")


def test_criterion_07_ratio_saturation(clinic):
    data = prior_sample(clinic, 2000, 0)
    gaps = {}
    for gen in ("marginal", "smote", "bayes_net"):
        u = {3: [], 5: []}
        for seed in range(10):
            idx = split(data, seed)
            train, test = data.take(idx.train), data.take(idx.test)
            for ratio in (3, 5):
                syn = generate(gen, GenRequest.with_ratio(train, ratio, seed))
                u[ratio].append(utility_eval(syn, test).mean_score)
        gaps[gen] = abs(np.mean(u[3]) - np.mean(u[5]))
    verdict(7, max(gaps.values()) < 1.0,
            "mean balanced-accuracy change, ratio 3 vs 5: " + ", ".join(f"{g} {v:.2f}" for g, v in gaps.items()))


def test_criterion_08_protocol_arithmetic(clinic):
    data = prior_sample(clinic, 2000, 0)
    y = data.column(clinic.target)
    k = len(data.spec(clinic.target).categories)
    full = np.bincount(y, minlength=k)
    worst = 0.0
    sizes_ok = split_sizes(2000) == (1440, 160, 400)
    for seed in range(10):
        idx = split(data, seed)
        sizes_ok &= (len(idx.train), len(idx.val), len(idx.test)) == (1440, 160, 400)
        for part in (idx.train, idx.val, idx.test):
            quota = full * len(part) / len(data)
            worst = max(worst, float(np.max(np.abs(np.bincount(y[part], minlength=k) - quota))))
    verdict(8, sizes_ok and worst <= 1.0, f"sizes 1440/160/400: {sizes_ok}; max class deviation {worst:.2f} rows")


@pytest.fixture(scope="module")
def sweeps(tmp_path_factory, clinic):
    root = tmp_path_factory.mktemp("acceptance")
    cfg = RunConfig(
        datasets=(str(network_path("clinic.bif")),),
        generators=tuple(GeneratorSpec(g) for g in ("marginal", "smote", "bayes_net")),
        output_dir=str(root / "a"),
    )
    t0 = time.perf_counter()
    first = run_benchmark(cfg, workers=1)
    elapsed = time.perf_counter() - t0
    run_benchmark(cfg.replace(output_dir=str(root / "b")), workers=1)
    run_benchmark(cfg.replace(output_dir=str(root / "c")), workers=8)
    blobs = [(root / d / RECORDS_JSON).read_bytes() for d in "abc"]
    return first, blobs, elapsed


def test_criterion_09_determinism(sweeps):
    records, blobs, elapsed = sweeps
    gens = {r.generator for r in records}
    ok = (len(records) == 40 and gens == {REFERENCE, "marginal", "smote", "bayes_net"}
          and all(r.ok for r in records) and blobs[0] == blobs[1] == blobs[2] and elapsed < 600)
    verdict(9, ok, f"{len(records)} records; identical across reruns: {blobs[0] == blobs[1]}, "
                   f"across 1 and 8 workers: {blobs[0] == blobs[2]}; sweep {elapsed:.0f}s")


def test_criterion_10_adtm_endpoints(sweeps):
    records, _, _ = sweeps
    agg = adtm_aggregate(records)
    live = [c for c in agg.cells if not c.degenerate]
    ok = bool(live) and all(max(c.normalised.values()) == 1.0 and min(c.normalised.values()) == 0.0 for c in live)
    verdict(10, ok, f"{len(live)} non-degenerate cells with exact 1/0 endpoints: {ok}; "
                    f"{len(agg.cells) - len(live)} degenerate")
