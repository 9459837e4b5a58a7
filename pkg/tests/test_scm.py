import json

import numpy as np
import pytest
from scipy import stats

from structbench.errors import GraphError, ParseError, UnknownVariableError, ValidationError
from structbench.graph import Dag
from structbench.scm import (
    DiscreteCpd,
    LinearGaussianCpd,
    ScmModel,
    Task,
    dump_scm_json,
    parse_bif,
    parse_scm_json,
    prior_sample,
    topological_order,
)

TWO_VAR = """
network tiny { property target = B ; }
variable A { type discrete [ 2 ] { a0, a1 }; }
variable B {
  type discrete [ 2 ] { b0, b1 };
  property position = (10, 20) ;
}
probability ( A ) { table 0.3, 0.7; }
probability ( B | A ) {
  (a0) 0.9, 0.1;
  (a1) 0.2, 0.8;
}
"""

MIXED = {
    "name": "mixed",
    "task": "regression",
    "target": "Y",
    "nodes": [
        {"name": "X", "kind": "gaussian", "parents": [], "weights": [], "intercept": 1.0, "noise_std": 2.0},
        {"name": "C", "kind": "discrete", "parents": ["X"], "states": ["lo", "hi"],
         "bins": {"X": [1.0]}, "table": [[0.9, 0.1], [0.2, 0.8]]},
        {"name": "Y", "kind": "gaussian", "parents": ["X", "C"],
         "configs": [{"intercept": 0.0, "weights": [2.0], "noise_std": 0.5},
                     {"intercept": 3.0, "weights": [-1.0], "noise_std": 0.25}]},
    ],
}


def test_parse_bif_two_variables():
    m = parse_bif(TWO_VAR)
    assert m.nodes == ("A", "B")
    assert m.dag.edges == {("A", "B")}
    assert m.target == "B" and m.task is Task.CLASSIFICATION
    a, b = m.cpds["A"], m.cpds["B"]
    assert a.states == ("a0", "a1") and a.parents == ()
    np.testing.assert_allclose(a.table, [[0.3, 0.7]])
    assert b.parents == ("A",)
    np.testing.assert_allclose(b.table, [[0.9, 0.1], [0.2, 0.8]])


def test_parse_bif_child_major_table_matches_rows():
    doc = TWO_VAR.replace("(a0) 0.9, 0.1;\n  (a1) 0.2, 0.8;", "table 0.9, 0.2, 0.1, 0.8;")
    np.testing.assert_allclose(parse_bif(doc).cpds["B"].table, [[0.9, 0.1], [0.2, 0.8]])


def test_parse_bif_is_whitespace_insensitive():
    squashed = " ".join(TWO_VAR.split())
    assert parse_bif(squashed) == parse_bif(TWO_VAR)


def test_parse_bif_bad_row():
    with pytest.raises(ValidationError, match=r"B: row 0"):
        parse_bif(TWO_VAR.replace("(a0) 0.9, 0.1", "(a0) 0.5, 0.6"))


def test_parse_bif_empty_document():
    with pytest.raises(ParseError) as exc:
        parse_bif("")
    assert exc.value.offset == 0 and exc.value.line == 1


def test_parse_bif_syntax_error_location():
    with pytest.raises(ParseError) as exc:
        parse_bif("network x {}\nvariable A { type discrete [ 2 ] { a0 a1 }; }")
    assert exc.value.line == 2


def test_parse_bif_undeclared_variable():
    with pytest.raises(UnknownVariableError, match="'Q'"):
        parse_bif(TWO_VAR + "probability ( Q ) { table 1.0; }")


def test_parse_scm_json_linear_chain():
    doc = {
        "name": "chain", "task": "regression", "target": "Y",
        "nodes": [
            {"name": "X", "kind": "gaussian", "parents": [], "weights": [], "intercept": 0, "noise_std": 1},
            {"name": "Y", "kind": "gaussian", "parents": ["X"], "weights": [2], "intercept": 1, "noise_std": 0.5},
        ],
    }
    m = parse_scm_json(json.dumps(doc))
    y = m.cpds["Y"]
    assert isinstance(y, LinearGaussianCpd)
    assert (y.weights, y.intercept, y.noise_std) == ((2.0,), 1.0, 0.5)


def test_parse_scm_json_errors():
    doc = json.loads(json.dumps(MIXED))
    doc["nodes"][0]["parents"] = ["X"]
    doc["nodes"][0]["weights"] = [1.0]
    with pytest.raises(GraphError, match="X -> X"):
        parse_scm_json(json.dumps(doc))

    doc = json.loads(json.dumps(MIXED))
    doc["nodes"][0]["noise_std"] = -1
    with pytest.raises(ValidationError, match=r"\$\.nodes\[0\]"):
        parse_scm_json(json.dumps(doc))

    doc = json.loads(json.dumps(MIXED))
    del doc["nodes"][1]["states"]
    with pytest.raises(ValidationError, match=r"\$\.nodes\[1\].*states"):
        parse_scm_json(json.dumps(doc))

    doc = json.loads(json.dumps(MIXED))
    doc["nodes"][2]["parents"] = ["Y"]
    doc["nodes"][0]["parents"] = ["Y"]
    doc["nodes"][0]["weights"] = [1.0]
    with pytest.raises(GraphError, match="cyclic"):
        parse_scm_json(json.dumps(doc))


def test_json_round_trip():
    for m in (parse_scm_json(json.dumps(MIXED)), parse_bif(TWO_VAR)):
        assert parse_scm_json(dump_scm_json(m)) == m


def test_topological_order_examples():
    assert topological_order(Dag(("A", "B", "C"), {("A", "C"), ("B", "C")})) == ("A", "B", "C")
    assert topological_order(Dag(("C", "A", "B"))) == ("A", "B", "C")
    assert topological_order(Dag(("A", "B", "C"), {("C", "B"), ("B", "A")})) == ("C", "B", "A")


def test_model_invariants():
    a = DiscreteCpd("A", ("0", "1"), (), [[0.5, 0.5]])
    b = DiscreteCpd("B", ("0", "1"), ("A",), [[0.5, 0.5]])
    with pytest.raises(ValidationError, match="rows"):
        ScmModel.from_cpds([a, b])
    with pytest.raises(ValidationError):
        DiscreteCpd("A", ("0", "1"), (), [[0.5, 0.6]])
    with pytest.raises(ValidationError, match="classification"):
        ScmModel.from_cpds([a], task="classification")


def test_prior_sample_deterministic_network():
    doc = TWO_VAR.replace("0.3, 0.7", "0.0, 1.0").replace("(a1) 0.2, 0.8", "(a1) 1.0, 0.0")
    t = prior_sample(parse_bif(doc), 200, seed=5)
    assert set(t.labels("A")) == {"a1"} and set(t.labels("B")) == {"b0"}


def test_prior_sample_root_frequency():
    t = prior_sample(parse_bif(TWO_VAR), 20_000, seed=0)
    freq = (t.column("A") == 0).mean()
    assert abs(freq - 0.3) <= 0.02


def test_prior_sample_determinism_and_seed_sensitivity():
    m = parse_scm_json(json.dumps(MIXED))
    a, b = prior_sample(m, 50, 1), prior_sample(m, 50, 1)
    assert a.equals(b)
    assert not a.equals(prior_sample(m, 50, 2))


def test_prior_sample_blocks_reassemble():
    m = parse_scm_json(json.dumps(MIXED))
    full = prior_sample(m, 103, 9)
    parts = [prior_sample(m, 10, 9, start=0), prior_sample(m, 33, 9, start=10), prior_sample(m, 60, 9, start=43)]
    for name in m.nodes:
        joined = np.concatenate([p.column(name) for p in parts])
        assert np.array_equal(joined, full.column(name))


def test_prior_sample_schema_kinds():
    m = parse_scm_json(json.dumps(MIXED))
    t = prior_sample(m, 500, 0)
    assert t.spec("C").categories == ("lo", "hi")
    assert np.isfinite(t.column("X")).all() and np.isfinite(t.column("Y")).all()
    assert t.target == "Y"


def test_linear_gaussian_recovery():
    m = parse_scm_json(json.dumps(MIXED))
    t = prior_sample(m, 50_000, 3)
    x, c, y = t.column("X"), t.column("C"), t.column("Y")
    assert abs(x.std() - 2.0) < 0.05
    for code, (b0, b1, sd) in enumerate([(0.0, 2.0, 0.5), (3.0, -1.0, 0.25)]):
        mask = c == code
        A = np.column_stack([np.ones(mask.sum()), x[mask]])
        coef, *_ = np.linalg.lstsq(A, y[mask], rcond=None)
        resid = y[mask] - A @ coef
        assert abs(coef[0] - b0) < 0.05 and abs(coef[1] - b1) < 0.05
        assert abs(resid.std() - sd) < 0.05


def test_discrete_conditionals_goodness_of_fit():
    m = parse_scm_json(json.dumps(MIXED))
    t = prior_sample(m, 50_000, 4)
    x, c = t.column("X"), t.column("C")
    level = (x >= 1.0).astype(int)
    table = np.array([[0.9, 0.1], [0.2, 0.8]])
    for lv in (0, 1):
        obs = np.bincount(c[level == lv], minlength=2)
        assert stats.chisquare(obs, table[lv] * obs.sum()).pvalue > 0.001
