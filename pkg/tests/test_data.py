import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structbench.data import (
    ColumnSchema,
    DataTable,
    apply_preprocessor,
    fit_preprocessor,
    load_csv,
    load_dataset,
    manifest_from_json,
    manifest_to_json,
    save_dataset,
    split,
    split_sizes,
    write_csv,
)
from structbench.data.split import controlled_round
from structbench.errors import SchemaError

NUM_A = ColumnSchema.numeric("a")
CAT_B = ColumnSchema.categorical("b", ["x", "y"])


def test_load_csv_parses_missing_cells():
    t = load_csv("a,b\n1.5,x\n,y", [NUM_A, CAT_B])
    assert len(t) == 2
    assert t.labels("a") == [1.5, None]
    assert t.labels("b") == ["x", "y"]
    assert t.missing_mask("a").tolist() == [False, True]


def test_load_csv_errors_name_row_and_column():
    with pytest.raises(SchemaError, match=r"row 1.*'a'"):
        load_csv("a\nfoo", [NUM_A])
    with pytest.raises(SchemaError, match="undeclared category 'z'"):
        load_csv("b\nz", [CAT_B])
    with pytest.raises(SchemaError, match="header"):
        load_csv("b,a\nx,1", [NUM_A, CAT_B])
    with pytest.raises(SchemaError, match="non-finite"):
        load_csv("a\ninf", [NUM_A])


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.one_of(st.none(), finite), st.sampled_from([None, "x", "y"])), max_size=30))
def test_csv_round_trip_is_exact(rows):
    data = {"a": [r[0] for r in rows], "b": [r[1] for r in rows]}
    t = DataTable.from_labels([NUM_A, CAT_B], data, target="b")
    back = load_csv(write_csv(t), [NUM_A, CAT_B], target="b")
    assert back.equals(t)


def test_manifest_round_trip(tmp_path):
    schema = [NUM_A, CAT_B]
    s, target = manifest_from_json(manifest_to_json(schema, "b"))
    assert s == schema and target == "b"
    t = DataTable.from_labels(schema, {"a": [1.0, 2.0], "b": ["x", "y"]}, target="b")
    save_dataset(t, tmp_path / "d.csv")
    assert load_dataset(tmp_path / "d.csv").equals(t)


def test_schema_invariants():
    with pytest.raises(SchemaError):
        ColumnSchema.categorical("c", [])
    with pytest.raises(SchemaError):
        ColumnSchema.categorical("c", ["a", "a"])
    with pytest.raises(SchemaError):
        DataTable([NUM_A], {"a": np.array([np.inf])})


def test_split_sizes_for_2000():
    assert split_sizes(2000) == (1440, 160, 400)


def _binary_table(n_pos, n_neg):
    y = ["p"] * n_pos + ["n"] * n_neg
    schema = [ColumnSchema.numeric("f"), ColumnSchema.categorical("y", ["n", "p"])]
    return DataTable.from_labels(schema, {"f": list(range(len(y))), "y": y}, target="y")


def test_stratified_split_balanced():
    s = split(_binary_table(50, 50), seed=0)
    y = np.array(_binary_table(50, 50).column("y"))
    assert len(s.test) == 20
    assert (y[s.test] == 1).sum() == 10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 300), min_size=1, max_size=6), st.integers(0, 10_000))
def test_stratified_split_partitions_and_preserves_proportions(counts, seed):
    n = sum(counts)
    if n < 10:
        return
    labels = [f"c{i}" for i, k in enumerate(counts) for _ in range(k)]
    schema = [ColumnSchema.categorical("y", [f"c{i}" for i in range(len(counts))])]
    t = DataTable.from_labels(schema, {"y": labels}, target="y")
    s = split(t, seed)
    allidx = np.concatenate([s.train, s.val, s.test])
    assert sorted(allidx.tolist()) == list(range(n))
    n_train, n_val, n_test = split_sizes(n)
    assert (len(s.train), len(s.val), len(s.test)) == (n_train, n_val, n_test)
    y = t.column("y")
    for part, size in ((s.train, n_train), (s.val, n_val), (s.test, n_test)):
        for c, k in enumerate(counts):
            assert abs((y[part] == c).sum() - k * size / n) <= 1


def test_split_deterministic_and_seed_dependent():
    t = _binary_table(60, 40)
    assert split(t, 3).to_dict() == split(t, 3).to_dict()
    tests = {tuple(split(t, s).test) for s in range(10)}
    assert len(tests) == 10


def test_regression_split_is_partition():
    t = DataTable([NUM_A], {"a": np.arange(37.0)}, target="a")
    s = split(t, 1)
    assert sorted(np.concatenate([s.train, s.val, s.test]).tolist()) == list(range(37))


def test_split_errors():
    with pytest.raises(SchemaError, match="single row"):
        split(_binary_table(1, 20), 0)
    with pytest.raises(SchemaError):
        split(_binary_table(3, 3), 0)


def test_controlled_round_margins():
    m = controlled_round([7, 5, 9], [4, 2, 15])
    assert m.sum(axis=1).tolist() == [7, 5, 9]
    assert m.sum(axis=0).tolist() == [4, 2, 15]
    ideal = np.outer([7, 5, 9], [4, 2, 15]) / 21
    assert np.all(np.abs(m - ideal) < 1)


def test_preprocessor_statistics():
    schema = [NUM_A, ColumnSchema.categorical("c", ["x", "y"]), ColumnSchema.numeric("m")]
    t = DataTable.from_labels(schema, {"a": [1, 2, 3], "c": ["x", "x", "y"], "m": [5, None, 5]})
    p = fit_preprocessor(t)
    assert p.stats[0].mean == 2.0
    assert math.isclose(p.stats[0].std, np.std([1, 2, 3]))
    assert p.stats[1].mode == 0
    assert p.stats[2].mean == 5.0 and p.stats[2].std == 1.0
    out = apply_preprocessor(p, t)
    assert out.shape == (3, 1 + 2 + 1)
    assert np.all(out[:, 3] == 0.0)


def test_preprocessor_z_scores_and_one_hot():
    rng = np.random.default_rng(0)
    schema = [NUM_A, ColumnSchema.categorical("c", ["u", "v", "w"])]
    t = DataTable(schema, {"a": rng.normal(3, 2, 500), "c": rng.integers(0, 3, 500)})
    out = fit_preprocessor(t).transform(t)
    assert abs(out[:, 0].mean()) < 1e-9 and abs(out[:, 0].std() - 1) < 1e-9
    assert np.all(out[:, 1:].sum(axis=1) == 1)
    refit = fit_preprocessor(DataTable([NUM_A], {"a": out[:, 0]}))
    assert abs(refit.stats[0].mean) < 1e-9 and abs(refit.stats[0].std - 1) < 1e-9


def test_preprocessor_imputes_with_train_statistics():
    train = DataTable.from_labels([NUM_A, CAT_B], {"a": [0, 4], "b": ["y", "y"]})
    test = DataTable.from_labels([NUM_A, CAT_B], {"a": [None], "b": [None]})
    out = fit_preprocessor(train).transform(test)
    assert out.tolist() == [[0.0, 0.0, 1.0]]


def test_preprocessor_errors():
    with pytest.raises(SchemaError, match="entirely missing"):
        fit_preprocessor(DataTable.from_labels([NUM_A], {"a": [None, None]}))
    p = fit_preprocessor(DataTable.from_labels([NUM_A], {"a": [1.0]}))
    with pytest.raises(SchemaError):
        apply_preprocessor(p, DataTable.from_labels([CAT_B], {"b": ["x"]}))
