import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structbench.citests import (
    TestKind,
    chi_square_ci,
    chi_square_p_value,
    ci_test,
    partial_corr_ci,
    residual_ci,
    select_test,
)
from structbench.data import ColumnSchema, DataTable
from structbench.errors import SchemaError


def cat_table(**cols):
    schema = [ColumnSchema.categorical(k, [str(i) for i in range(int(np.max(v)) + 1 if len(v) else 1)]) for k, v in cols.items()]
    # widen to at least two categories so columns are well-formed
    schema = [ColumnSchema.categorical(s.name, s.categories + (("1",) if len(s.categories) == 1 else ())) for s in schema]
    return DataTable(schema, cols)


def num_table(**cols):
    return DataTable([ColumnSchema.numeric(k) for k in cols], cols)


def mixed_table(cats: dict, nums: dict):
    schema = [ColumnSchema.categorical(k, [str(i) for i in range(max(2, int(v.max()) + 1))]) for k, v in cats.items()]
    schema += [ColumnSchema.numeric(k) for k in nums]
    return DataTable(schema, {**cats, **nums})


def test_chi_square_identical_binary_columns():
    x = np.repeat([0, 1], 50)
    res = chi_square_ci(cat_table(x=x, y=x.copy()), "x", "y")
    assert res.statistic == pytest.approx(100.0, abs=1e-9)
    assert res.dof == 1
    assert res.p_value < 1e-20
    assert not res.independent
    assert res.test_kind is TestKind.CHI_SQUARE


def test_chi_square_constant_column_is_independent():
    rng = np.random.default_rng(0)
    res = chi_square_ci(cat_table(x=np.zeros(40, int), y=rng.integers(0, 2, 40)), "x", "y")
    assert (res.statistic, res.dof, res.p_value, res.independent) == (0.0, 0.0, 1.0, True)


def test_chi_square_matches_scipy_contingency():
    from scipy.stats import chi2_contingency

    rng = np.random.default_rng(1)
    x = rng.integers(0, 3, 400)
    y = (x + rng.integers(0, 2, 400)) % 4
    res = chi_square_ci(cat_table(x=x, y=y), "x", "y")
    obs = np.zeros((3, 4))
    np.add.at(obs, (x, y), 1)
    ref = chi2_contingency(obs, correction=False)
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert res.dof == ref.dof
    assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_chi_square_conditional_sums_strata():
    rng = np.random.default_rng(2)
    z = rng.integers(0, 2, 600)
    x = (z + (rng.random(600) < 0.2)) % 2
    y = (z + (rng.random(600) < 0.2)) % 2
    t = cat_table(x=x, y=y, z=z)
    assert not chi_square_ci(t, "x", "y").independent
    res = chi_square_ci(t, "x", "y", ["z"])
    parts = [chi_square_ci(cat_table(x=x[z == k], y=y[z == k]), "x", "y") for k in (0, 1)]
    assert res.statistic == pytest.approx(sum(p.statistic for p in parts))
    assert res.dof == 2


def test_chi_square_pools_small_strata():
    rng = np.random.default_rng(3)
    z = np.concatenate([np.zeros(100, int), np.arange(1, 4)])
    x = rng.integers(0, 2, 103)
    y = rng.integers(0, 2, 103)
    res = chi_square_ci(cat_table(x=x, y=y, z=z), "x", "y", ["z"])
    assert res.details["strata"] == 2
    off = chi_square_ci(cat_table(x=x, y=y, z=z), "x", "y", ["z"], min_stratum_rows=0)
    assert off.details["strata"] == 4


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 200), st.floats(0, 200), st.integers(1, 30))
def test_chi_square_p_value_monotone(a, b, dof):
    lo, hi = sorted((a, b))
    assert chi_square_p_value(hi, dof) <= chi_square_p_value(lo, dof)


def test_chi_square_p_value_against_scipy():
    from scipy.stats import chi2

    for stat, dof in [(0.5, 1), (3.84, 1), (30.0, 12), (250.0, 200)]:
        assert chi_square_p_value(stat, dof) == pytest.approx(chi2.sf(stat, dof), rel=1e-10)


def test_chi_square_rejects_numeric_and_empty():
    with pytest.raises(SchemaError):
        chi_square_ci(num_table(x=np.arange(5.0), y=np.arange(5.0)), "x", "y")
    with pytest.raises(SchemaError):
        chi_square_ci(cat_table(x=np.array([], int), y=np.array([], int)), "x", "y")


def test_partial_corr_perfect_correlation():
    x = np.random.default_rng(0).normal(size=50)
    res = partial_corr_ci(num_table(x=x, y=x.copy()), "x", "y")
    assert res.details["r"] == pytest.approx(1.0)
    assert res.p_value < 1e-100 and not res.independent


def test_partial_corr_chain():
    rng = np.random.default_rng(4)
    x = rng.normal(size=5000)
    zz = x + rng.normal(size=5000)
    y = zz + rng.normal(size=5000)
    t = num_table(x=x, y=y, z=zz)
    assert not partial_corr_ci(t, "x", "y").independent
    res = partial_corr_ci(t, "x", "y", ["z"])
    assert res.dof == 5000 - 1 - 3


def test_partial_corr_against_closed_form():
    rng = np.random.default_rng(5)
    x, y, z = rng.normal(size=(3, 300))
    y = y + 0.3 * x + 0.5 * z
    t = num_table(x=x, y=y, z=z)
    r = np.corrcoef(np.vstack([x, y, z]))
    rxy_z = (r[0, 1] - r[0, 2] * r[1, 2]) / np.sqrt((1 - r[0, 2] ** 2) * (1 - r[1, 2] ** 2))
    res = partial_corr_ci(t, "x", "y", ["z"])
    assert res.details["r"] == pytest.approx(rxy_z, rel=1e-9)
    assert res.statistic == pytest.approx(np.sqrt(296) * np.arctanh(rxy_z), rel=1e-9)


def test_partial_corr_insufficient_rows():
    with pytest.raises(SchemaError):
        partial_corr_ci(num_table(x=np.arange(4.0), y=np.arange(4.0) ** 2, z=np.ones(4)), "x", "y", ["z"])


def test_residual_perfect_correlation():
    x = np.random.default_rng(0).normal(size=200)
    res = residual_ci(num_table(x=x, y=x.copy()), "x", "y")
    assert res.p_value < 1e-100 and not res.independent
    assert res.test_kind is TestKind.RESIDUALISATION


def test_residual_reduces_to_partial_correlation_f_test():
    rng = np.random.default_rng(6)
    x, y, z = rng.normal(size=(3, 400))
    y = y + 0.2 * x + z
    t = num_table(x=x, y=y, z=z)
    res = residual_ci(t, "x", "y", ["z"])
    r = partial_corr_ci(t, "x", "y", ["z"]).details["r"]
    assert res.details["pillai"] == pytest.approx(r**2, rel=1e-6)
    assert res.statistic == pytest.approx((400 - 3) * r**2 / (1 - r**2), rel=1e-6)


def test_residual_mixed_collider():
    rng = np.random.default_rng(7)
    c = rng.integers(0, 2, 3000)
    u = rng.normal(size=3000)
    m = c + u + 0.5 * rng.normal(size=3000)
    t = mixed_table({"c": c}, {"u": u, "m": m})
    assert residual_ci(t, "c", "u").independent
    assert not residual_ci(t, "c", "u", ["m"]).independent


def test_residual_handles_categorical_determined_by_z():
    rng = np.random.default_rng(8)
    z = rng.integers(0, 3, 500)
    x = z.copy()
    y = rng.normal(size=500)
    res = residual_ci(mixed_table({"x": x, "z": z}, {"y": y}), "x", "y", ["z"])
    assert res.independent and res.p_value == 1.0


def test_select_test():
    schema = [ColumnSchema.categorical("a", "xy"), ColumnSchema.categorical("b", "xy"),
              ColumnSchema.numeric("u"), ColumnSchema.numeric("v")]
    assert select_test(schema, "a", "b") is TestKind.CHI_SQUARE
    assert select_test(schema, "u", "v") is TestKind.PARTIAL_CORRELATION
    assert select_test(schema, "a", "u") is TestKind.RESIDUALISATION
    assert select_test(schema, "a", "b", ["u"]) is TestKind.RESIDUALISATION


def _random_mixed(seed, n=300):
    rng = np.random.default_rng(seed)
    c = rng.integers(0, 3, n)
    d = (c + rng.integers(0, 2, n)) % 3
    u = c + rng.normal(size=n)
    v = u + rng.normal(size=n)
    return mixed_table({"c": c, "d": d}, {"u": u, "v": v}), rng


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_tests_are_symmetric_and_row_order_invariant(seed):
    t, rng = _random_mixed(seed)
    perm = rng.permutation(len(t))
    tp = t.take(perm)
    for x, y, z in [("c", "d", ()), ("u", "v", ()), ("c", "v", ("u",)), ("u", "v", ("c",)), ("c", "d", ("u",))]:
        a = ci_test(t, x, y, z)
        b = ci_test(t, y, x, z)
        c = ci_test(tp, x, y, z)
        for other in (b, c):
            assert other.statistic == pytest.approx(a.statistic, rel=1e-9, abs=1e-9)
            assert other.p_value == pytest.approx(a.p_value, rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-50, 50).filter(lambda s: abs(s) > 1e-3), st.floats(-100, 100))
def test_partial_corr_affine_invariance(seed, scale, shift):
    t, _ = _random_mixed(seed)
    u, v = t.column("u"), t.column("v")
    w = np.random.default_rng(seed + 1).normal(size=len(t)) + 0.1 * v
    base = partial_corr_ci(num_table(u=u, v=v, w=w), "u", "w", ["v"])
    moved = partial_corr_ci(num_table(u=u * scale + shift, v=v * 3 - 1, w=w), "u", "w", ["v"])
    assert moved.independent == base.independent
    assert abs(moved.statistic) == pytest.approx(abs(base.statistic), rel=1e-9, abs=1e-9)


def _rejection_rate(test, make, sims=150, seed=0):
    rng = np.random.default_rng(seed)
    return np.mean([not test(make(rng)).independent for _ in range(sims)])


def test_null_rejection_rates_are_small():
    n = 1000
    chi = _rejection_rate(lambda t: chi_square_ci(t, "x", "y"),
                          lambda r: cat_table(x=r.integers(0, 2, n), y=r.integers(0, 2, n)))
    pc = _rejection_rate(lambda t: partial_corr_ci(t, "x", "y"),
                         lambda r: num_table(x=r.normal(size=n), y=r.normal(size=n)))
    rs = _rejection_rate(lambda t: residual_ci(t, "c", "u"),
                         lambda r: mixed_table({"c": r.integers(0, 2, n)}, {"u": r.normal(size=n)}))
    for rate in (chi, pc, rs):
        assert rate <= 0.05
