import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from huffcs.model import (
    ENUMERATION_CAP,
    ExplicitModel,
    MarginalModel,
    ModelError,
    UnsupportedOperation,
    enumerate_supports,
    load_model,
    model_from_spec,
    model_to_spec,
    random_explicit,
)
from oracles import q_table


def test_worked_example_leaf_activities(worked):
    got = [worked.q_of({i}) for i in range(4)]
    assert got == pytest.approx([0.61, 0.54, 0.30, 0.26], abs=1e-12)


def test_worked_example_set_activities(worked):
    assert worked.q_of({1, 2, 3}) == pytest.approx(0.91, abs=1e-12)
    assert worked.q_of({2, 3}) == pytest.approx(0.55, abs=1e-12)
    assert worked.q_of(range(4)) == pytest.approx(0.98, abs=1e-12)
    assert worked.q_of(()) == 0.0


def test_table_must_normalize():
    with pytest.raises(ModelError, match="sum to"):
        ExplicitModel(n=2, table={frozenset({0}): 0.5, frozenset({1}): 0.4})


def test_sparsity_is_enforced():
    with pytest.raises(ModelError, match="exceeds max sparsity"):
        ExplicitModel(n=3, table={frozenset({0, 1}): 1.0}, s=1)


def test_index_range_is_checked():
    with pytest.raises(ModelError, match="outside"):
        ExplicitModel(n=2, table={frozenset({2}): 1.0})


def test_condition_renormalizes(worked):
    c = worked.condition({0})
    # P(X_0 != 0) = 0.61; the surviving supports drop index 0
    assert c.indices == frozenset({1, 2, 3})
    assert c.s == 1
    assert c.prob_empty() == pytest.approx(0.07 / 0.61)
    assert c.q_of({1}) == pytest.approx(0.31 / 0.61)


def test_condition_on_null_event_raises(worked):
    with pytest.raises(ModelError, match="probability zero"):
        worked.condition({0, 1, 2})


def test_q_outside_index_set_raises(worked):
    with pytest.raises(ModelError):
        worked.condition({0}).q_of({0})


def test_marginal_matches_product_law():
    m = MarginalModel(n=3, p=np.array([0.1, 0.5, 0.2]), s=3)
    assert m.q_of({0, 2}) == pytest.approx(1 - 0.9 * 0.8)
    assert m.prob_empty() == pytest.approx(0.9 * 0.5 * 0.8)
    rows = dict(enumerate_supports(m))
    assert math.fsum(rows.values()) == pytest.approx(1.0)
    assert rows[frozenset({1})] == pytest.approx(0.9 * 0.5 * 0.8)


def test_marginal_condition_keeps_activities():
    m = MarginalModel.uniform(8, 3)
    c = m.condition({1, 4})
    assert c.indices == frozenset(range(8)) - {1, 4}
    assert c.s == 1
    assert c.q_of({0}) == pytest.approx(3 / 8)
    assert list(c.index_array()) == [0, 2, 3, 5, 6, 7]
    # conditioning returns a new object
    assert m.indices == frozenset(range(8))


def test_marginal_condition_to_empty():
    c = MarginalModel.uniform(2, 1).condition({0, 1})
    assert c.indices == frozenset()
    assert c.index_array().size == 0


def test_exponential_marginal_sums_to_s():
    m = MarginalModel.exponential(2**15, 3, mean=10)
    assert m.p.sum() == pytest.approx(3.0)
    assert np.all(np.diff(m.p) <= 0)


def test_enumeration_cap():
    with pytest.raises(UnsupportedOperation):
        enumerate_supports(MarginalModel.uniform(ENUMERATION_CAP + 1, 1))


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_random_explicit_q_matches_direct_sum(n, seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, n + 1))
    m = random_explicit(n, s, rng)
    for mask in range(1 << n):
        sub = frozenset(i for i in range(n) if mask >> i & 1)
        assert m.q_of(sub) == pytest.approx(q_table(m.table, sub), abs=1e-12)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_q_is_monotone_under_inclusion(n, seed):
    rng = np.random.default_rng(seed)
    m = random_explicit(n, min(2, n), rng)
    full = frozenset(range(n))
    for i in range(n):
        assert m.q_of(full - {i}) <= m.q_of(full) + 1e-15


def test_spec_round_trip(worked):
    again = model_from_spec(json.loads(json.dumps(model_to_spec(worked))))
    assert again.table.keys() == worked.table.keys()
    for k in worked.table:
        assert again.table[k] == pytest.approx(worked.table[k])


@pytest.mark.parametrize(
    "spec, field",
    [
        ({"marginal": {"s": 1}}, "marginal.n"),
        ({"marginal": {"n": "x", "s": 1}}, "marginal.n"),
        ({"marginal": {"n": 8, "s": 1, "position_pdf": "cauchy"}}, "position_pdf"),
        ({"marginal": {"n": 8, "s": 1, "position_pdf": "exponential", "mean": -1}}, "marginal.mean"),
        ({"marginal": {"n": 8, "s": 1, "colour": 1}}, "colour"),
        ({"explicit": [{"support": [0]}]}, "explicit[0]"),
        ({"explicit": [{"support": [0], "p": "a"}]}, "explicit[0].p"),
        ({"explicit": [{"support": 0, "p": 1.0}]}, "explicit[0].support"),
        ({"table": []}, "explicit"),
    ],
)
def test_malformed_specs_name_the_field(spec, field):
    with pytest.raises(ModelError, match=field.replace("[", r"\[").replace("]", r"\]")):
        model_from_spec(spec)


def test_load_model_rejects_bad_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    with pytest.raises(ModelError, match="not valid JSON"):
        load_model(path)


def test_load_model_file(configs):
    m = load_model(configs / "worked_example.json")
    assert (m.n, m.s) == (4, 2)
    assert m.prob_empty() == pytest.approx(0.02)
