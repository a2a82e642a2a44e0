import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from huffcs.validate import (
    CheckResult,
    check_huffman_optimality,
    check_locate_bound,
    check_tree_invariants,
    classic_huffman_length,
)


def test_classic_huffman_length_known_codes():
    assert classic_huffman_length([0.5, 0.25, 0.125, 0.125]) == pytest.approx(1.75)
    assert classic_huffman_length([0.25] * 4) == pytest.approx(2.0)
    assert classic_huffman_length([1.0]) == 0.0


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=12))
def test_classic_huffman_length_within_entropy_bounds(w):
    total = math.fsum(w)
    p = [x / total for x in w]
    h = -math.fsum(x * math.log2(x) for x in p)
    length = classic_huffman_length(w)
    assert h - 1e-9 <= length < h + 1 + 1e-9


def test_checks_pass_on_small_runs():
    for res in (check_tree_invariants(60, seed=1), check_huffman_optimality(40, seed=1), check_locate_bound(40, seed=1)):
        assert res.passed, res.failures[:3]


def test_check_result_line():
    res = CheckResult("demo", 3, failures=[(0, "x")], worst=0.5)
    assert not res.passed
    assert res.line().startswith("FAIL demo: 3 models, 1 failures")
