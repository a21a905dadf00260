import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodkit import DomainError, mmod, mparts
from prodkit.modulus import log_mmod

pos = st.floats(min_value=1e-150, max_value=1e150, allow_nan=False, allow_infinity=False)


def test_examples():
    assert mmod(2.0) == 2.0
    assert mmod(0.5) == 2.0
    assert mmod(1.0) == 1.0
    assert mparts(2.0) == (2.0, 1.0)
    assert mparts(0.25) == (1.0, 4.0)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf"), -0.0])
def test_rejects_non_positive(bad):
    with pytest.raises(DomainError):
        mmod(bad)
    with pytest.raises(DomainError):
        mparts(bad)


def test_array_reports_offending_entry():
    with pytest.raises(DomainError, match="entry 2"):
        mmod(np.array([1.0, 2.0, -3.0]))


@given(pos)
def test_at_least_one(x):
    assert mmod(x) >= 1.0


@given(pos)
def test_identity_only_at_one(x):
    assert (mmod(x) == 1.0) == (x == 1.0)


@given(pos)
def test_reciprocal_symmetry(x):
    assert math.isclose(mmod(1.0 / x), mmod(x), rel_tol=4e-16)


@given(pos, pos)
def test_submultiplicative(x, y):
    assert mmod(x * y) <= mmod(x) * mmod(y) * (1 + 4e-16)


@given(pos)
def test_parts_reconstruct(x):
    p, q = mparts(x)
    assert p >= 1.0 and q >= 1.0
    assert math.isclose(p / q, x, rel_tol=1e-12)
    assert math.isclose(p * q, mmod(x), rel_tol=1e-12)


@given(pos)
def test_parts_match_closed_form(x):
    m = mmod(x)
    p, q = mparts(x)
    assert math.isclose(p, math.sqrt(m * x), rel_tol=1e-12)
    assert math.isclose(q, math.sqrt(m / x), rel_tol=1e-12)


@settings(max_examples=50)
@given(st.lists(pos, min_size=1, max_size=50))
def test_vectorized_matches_scalar(xs):
    arr = np.array(xs)
    assert np.array_equal(mmod(arr), [mmod(x) for x in xs])
    p, q = mparts(arr)
    assert np.array_equal(p, [mparts(x)[0] for x in xs])
    assert np.allclose(log_mmod(arr), np.abs(np.log(arr)), rtol=0, atol=0)
