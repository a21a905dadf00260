import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from prodkit import DomainError
from prodkit.matprod import (
    SummabilityMatrix, check_homomorphisms, random_homomorphism_trials, regular_transform,
    star_apply,
)


def test_identity_matrix():
    x = np.array([0.3, 2.0, 7.5])
    assert np.allclose(star_apply(np.eye(3), x), x, rtol=1e-15)


def test_direct_formula():
    assert np.allclose(star_apply([[1, 2], [0, 1]], [2, 3]), [18.0, 3.0], rtol=1e-14)


def test_all_ones_vector():
    A = np.random.default_rng(0).normal(size=(4, 3))
    assert np.array_equal(star_apply(A, np.ones(3)), np.ones(4))


def test_errors():
    with pytest.raises(DomainError):
        star_apply([[1, 2]], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        star_apply([[1, 2]], [1.0, -2.0])


def test_zero_and_inverse_pairings():
    rng = np.random.default_rng(2)
    A = rng.integers(-3, 4, size=(3, 3)).astype(float)
    B = rng.integers(-3, 4, size=(3, 3)).astype(float)
    x = np.exp(rng.uniform(-2, 2, 3))
    Z = np.zeros((3, 3))
    assert np.array_equal(star_apply(Z, star_apply(A, x)), np.ones(3))
    assert np.array_equal(star_apply(Z @ A, x), np.ones(3))
    rep = check_homomorphisms(A, B, -B, A, A, x, x, x)
    assert rep["passed"]
    assert np.array_equal(star_apply(-B + B, x), np.ones(3))
    assert np.allclose(star_apply(-B, x) * star_apply(B, x), 1.0, rtol=1e-13)


def test_random_trials_seeded():
    rep = random_homomorphism_trials(100, 3, seed=7)
    assert rep["passed"] and rep["failures"] == 0
    assert rep == random_homomorphism_trials(100, 3, seed=7)


logvec = st.lists(st.floats(-3, 3), min_size=1, max_size=5)


@settings(max_examples=200)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_homomorphism_in_x(m, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x, xp = np.exp(rng.uniform(-2, 2, n)), np.exp(rng.uniform(-2, 2, n))
    lhs = star_apply(A, x * xp)
    rhs = star_apply(A, x) * star_apply(A, xp)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_cesaro_closed_form():
    tr, rep = regular_transform(SummabilityMatrix.cesaro(), "1+1/n", m_max=10**6)
    assert rep.hypotheses_hold and rep.conclusion.converges
    assert abs(tr.last() - oracles.CESARO_Y_1E6) < 1e-12
    assert abs(tr.last() - 1) < 1e-4
    for m, y in zip(tr.n[:10], tr.values[:10]):
        assert y == pytest.approx((m + 1) ** (1.0 / m), rel=1e-14)


def test_constant_one_sequence():
    tr, rep = regular_transform(SummabilityMatrix.cesaro(), "1", m_max=10**4)
    assert (tr.values == 1.0).all()


def test_normalized_limit():
    tr, rep = regular_transform(SummabilityMatrix.cesaro(), "3*(1+1/n)", m_max=10**5, p=3.0)
    assert rep.hypotheses_hold and abs(tr.last() - 1) < 1e-3


def test_column_condition_violation():
    A = SummabilityMatrix.from_rule(lambda m, cols: np.where(cols == 1, 1.0, 1.0 / m) * (cols <= m),
                                    support=None, name="first-column")
    x = lambda n: np.where(n == 1, 2.0, 1.0 + 1.0 / n**2)
    tr, rep = regular_transform(A, x, m_max=10**4, rows=[10, 100, 1000, 10**4])
    col = next(h for h in rep.hypotheses if h.name.startswith("columns"))
    assert not col.holds and col.witness == 1
    assert rep.conclusion is None
    assert abs(tr.last() - 2) < 1e-2


def test_euler_rows():
    E = SummabilityMatrix.euler(0.5)
    for m in (1, 10, 1000, 10**5):
        assert abs(E.row(m).sum() - 1) < 1e-9
    tr, rep = regular_transform(E, "1+1/n", m_max=10**5)
    assert rep.hypotheses_hold and rep.conclusion.converges


def test_row_sum_violation():
    A = SummabilityMatrix.explicit([[1.0], [1.0, 1.0], [1.0, 1.0, 1.0]], M=1.5)
    tr, rep = regular_transform(A, "1+1/n")
    bad = next(h for h in rep.hypotheses if h.name == "row sums bounded")
    assert not bad.holds and bad.witness == 2


def test_spec_formats():
    assert SummabilityMatrix.from_spec({"kind": "cesaro"}).name == "cesaro"
    assert SummabilityMatrix.from_spec("euler:0.25").name == "euler:0.25"
    A = SummabilityMatrix.from_spec({"kind": "explicit-rows", "rows": [[1.0], [0.5, 0.5]]})
    assert A.n_rows == 2
    with pytest.raises(DomainError):
        SummabilityMatrix.from_spec({"kind": "toeplitz"})
