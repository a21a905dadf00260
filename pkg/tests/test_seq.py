import math

import numpy as np
import pytest

import oracles
from prodkit import (
    DomainError, EvaluationError, as_seq, eval_term, exponentiate, interleave_blocks,
    mask_subproduct, permute,
)
from prodkit.accum import estimate_convergence, oracle_verdict
from prodkit.seq import ListSeq


def test_eval_term():
    assert eval_term("1+1/n", 1) == 2.0
    assert math.isclose(eval_term("exp((-1)^(n+1)/n)", 2), 0.606530659713, rel_tol=1e-11)


def test_non_positive_term_names_index():
    with pytest.raises(EvaluationError) as ei:
        eval_term("1 - 2/n", 1)
    assert ei.value.index == 1
    with pytest.raises(EvaluationError) as ei:
        as_seq("1 - 2/n").head(10)
    assert ei.value.index == 1


def test_non_finite_term():
    with pytest.raises(EvaluationError):
        as_seq("1/(n-3)").head(5)


def test_list_bounds_and_origin():
    s = ListSeq([3.0, 4.0, 5.0], origin=0)
    assert s[0] == 3.0 and s[2] == 5.0
    with pytest.raises(EvaluationError):
        s[3]
    with pytest.raises(EvaluationError):
        ListSeq([1.0, -2.0])


def test_bad_origin():
    with pytest.raises(DomainError):
        as_seq("n", origin=2)


def test_mask_even():
    s = mask_subproduct("n+1", lambda k: k % 2 == 0)
    assert list(s.head(6)) == [1.0, 3.0, 1.0, 5.0, 1.0, 7.0]


def test_mask_all_is_identity():
    a = as_seq("exp(sin(n))")
    assert np.array_equal(mask_subproduct(a, lambda k: np.ones(k.shape, bool)).head(1000), a.head(1000))


def test_mask_none_flags_degenerate():
    s = mask_subproduct("n+1", lambda k: np.zeros(k.shape, bool))
    assert s.check(1000) == 0
    assert any("constant 1" in d for d in s.diagnostics)
    assert (s.head(100) == 1.0).all()


def test_exponentiate_identity_and_inverse():
    a = as_seq("1+1/n")
    assert np.array_equal(exponentiate(a, 1.0).head(100), a.head(100))
    assert np.allclose(exponentiate(a, -1.0).head(100), 1.0 / a.head(100), rtol=1e-15)


def test_exponentiate_sin():
    n = np.arange(1, 1001)
    got = exponentiate("exp(1/n^2)", "sin(n)").head(1000)
    assert np.allclose(got, np.exp(np.sin(n) / n**2), rtol=1e-15)


def test_exponent_out_of_range():
    with pytest.raises(DomainError, match="n=2"):
        exponentiate("2", "n/1.5").head(3)


def test_interleave_alternating():
    s = interleave_blocks("n", "100+n", lambda j: j)
    assert list(s.head(6)) == [1.0, 101.0, 2.0, 102.0, 3.0, 103.0]


def test_interleave_blocks_pattern():
    s = interleave_blocks("n", "100+n", [2, 3, 6, 7])
    assert list(s.head(7)) == [1.0, 2.0, 101.0, 3.0, 4.0, 5.0, 102.0]


def test_interleave_rejects_non_increasing():
    with pytest.raises(DomainError):
        interleave_blocks("n", "n", [1, 3, 3])
    with pytest.raises(DomainError):
        interleave_blocks("n", "n", [1, 2, 10], max_gap=4)


def test_interleave_with_unit_stream():
    s = interleave_blocks("exp(1/n^2)", "1", lambda j: j)
    v = estimate_convergence(s, N=2 * 10**5)
    assert v.kind == "Converges"
    assert abs(v.limit_estimate / oracles.BASEL - 1) < 1e-5


def test_interleave_square():
    s = interleave_blocks("exp(1/n^2)", "exp(1/n^2)", lambda j: j)
    v = estimate_convergence(s, N=2 * 10**5)
    o, _ = oracle_verdict(s, N=2 * 10**5)
    assert v.kind == o.kind == "Converges"
    assert abs(v.limit_estimate / oracles.BASEL**2 - 1) < 1e-4
    assert abs(v.limit_estimate / o.limit_estimate - 1) < 1e-12


def test_views_compose_in_any_order():
    n = np.arange(1, 10_001)
    base = as_seq("exp(1/n) * (2 + sin(n))")
    # index-disjoint parameters: the permutation swaps n <-> n+1 for odd n <= 9999
    perm = np.where(n % 2 == 1, n + 1, n - 1)
    keep = lambda k: k % 3 != 0
    exps = as_seq("cos(n)", positive=False)
    a = exponentiate(mask_subproduct(permute(base, perm), keep), exps).head(10_000)
    b = permute(exponentiate(mask_subproduct(base, lambda k: np.isin(k, perm[keep(n)])), as_seq(lambda k: np.cos(np.where(k % 2 == 1, k + 1, k - 1)), positive=False)), perm).head(10_000)
    assert np.allclose(a, b, rtol=1e-14)


def test_eval_is_deterministic():
    s = as_seq("exp((-1)^(n+1)/n)")
    assert np.array_equal(s.head(1000), s.head(1000))
