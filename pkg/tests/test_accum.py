import json
import math

import numpy as np
import pytest

import oracles
from prodkit import Kind, LogAccumulator, Verdict, estimate_convergence, m_absolute_verdict
from prodkit.accum import (
    classify_logsums, get_precision, oracle_compare, oracle_verdict, partial_products,
    prefix_logsums, weighted_geometric_means,
)


def test_telescoping_partial_product():
    tr = partial_products("1+1/n", 4)
    assert math.isclose(tr.last(), 5.0, rel_tol=1e-15)
    assert [n for n, _ in tr] == [1, 2, 3, 4]


def test_constant_one():
    tr = partial_products("1", 1000)
    assert (tr.values == 1.0).all()


def test_basel_partial_product():
    tr = partial_products("exp(1/n^2)", 10**6)
    assert abs(tr.last() / math.exp(oracles.BASEL_LOGSUM_1E6) - 1) < 1e-9


def test_overflow_reported_not_lost():
    tr = partial_products("2", 2000)
    assert tr.overflow > 0 and tr.diagnostics
    assert math.isclose(tr.log_values[-1], 2000 * math.log(2), rel_tol=1e-14)


def test_bad_horizon():
    with pytest.raises(ValueError):
        partial_products("2", 0)


def test_alternating_harmonic_converges_to_two():
    v = estimate_convergence("exp((-1)^(n+1)/n)")
    assert v.kind is Kind.CONVERGES
    assert abs(v.limit_estimate - 2) < 1e-3
    assert abs(v.limit_estimate - oracles.ALT_PARTIAL_1E6) < 1e-12
    assert v.n_used == 10**6 and v.eps == 1e-9


def test_unbounded_growth():
    assert estimate_convergence("1+1/n").kind is Kind.DIVERGES_TO_INFINITY


def test_half_two_oscillates():
    v = estimate_convergence("2^((-1)^n)")
    assert v.kind is Kind.OSCILLATES
    assert math.isclose(v.liminf_estimate, 0.5, rel_tol=1e-12)
    assert math.isclose(v.limsup_estimate, 1.0, rel_tol=1e-12)


@pytest.mark.parametrize("name", sorted(oracles.CORPUS))
def test_corpus_kinds(name):
    text, kind, limit = oracles.CORPUS[name]
    v = estimate_convergence(text, N=2 * 10**5)
    assert v.kind.value == kind
    if limit is not None:
        assert abs(v.limit_estimate / limit - 1) < 1e-4


def test_verdict_invariants():
    with pytest.raises(ValueError):
        Verdict(Kind.CONVERGES)
    with pytest.raises(ValueError):
        Verdict(Kind.OSCILLATES, liminf_estimate=2.0, limsup_estimate=1.0)


def test_verdict_json_keys_and_non_finite():
    v = Verdict(Kind.OSCILLATES, liminf_estimate=0.5, limsup_estimate=math.inf, n_used=3)
    d = json.loads(v.to_json())
    assert list(d) == ["kind", "limit_estimate", "liminf", "limsup", "n_used", "eps", "evidence"]
    assert d["limsup"] is None


def test_m_absolute_alt_basel():
    v, report = m_absolute_verdict("exp((-1)^(n+1)/n^2)")
    assert v.kind is Kind.CONVERGES
    assert abs(v.limit_estimate - oracles.BASEL) < 1e-5
    assert report["sandwich_holds"] and report["plain_converges"]
    lo, mid, hi = report["bounds"]
    assert lo <= mid <= hi


def test_m_absolute_alt_harmonic_diverges():
    v, report = m_absolute_verdict("exp((-1)^(n+1)/n)")
    assert v.kind is Kind.DIVERGES_TO_INFINITY
    assert report["sandwich_holds"] is None


def test_m_absolute_constant_one_is_tight():
    v, report = m_absolute_verdict("1", N=1000)
    assert v.limit_estimate == 1.0
    assert report["bounds"] == [1.0, 1.0, 1.0]


def test_weighted_means_constant():
    tr = weighted_geometric_means("4", "1/n", 1000)
    assert np.allclose(tr.values, 4.0, rtol=1e-14)


def test_weighted_means_three():
    tr = weighted_geometric_means("3+1/n", "1", 10**5)
    assert abs(tr.last() - 3) < 1e-2
    assert not tr.diagnostics


def test_weighted_means_summable_weights_flagged():
    tr = weighted_geometric_means("2^((-1)^(n+1))", "2^(-n)", 200)
    assert any("precondition" in d for d in tr.diagnostics)


def test_log_accumulator_batches_match_prefix_sums():
    rng = np.random.default_rng(1)
    logs = rng.normal(size=5000) * 1e-3
    acc = LogAccumulator(window=16)
    for chunk in np.array_split(logs, 7):
        acc.extend(chunk)
    ref = prefix_logsums(logs)[-1]
    assert abs(acc.total - ref) <= 1e-15
    assert len(acc.window) == 16
    assert math.isclose(acc.value, math.exp(ref), rel_tol=1e-15)


def test_precision_switch(monkeypatch):
    monkeypatch.setenv("PRODKIT_PRECISION", "oracle")
    assert get_precision() == "oracle"
    acc = LogAccumulator()
    acc.extend([0.1] * 10)
    assert abs(acc.total - 1.0) < 1e-15
    v = estimate_convergence("exp(1/n^2)", N=10**4)
    assert v.kind is Kind.CONVERGES
    monkeypatch.setenv("PRODKIT_PRECISION", "triple")
    with pytest.raises(ValueError):
        get_precision()


def test_oracle_compare_examples():
    for text in ("exp(1/n^2)", "1+1/n", "exp((-1)^(n+1)/n)"):
        rep = oracle_compare(text)
        assert rep["kinds_agree"], text
        assert rep["logsum_rel_diff"] < 1e-12
        if rep["limit_rel_diff"] is not None:
            assert rep["limit_rel_diff"] < 1e-6


def test_oracle_alone_on_basel():
    v, S = oracle_verdict("exp(1/n^2)")
    assert v.kind is Kind.CONVERGES
    assert abs(S[-1] - oracles.BASEL_LOGSUM_1E6) < 1e-14


def test_classifier_short_horizon():
    v = classify_logsums(np.array([0.0, 0.1]), 1e-9)
    assert v.kind is Kind.INCONCLUSIVE and "too short" in v.evidence
    assert classify_logsums(np.zeros(3), 1e-9).limit_estimate == 1.0


def test_deterministic():
    a = estimate_convergence("exp(sin(n)/n)", N=10**5).to_json()
    b = estimate_convergence("exp(sin(n)/n)", N=10**5).to_json()
    assert a == b
