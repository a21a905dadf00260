import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodkit import ExprSyntaxError, UnknownIdentifierError, parse_seq, to_text
from prodkit.expr import BinOp, Call, Neg, Num, Var, evaluate, log_evaluate


def test_alternating_shape():
    t = parse_seq("exp((-1)^(n+1)/n)")
    assert t == Call("exp", BinOp("/", BinOp("^", Neg(Num(1.0)), BinOp("+", Var(), Num(1.0))), Var()))


def test_sum_shape():
    assert parse_seq("1 + 1/n") == BinOp("+", Num(1.0), BinOp("/", Num(1.0), Var()))


def test_power_is_right_associative():
    assert parse_seq("2^3^2") == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))
    assert evaluate(parse_seq("2^3^2"), 1) == 512.0


def test_unary_minus_binds_tighter_than_power():
    assert evaluate(parse_seq("-n^2"), 3) == 9.0
    assert evaluate(parse_seq("-(n^2)"), 3) == -9.0


@pytest.mark.parametrize("text,offset", [
    ("exp(1/n", 7), ("1 +", 3), ("", 0), ("n $ 2", 2), ("(n))", 3), ("2 n", 2),
])
def test_syntax_errors_carry_position(text, offset):
    with pytest.raises(ExprSyntaxError) as ei:
        parse_seq(text)
    assert ei.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as ei:
        parse_seq("1 + gamma(n)")
    assert ei.value.offset == 4
    with pytest.raises(UnknownIdentifierError):
        parse_seq("x + 1")


def test_parity_is_exact():
    n = np.arange(1, 2_000_001, dtype=np.int64)
    v = evaluate(parse_seq("(-1)^(n+1)"), n)
    assert np.array_equal(v, np.where(n % 2 == 1, 1.0, -1.0))


def test_negative_base_fractional_power_is_nan():
    assert math.isnan(evaluate(parse_seq("(-2)^0.5"), 1))


def test_functions():
    n = np.arange(1, 6)
    got = evaluate(parse_seq("sqrt(n) + abs(sin(n)) * cos(n) - log(n)"), n)
    want = np.sqrt(n) + np.abs(np.sin(n)) * np.cos(n) - np.log(n)
    assert np.allclose(got, want, rtol=1e-15)


def test_log_evaluate_avoids_rounding_near_one():
    n = np.array([10**6, 10**8], dtype=np.int64)
    lg = log_evaluate(parse_seq("exp(1/n^2)"), n)
    assert np.array_equal(lg, 1.0 / n.astype(float) ** 2)
    lg = log_evaluate(parse_seq("1 + 1/n"), n)
    assert np.allclose(lg, np.log1p(1.0 / n), rtol=1e-16)


@st.composite
def trees(draw, depth=0):
    if depth > 3 or draw(st.booleans()):
        return draw(st.one_of(
            st.just(Var()),
            st.integers(0, 9).map(lambda k: Num(float(k))),
            st.sampled_from([0.5, 2.5, 1e-3]).map(Num),
        ))
    kind = draw(st.sampled_from(["bin", "neg", "call"]))
    if kind == "bin":
        return BinOp(draw(st.sampled_from("+-*/^")), draw(trees(depth + 1)), draw(trees(depth + 1)))
    if kind == "neg":
        return Neg(draw(trees(depth + 1)))
    return Call(draw(st.sampled_from(["exp", "log", "sqrt", "abs", "sin", "cos"])), draw(trees(depth + 1)))


@settings(max_examples=300)
@given(trees())
def test_round_trip(t):
    assert parse_seq(to_text(t)) == t


@settings(max_examples=100)
@given(trees())
def test_round_trip_preserves_values(t):
    n = np.arange(1, 8)
    a = evaluate(t, n)
    b = evaluate(parse_seq(to_text(t)), n)
    assert np.array_equal(a, b, equal_nan=True)
