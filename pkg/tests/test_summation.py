import math
import random

import numpy as np
from hypothesis import given, settings, strategies as st

from prodkit.summation import DoubleDouble, dd_cumsum, dd_sum, neumaier_cumsum, two_sum

finite = st.floats(min_value=-1e200, max_value=1e200, allow_nan=False)


@given(finite, finite)
def test_two_sum_is_error_free(a, b):
    s, e = two_sum(a, b)
    assert s == a + b
    assert math.fsum([a, b, -s, -e]) == 0.0


def test_cancellation():
    xs = [1.0, 1e100, 1.0, -1e100]
    hi, comp = neumaier_cumsum(xs)
    assert (hi + comp)[-1] == 2.0
    assert dd_sum(xs) == 2.0


@settings(max_examples=200)
@given(st.lists(st.floats(min_value=-1e10, max_value=1e10, allow_nan=False), min_size=1, max_size=200))
def test_compensated_prefix_sums_match_fsum(xs):
    hi, comp = neumaier_cumsum(xs)
    dd = dd_cumsum(xs)
    for k in (0, len(xs) // 2, len(xs) - 1):
        ref = math.fsum(xs[: k + 1])
        tol = 4 * 2.0**-52 * math.fsum(abs(x) for x in xs[: k + 1]) + 1e-300
        assert abs((hi + comp)[k] - ref) <= tol
        assert abs(dd[k] - ref) <= tol


def test_resume_from_state():
    rng = random.Random(3)
    xs = [rng.uniform(-1, 1) for _ in range(1000)]
    hi, comp = neumaier_cumsum(xs)
    h1, c1 = neumaier_cumsum(xs[:400])
    h2, c2 = neumaier_cumsum(xs[400:], h1[-1], c1[-1])
    assert h2[-1] + c2[-1] == hi[-1] + comp[-1]


def test_double_double_keeps_low_part():
    acc = DoubleDouble(1.0)
    for _ in range(10):
        acc.add(2.0**-60)
    assert acc.hi == 1.0
    assert acc.lo == 10 * 2.0**-60


def test_harmonic_sum_against_fsum():
    x = 1.0 / np.arange(1, 10**5 + 1)
    ref = math.fsum(x)
    hi, comp = neumaier_cumsum(x)
    assert abs((hi + comp)[-1] - ref) <= 2.0**-52 * ref
    assert abs(dd_sum(x) - ref) <= 2.0**-52 * ref
