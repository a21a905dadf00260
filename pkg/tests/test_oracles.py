import mpmath as mp
import pytest

import oracles


@pytest.fixture(autouse=True)
def _dps():
    with mp.workdps(30):
        yield


def close(frozen, exact):
    return abs(frozen - float(exact)) <= 1e-15 * max(1.0, abs(float(exact)))


def test_product_limits():
    assert close(oracles.BASEL, mp.exp(mp.pi**2 / 6))
    assert close(oracles.ALT_BASEL, mp.exp(mp.pi**2 / 12))
    assert close(oracles.NEG_BASEL, mp.exp(-mp.pi**2 / 6))
    assert close(oracles.HALF_PI, mp.pi / 2)
    assert close(oracles.TWO_OVER_PI, 2 / mp.pi)
    assert close(oracles.E_E, mp.exp(mp.e))
    assert close(oracles.E_SQUARED, mp.exp(2))
    assert close(oracles.E_FOURTH, mp.exp(4))
    assert close(oracles.INV_SQRT2, 1 / mp.sqrt(2))


def test_partial_sums():
    N = oracles.N_DEFAULT
    assert close(oracles.BASEL_LOGSUM_1E6, mp.zeta(2) - mp.psi(1, N + 1))
    half = (mp.digamma(mp.mpf(N + 2) / 2) - mp.digamma(mp.mpf(N + 1) / 2)) / 2
    alt = mp.log(2) - half
    assert close(oracles.ALT_LOGSUM_1E6, alt)
    assert close(oracles.ALT_PARTIAL_1E6, mp.exp(alt))
    assert close(oracles.CESARO_Y_1E6, mp.power(N + 1, mp.mpf(1) / N))


def test_wallis_partial_by_direct_sum():
    # small enough to sum term by term in mpmath
    s = mp.fsum(mp.log1p(mp.mpf(1) / k) * (1 if k % 2 else -1) for k in range(1, 2001))
    assert abs(float(mp.exp(s)) - oracles.HALF_PI) < 1e-3


def test_tail_index():
    n0 = oracles.TAIL_N0_1E3
    assert mp.expm1(mp.psi(1, n0 + 1)) < mp.mpf("1e-3") <= mp.expm1(mp.psi(1, n0))
