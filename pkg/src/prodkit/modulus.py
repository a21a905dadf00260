"""Multiplicative modulus and multiplicative positive/negative parts.

On the multiplicative group of positive reals the role of ``|x|`` is played by
``|x|_x = max(x, 1/x)``: it is ``>= 1``, equals 1 only at the identity, is
symmetric under inversion and is submultiplicative.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["mmod", "mparts", "log_mmod", "check_positive"]


def check_positive(x, what="argument"):
    """Return ``x`` as float or float array, raising DomainError unless all entries are > 0."""
    if np.ndim(x) == 0:
        xf = float(x)
        if not xf > 0.0 or xf == float("inf"):
            raise DomainError(f"{what} must be a finite positive real, got {x!r}")
        return xf
    arr = np.asarray(x, dtype=float)
    bad = ~(arr > 0.0) | ~np.isfinite(arr)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"{what} must be finite and positive; entry {i} is {arr.flat[i]!r}")
    return arr


def mmod(x):
    """Multiplicative absolute value ``max(x, 1/x)``.

    Accepts a scalar or an array. The comparison is exact; only the reciprocal
    rounds.

    >>> mmod(2.0), mmod(0.5), mmod(1.0)
    (2.0, 2.0, 1.0)
    """
    x = check_positive(x)
    if isinstance(x, float):
        return x if x >= 1.0 else 1.0 / x
    return np.where(x >= 1.0, x, 1.0 / x)


def log_mmod(x):
    """``log mmod(x) == |log x|``, computed without forming the reciprocal."""
    x = check_positive(x)
    if isinstance(x, float):
        return abs(float(np.log(x)))
    return np.abs(np.log(x))


def mparts(x):
    """Multiplicative positive and negative parts ``(p, q)`` of ``x``.

    ``p = (mmod(x) * x) ** 0.5`` and ``q = (mmod(x) / x) ** 0.5``, so that
    ``p / q == x``, ``p * q == mmod(x)`` and ``p, q >= 1``. Both closed forms
    collapse to one branch each (``(x, 1)`` above 1, ``(1, 1/x)`` below), which
    is evaluated directly and cannot overflow.
    """
    x = check_positive(x)
    if isinstance(x, float):
        return (x, 1.0) if x >= 1.0 else (1.0, 1.0 / x)
    big = x >= 1.0
    return np.where(big, x, 1.0), np.where(big, 1.0, 1.0 / x)
