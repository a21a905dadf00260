"""Compensated summation kernels.

Two independent error channels are provided:

* ``neumaier_cumsum`` -- Kahan-Neumaier compensated prefix sums, vectorized.
  numpy's ``cumsum`` performs exactly the sequential roundings of the naive
  running sum, so the per-step rounding errors can be recovered afterwards
  with the TwoSum transformation and accumulated separately. This is the same
  arithmetic as the textbook scalar loop.
* ``DoubleDouble`` / ``dd_cumsum`` -- a scalar double-double (about 106-bit)
  accumulator, deliberately written as a plain loop on Python floats.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["two_sum", "neumaier_cumsum", "DoubleDouble", "dd_cumsum", "dd_sum"]


def two_sum(a, b):
    """Error-free transformation: ``a + b == s + err`` exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def neumaier_cumsum(x, start=0.0, start_comp=0.0):
    """Compensated prefix sums of ``x`` continuing from ``start + start_comp``.

    Returns ``(hi, comp)`` arrays; the compensated partial sums are
    ``hi + comp`` and ``hi[-1], comp[-1]`` is the state to resume from.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.empty(0), np.empty(0)
    run = np.cumsum(np.concatenate([[start], x]))
    prev, hi = run[:-1], run[1:]
    with np.errstate(invalid="ignore"):
        bb = hi - prev
        err = (prev - (hi - bb)) + (x - bb)
    comp = np.cumsum(err) + start_comp
    return hi, comp


class DoubleDouble:
    """Running sum held as an unevaluated pair ``hi + lo``."""

    __slots__ = ("hi", "lo")

    def __init__(self, value=0.0):
        self.hi = float(value)
        self.lo = 0.0

    def add(self, x):
        s = self.hi + x
        bb = s - self.hi
        e = (self.hi - (s - bb)) + (x - bb)
        e += self.lo
        hi = s + e
        self.lo = e - (hi - s)
        self.hi = hi

    @property
    def value(self):
        return self.hi + self.lo


def dd_cumsum(x):
    """Double-double prefix sums of ``x`` (rounded to binary64 on output)."""
    hi = 0.0
    lo = 0.0
    out = []
    append = out.append
    for v in map(float, x):
        s = hi + v
        bb = s - hi
        e = (hi - (s - bb)) + (v - bb) + lo
        hi = s + e
        lo = e - (hi - s)
        append(hi + lo)
    return np.array(out, dtype=float)


def dd_sum(x):
    acc = DoubleDouble()
    for v in map(float, x):
        acc.add(v)
    return acc.value


def exact_sum(x):
    """Correctly rounded sum; used where a third reference is convenient."""
    return math.fsum(map(float, x))
