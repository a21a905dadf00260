"""Lazily evaluable sequences and index-mapping views.

Every sequence maps integer indices (starting at ``origin``) to reals through
vectorized evaluation on index arrays. Factor sequences (``positive=True``)
validate that every realized term is finite and strictly positive; exponent,
weight and coefficient sequences are created with ``positive=False``.

Views (permutation, subproduct mask, termwise exponent, block interleaving)
never materialize their parents; they only translate indices.
"""
from __future__ import annotations

from numbers import Real

import numpy as np

from . import expr as _expr
from .errors import DomainError, EvaluationError

__all__ = [
    "Seq", "ExprSeq", "ListSeq", "FuncSeq", "ConstSeq",
    "MappedSeq", "PermutedSeq", "MaskedSeq", "ExponentiatedSeq", "InterleavedSeq",
    "as_seq", "eval_term", "mask_subproduct", "exponentiate", "interleave_blocks",
    "permute",
]


class Seq:
    """Base class: a real sequence indexed from ``origin``."""

    def __init__(self, origin=1, positive=True):
        if origin not in (0, 1):
            raise DomainError(f"index origin must be 0 or 1, got {origin!r}")
        self.origin = origin
        self.positive = positive

    #: number of realized terms for finite sources, None for unbounded ones
    length = None

    def _raw(self, idx):
        raise NotImplementedError

    def indices(self, count, start=None):
        start = self.origin if start is None else start
        return np.arange(start, start + count, dtype=np.int64)

    def values(self, idx):
        """Validated term values at the integer index array ``idx``."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and idx.min() < self.origin:
            raise EvaluationError(
                f"index {int(idx.min())} is below the sequence origin {self.origin}",
                int(idx.min()),
            )
        if self.length is not None and idx.size and idx.max() >= self.origin + self.length:
            bad = int(idx.max())
            raise EvaluationError(f"index {bad} is beyond the realized range of the sequence", bad)
        v = np.asarray(self._raw(idx), dtype=float)
        v = np.broadcast_to(v, idx.shape)
        ok = np.isfinite(v)
        if self.positive:
            ok &= v > 0.0
        if not ok.all():
            k = int(np.flatnonzero(~ok.ravel())[0])
            n = int(idx.ravel()[k])
            what = "finite and positive" if self.positive else "finite"
            raise EvaluationError(f"term at n={n} is {float(v.ravel()[k])!r}; terms must be {what}", n)
        return np.array(v, dtype=float)

    def head(self, count):
        """The first ``count`` terms."""
        return self.values(self.indices(count))

    def logs(self, idx):
        return np.log(self.values(idx))

    def term(self, n):
        return float(self.values(np.array([n]))[0])

    def __getitem__(self, n):
        return self.term(n)

    def describe(self):
        return type(self).__name__

    def __repr__(self):
        return f"<{self.describe()} origin={self.origin}>"


class ExprSeq(Seq):
    """Sequence defined by an expression in ``n``."""

    def __init__(self, source, origin=1, positive=True):
        super().__init__(origin, positive)
        if isinstance(source, str):
            self.text = source
            self.ast = _expr.parse_seq(source)
        else:
            self.ast = source
            self.text = _expr.to_text(source)

    def _raw(self, idx):
        return _expr.evaluate(self.ast, idx)

    def logs(self, idx):
        v = self.values(idx)
        lg = _expr.log_evaluate(self.ast, np.asarray(idx, dtype=np.int64))
        bad = ~np.isfinite(lg)
        if bad.any():
            lg = np.where(bad, np.log(v), lg)
        return lg

    def describe(self):
        return f"expr {self.text!r}"


class ListSeq(Seq):
    """Finite explicit list of terms."""

    def __init__(self, values, origin=1, positive=True):
        super().__init__(origin, positive)
        self.data = np.asarray(values, dtype=float).ravel()
        self.length = len(self.data)
        if positive:
            bad = ~(self.data > 0) | ~np.isfinite(self.data)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise EvaluationError(
                    f"term at n={k + origin} is {float(self.data[k])!r}; terms must be finite and positive",
                    k + origin,
                )

    def _raw(self, idx):
        return self.data[idx - self.origin]

    def describe(self):
        return f"list[{self.length}]"


class FuncSeq(Seq):
    """Sequence given by a Python callable.

    With ``vectorized=True`` the callable receives an int64 index array and
    must return an array of the same shape; otherwise it is called per index.
    """

    def __init__(self, func, origin=1, positive=True, vectorized=True, name=None):
        super().__init__(origin, positive)
        self.func = func
        self.vectorized = vectorized
        self.name = name or getattr(func, "__name__", "func")

    def _raw(self, idx):
        if self.vectorized:
            with np.errstate(all="ignore"):
                return self.func(idx)
        return np.array([self.func(int(i)) for i in idx.ravel()], dtype=float).reshape(idx.shape)

    def describe(self):
        return f"func {self.name}"


class ConstSeq(Seq):
    def __init__(self, value, origin=1, positive=True):
        super().__init__(origin, positive)
        self.value = float(value)

    def _raw(self, idx):
        return np.full(idx.shape, self.value)

    def describe(self):
        return f"const {self.value!r}"


def as_seq(obj, origin=1, positive=True):
    """Coerce an expression string, list, callable, number or Seq into a Seq."""
    if isinstance(obj, Seq):
        return obj
    if isinstance(obj, str):
        return ExprSeq(obj, origin, positive)
    if isinstance(obj, Real):
        return ConstSeq(obj, origin, positive)
    if callable(obj):
        return FuncSeq(obj, origin, positive)
    return ListSeq(obj, origin, positive)


def eval_term(seq, n):
    """The ``n``-th term of ``seq`` (raises EvaluationError naming ``n``)."""
    return as_seq(seq).term(n)


class MappedSeq(Seq):
    """Termwise transform ``fn(parent values)``, e.g. the multiplicative modulus."""

    def __init__(self, parent, fn, positive=True, name="map"):
        super().__init__(parent.origin, positive)
        self.parent = parent
        self.fn = fn
        self.name = name
        self.length = parent.length

    def _raw(self, idx):
        return self.fn(self.parent.values(idx))

    def describe(self):
        return f"{self.name}({self.parent.describe()})"


class PermutedSeq(Seq):
    """Rearrangement view: term ``n`` is the parent term at ``perm(n)``.

    ``perm`` is either a callable on index arrays or an array listing parent
    indices for view positions ``origin, origin+1, ...``; beyond the array the
    mapping is the identity.
    """

    def __init__(self, parent, perm):
        super().__init__(parent.origin, parent.positive)
        self.parent = parent
        self.length = parent.length
        if callable(perm):
            self._map = perm
        else:
            table = np.asarray(perm, dtype=np.int64)
            o = parent.origin

            def _map(idx, table=table, o=o):
                out = idx.copy()
                inside = (idx - o) < len(table)
                out[inside] = table[idx[inside] - o]
                return out

            self._map = _map

    def _raw(self, idx):
        return self.parent.values(self._map(idx))

    def describe(self):
        return f"permuted({self.parent.describe()})"


def permute(seq, perm):
    return PermutedSeq(as_seq(seq), perm)


class MaskedSeq(Seq):
    """Subproduct view: ``b_k = a_k`` where ``keep(k)``, else 1.

    Whether infinitely many indices are kept cannot be decided; ``check``
    counts kept indices up to a horizon and records the assumption.
    """

    def __init__(self, parent, keep):
        super().__init__(parent.origin, True)
        self.parent = parent
        self.length = parent.length
        if callable(keep):
            self._keep = keep
        else:
            kept = np.unique(np.asarray(list(keep), dtype=np.int64))
            self._keep = lambda idx, kept=kept: np.isin(idx, kept)
        self.diagnostics = []

    def kept(self, idx):
        return np.broadcast_to(np.asarray(self._keep(np.asarray(idx)), dtype=bool), np.shape(idx))

    def _raw(self, idx):
        k = self.kept(idx)
        out = np.ones(idx.shape)
        if k.any():
            out[k] = self.parent.values(idx[k])
        return out

    def check(self, horizon):
        """Count kept indices in ``origin .. origin+horizon-1``; flags a degenerate mask."""
        count = int(self.kept(self.indices(horizon)).sum())
        self.diagnostics = [f"assumed: infinitely many factors kept (checked up to horizon {horizon})"]
        if count == 0:
            self.diagnostics.append(f"no factor kept up to horizon {horizon}: view is constant 1")
        return count

    def describe(self):
        return f"masked({self.parent.describe()})"


def mask_subproduct(seq, keep):
    return MaskedSeq(as_seq(seq), keep)


class ExponentiatedSeq(Seq):
    """Termwise power view ``a_n ** c_n`` with ``-1 <= c_n <= 1``."""

    def __init__(self, parent, exps, bounded=True):
        super().__init__(parent.origin, True)
        self.parent = parent
        self.exps = as_seq(exps, parent.origin, positive=False)
        self.bounded = bounded
        self.length = parent.length

    def _raw(self, idx):
        c = self.exps.values(idx)
        if self.bounded:
            bad = np.abs(c) > 1.0
            if bad.any():
                n = int(idx.ravel()[np.flatnonzero(bad.ravel())[0]])
                raise DomainError(f"exponent at n={n} is {float(c.ravel()[np.flatnonzero(bad.ravel())[0]])!r}, outside [-1, 1]")
        out = np.exp(c * self.parent.logs(idx))
        unit = np.abs(c) == 1.0
        if unit.any():
            # exact for the identity and reciprocal exponents
            v = self.parent.values(idx)
            out = np.where(c == 1.0, v, np.where(c == -1.0, 1.0 / v, out))
        return out

    def logs(self, idx):
        self.values(idx)
        return self.exps.values(idx) * self.parent.logs(idx)

    def describe(self):
        return f"({self.parent.describe()})^({self.exps.describe()})"


def exponentiate(seq, exps):
    return ExponentiatedSeq(as_seq(seq), exps)


class InterleavedSeq(Seq):
    """Merge two streams by blocks delimited by ``p(1) < p(2) < ...``.

    Positions ``1..p(1)`` take the next terms of ``a``, ``p(1)+1..p(2)`` the
    next terms of ``b``, ``p(2)+1..p(3)`` continue ``a`` and so on. With
    ``p(n) = n`` this is ``a_1, b_1, a_2, b_2, ...``.
    """

    def __init__(self, a, b, boundaries, max_gap=None):
        super().__init__(1, True)
        self.a = a
        self.b = b
        self.max_gap = max_gap
        if callable(boundaries):
            self._rule = boundaries
            self._fixed = None
        else:
            self._rule = None
            self._fixed = np.asarray(boundaries, dtype=np.int64)
            self._validate(np.concatenate([[0], self._fixed]))
        self._bounds = np.zeros(1, dtype=np.int64)

    def _validate(self, P):
        d = np.diff(P)
        if (d <= 0).any():
            j = int(np.flatnonzero(d <= 0)[0]) + 1
            raise DomainError(f"block boundaries must be strictly increasing (fails at p({j}) = {int(P[j])})")
        if self.max_gap is not None and (d[1:] > self.max_gap).any():
            j = int(np.flatnonzero(d[1:] > self.max_gap)[0]) + 2
            raise DomainError(f"block gap p({j}) - p({j - 1}) exceeds the bound {self.max_gap}")

    def _ensure(self, pos):
        P = self._bounds
        if P[-1] >= pos:
            return
        if self._fixed is not None:
            P = np.concatenate([[0], self._fixed])
            if P[-1] < pos:
                raise EvaluationError(f"position {pos} lies beyond the last block boundary", int(pos))
        else:
            count = max(16, 2 * (len(P) - 1))
            while True:
                j = np.arange(1, count + 1, dtype=np.int64)
                vals = np.asarray(self._rule(j), dtype=np.int64)
                P = np.concatenate([[0], vals])
                self._validate(P)
                if P[-1] >= pos:
                    break
                count *= 2
        self._bounds = P
        lengths = np.diff(P)
        odd = (np.arange(1, len(P)) % 2) == 1
        self._a_before = np.concatenate([[0], np.cumsum(np.where(odd, lengths, 0))])
        self._b_before = np.concatenate([[0], np.cumsum(np.where(odd, 0, lengths))])

    def source(self, idx):
        """For merged positions ``idx`` return ``(from_a, parent index)`` arrays."""
        idx = np.asarray(idx, dtype=np.int64)
        self._ensure(int(idx.max()) if idx.size else 0)
        P = self._bounds
        j = np.searchsorted(P, idx, side="left")
        offset = idx - P[j - 1] - 1
        from_a = (j % 2) == 1
        src = np.where(
            from_a,
            self.a.origin + self._a_before[j - 1] + offset,
            self.b.origin + self._b_before[j - 1] + offset,
        )
        return from_a, src

    def _raw(self, idx):
        from_a, src = self.source(idx)
        out = np.empty(idx.shape)
        if from_a.any():
            out[from_a] = self.a.values(src[from_a])
        if (~from_a).any():
            out[~from_a] = self.b.values(src[~from_a])
        return out

    def describe(self):
        return f"interleave({self.a.describe()}, {self.b.describe()})"


def interleave_blocks(a, b, boundaries, max_gap=None):
    return InterleavedSeq(as_seq(a), as_seq(b), boundaries, max_gap)
