"""Exponentiation action of real matrices on positive vectors and the product transform.

``A * x`` has entries ``prod_j x_j^(a_ij)``; after taking logs it is the
ordinary matrix-vector product, which is how it is computed here.
"""
from __future__ import annotations

import math

import numpy as np

from .accum import DEFAULT_EPS, Kind, Trace, Verdict
from .convtests import TAIL_TOL, HypCheck, TestReport
from .errors import DomainError
from .modulus import check_positive
from .seq import as_seq
from .summation import neumaier_cumsum

__all__ = [
    "star_apply", "star_log", "check_homomorphisms", "random_homomorphism_trials",
    "SummabilityMatrix", "regular_transform",
]


def _matrix(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise DomainError(f"{name} has non-finite entries")
    return A


def star_log(A, logx):
    """``log(A * x)`` from ``log x``."""
    A = _matrix(A)
    logx = np.asarray(logx, dtype=float)
    if A.shape[1] != logx.shape[0]:
        raise DomainError(f"dimension mismatch: matrix is {A.shape[0]}x{A.shape[1]}, vector has {logx.shape[0]} entries")
    return A @ logx


def star_apply(A, x):
    """``(A * x)_i = prod_j x_j^(a_ij)``.

    >>> star_apply([[1, 2], [0, 1]], [2, 3]).tolist()
    [18.0, 3.0]
    """
    x = check_positive(np.asarray(x, dtype=float), "vector entry")
    return np.exp(star_log(A, np.log(x)))


def _rel(lhs_log, rhs_log):
    return float(np.max(np.abs(np.expm1(lhs_log - rhs_log)))) if len(lhs_log) else 0.0


def check_homomorphisms(A, B, C, D, E, x, y, z, tol=1e-12):
    """Check the three identities of the star action.

    1. ``B*(A*x) = (BA)*x``
    2. ``(C+B)*y = (C*y)(B*y)``
    3. ``A*((D+E)*z) = (A*(D*z))(A*(E*z))``

    Each side is evaluated separately; the report gives the worst relative
    entrywise deviation per identity.
    """
    A, B, C, D, E = (_matrix(M, n) for M, n in zip((A, B, C, D, E), "ABCDE"))
    lx, ly, lz = (np.log(check_positive(np.asarray(v, float), "vector entry")) for v in (x, y, z))
    if C.shape != B.shape:
        raise DomainError(f"C and B must have the same shape for C+B, got {C.shape} and {B.shape}")
    if D.shape != E.shape:
        raise DomainError(f"D and E must have the same shape for D+E, got {D.shape} and {E.shape}")
    if B.shape[1] != A.shape[0]:
        raise DomainError(f"BA undefined: B is {B.shape}, A is {A.shape}")
    e1 = _rel(star_log(B, star_log(A, lx)), star_log(B @ A, lx))
    e2 = _rel(star_log(C + B, ly), star_log(C, ly) + star_log(B, ly))
    e3 = _rel(star_log(A, star_log(D + E, lz)), star_log(A, star_log(D, lz)) + star_log(A, star_log(E, lz)))
    errors = {"composition": e1, "additivity": e2, "distributivity": e3}
    return {"errors": errors, "tol": tol, "passed": all(v <= tol for v in errors.values())}


def random_homomorphism_trials(trials=100, max_dim=5, seed=0, tol=1e-12, entry_range=3, log_range=2.0):
    """Random integer matrices and log-uniform vectors for the three identities."""
    rng = np.random.default_rng(seed)
    worst = {"composition": 0.0, "additivity": 0.0, "distributivity": 0.0}
    failures = 0
    for _ in range(trials):
        m, n, k, p = rng.integers(1, max_dim + 1, size=4)

        def mat(r, c):
            return rng.integers(-entry_range, entry_range + 1, size=(r, c)).astype(float)

        def vec(d):
            return np.exp(rng.uniform(-log_range, log_range, size=d))

        A, B, C = mat(m, n), mat(k, m), mat(k, m)
        D, E = mat(n, p), mat(n, p)
        rep = check_homomorphisms(A, B, C, D, E, vec(n), vec(m), vec(p), tol)
        failures += not rep["passed"]
        for key, v in rep["errors"].items():
            worst[key] = max(worst[key], v)
    return {"trials": trials, "max_dim": max_dim, "seed": seed, "tol": tol, "worst": worst,
            "failures": failures, "passed": failures == 0}


_lgamma = np.frompyfunc(math.lgamma, 1, 1)


def _log_binom_row(m, q):
    """``log(C(m-1, j) q^j (1-q)^(m-1-j))`` for ``j = 0..m-1``."""
    jj = np.arange(m, dtype=float)
    lc = math.lgamma(m) - _lgamma(jj + 1.0) - _lgamma(m - jj)
    return lc.astype(float) + jj * math.log(q) + (m - 1 - jj) * math.log1p(-q)


class SummabilityMatrix:
    """Nonnegative infinite matrix ``a_(m,n)``, ``m, n >= 1``, given row by row.

    ``row(m)`` returns the row's weights for columns ``1..support(m)``. Built
    with :meth:`cesaro`, :meth:`euler`, :meth:`explicit` or :meth:`from_rule`.
    """

    def __init__(self, row_fn, support_fn, M=None, name="matrix", rows=None):
        self._row = row_fn
        self._support = support_fn
        self.M = M
        self.name = name
        self.n_rows = rows  # None for infinitely many rows

    @classmethod
    def cesaro(cls):
        return cls(lambda m: np.full(m, 1.0 / m), lambda m: m, 1.0, "cesaro")

    @classmethod
    def euler(cls, q):
        q = float(q)
        if not 0.0 < q < 1.0:
            raise DomainError(f"Euler parameter must lie in (0, 1), got {q}")
        return cls(lambda m: np.exp(_log_binom_row(m, q)), lambda m: m, 1.0, f"euler:{q:g}")

    @classmethod
    def explicit(cls, rows, M=None):
        rows = [np.asarray(r, dtype=float) for r in rows]
        if not rows:
            raise DomainError("explicit matrix needs at least one row")
        return cls(lambda m: rows[m - 1], lambda m: len(rows[m - 1]), M, "explicit-rows", rows=len(rows))

    @classmethod
    def from_rule(cls, rule, support=None, M=None, name="rule"):
        """Rows from ``rule(m, n_array)``; ``support(m)`` of None means truncate adaptively."""
        sup = support if support is not None else (lambda m: None)
        return cls(lambda m, cols=None: rule(m, cols), sup, M, name)

    @classmethod
    def from_spec(cls, spec):
        """From a JSON-style dict: ``{"kind": "cesaro"}``, ``{"kind": "euler", "q": ...}``
        or ``{"kind": "explicit-rows", "rows": [...]}``; strings ``"cesaro"``/``"euler:q"`` also work."""
        if isinstance(spec, str):
            if spec == "cesaro":
                return cls.cesaro()
            if spec.startswith("euler:"):
                return cls.euler(float(spec.split(":", 1)[1]))
            raise DomainError(f"unknown summability matrix {spec!r}")
        kind = spec.get("kind")
        if kind == "cesaro":
            return cls.cesaro()
        if kind == "euler":
            return cls.euler(spec.get("q", 0.5))
        if kind == "explicit-rows":
            return cls.explicit(spec["rows"], spec.get("M"))
        raise DomainError(f"unknown summability matrix kind {kind!r}")

    def support(self, m):
        return self._support(m)

    def row(self, m, cols=None):
        w = self._row(m) if cols is None else self._row(m, cols)
        return np.asarray(w, dtype=float)


def _row_log_product(A, m, logx_at, eps, diag):
    """``sum_n a_(m,n) log x_n`` with compensated summation; returns (value, weights)."""
    sup = A.support(m)
    if sup is not None:
        w = A.row(m)
        lx = logx_at(len(w))
        hi, comp = neumaier_cumsum(w * lx)
        return (float(hi[-1] + comp[-1]) if len(w) else 0.0), w
    # infinite support: extend in doubling chunks until a chunk contributes < eps/2
    total, parts, start, size = 0.0, [], 1, 64
    while True:
        cols = np.arange(start, start + size, dtype=np.int64)
        w = A.row(m, cols)
        lx = logx_at(start + size - 1)[start - 1:]
        contrib = float(np.sum(np.abs(w * lx)))
        hi, comp = neumaier_cumsum(w * lx)
        total += float(hi[-1] + comp[-1])
        parts.append(w)
        start += size
        if contrib < eps / 2 or start > 2**24:
            if start > 2**24:
                diag.append(f"row {m}: truncation tail bound not reached by column {start - 1}")
            break
        size *= 2
    return total, np.concatenate(parts)


def regular_transform(A, x, m_max=10**6, eps=1e-4, p=None, rows=None):
    """Stream of ``y_m = prod_n (x_n/p)^(a_(m,n))`` and whether ``y_m -> 1``.

    ``x_n -> p`` (default ``p = 1``), ``a_(m,n) >= 0``, bounded row sums and
    vanishing columns are checked on the realized rows. By default ``y_m`` is
    evaluated on a geometric grid of rows up to ``m_max``.
    """
    x = as_seq(x)
    logp = 0.0 if p is None else math.log(check_positive(float(p), "p"))
    if A.n_rows is not None:
        m_max = min(m_max, A.n_rows)
    if rows is None:
        rows = sorted({int(r) for r in np.unique(np.round(np.geomspace(1, m_max, 60)))} | {m_max})
    cache = {"lx": np.empty(0)}

    def logx_at(n):
        if len(cache["lx"]) < n:
            cache["lx"] = x.logs(x.indices(max(n, 2 * len(cache["lx"])))) - logp
        return cache["lx"][:n]

    diag = []
    logy, sums, neg_at = [], [], None
    for m in rows:
        v, w = _row_log_product(A, m, logx_at, eps, diag)
        logy.append(v)
        sums.append(float(np.sum(w)))
        if neg_at is None and (w < 0).any():
            neg_at = m
    logy = np.array(logy)
    M = A.M if A.M is not None else max(sums)
    bound_bad = [m for m, s in zip(rows, sums) if s > M * (1 + 1e-9)]
    hyps = [
        HypCheck("a_(m,n) >= 0", neg_at is None, neg_at),
        HypCheck("row sums bounded", not bound_bad, bound_bad[0] if bound_bad else None, f"M = {M:.6g}"),
    ]
    col_bad = None
    if len(rows) >= 2 and A.n_rows is None:
        m_hi, m_lo = rows[-1], max(1, rows[-1] // 2)
        w_hi, w_lo = A.row(m_hi)[:5] if A.support(m_hi) else A.row(m_hi, np.arange(1, 6)), None
        w_lo = A.row(m_lo)[:5] if A.support(m_lo) else A.row(m_lo, np.arange(1, 6))
        for n in range(min(len(w_hi), 5)):
            lo_val = w_lo[n] if n < len(w_lo) else 0.0
            if not (w_hi[n] < 1e-12 or w_hi[n] <= 0.9 * lo_val):
                col_bad = n + 1
                break
    hyps.append(HypCheck("columns tend to 0", col_bad is None, col_bad,
                         "checked on columns 1..5 between rows m/2 and m"))
    lx_all = logx_at(1)
    tail = float(cache["lx"][-1]) if len(cache["lx"]) else float(lx_all[-1])
    hyps.append(HypCheck("x_n tends to p" if p is not None else "x_n tends to 1",
                         abs(tail) < TAIL_TOL, None if abs(tail) < TAIL_TOL else len(cache["lx"]),
                         f"|log(x_n/p)| = {abs(tail):.3g} at n={len(cache['lx'])}"))
    y = np.exp(logy)
    tr = Trace(np.array(rows, dtype=np.int64), logy, "y")
    tr.diagnostics = diag
    last_rows = y[-3:]
    near_one = bool(np.all(np.abs(last_rows - 1.0) < eps))
    est = {"y_last": float(y[-1]), "m_last": rows[-1], "tends_to_one": near_one, "matrix": A.name}
    rep = TestReport("regular-transform", hyps, estimates=est, diagnostics=list(diag))
    if rep.hypotheses_hold:
        if near_one:
            rep.conclusion = Verdict(Kind.CONVERGES, limit_estimate=float(y[-1]), n_used=rows[-1], eps=eps,
                                     evidence=f"|y_m - 1| < eps on the last {len(last_rows)} sampled rows")
        else:
            rep.conclusion = Verdict(Kind.INCONCLUSIVE, n_used=rows[-1], eps=eps,
                                     evidence=f"|y_m - 1| = {abs(y[-1] - 1):.3g} at m={rows[-1]}")
    return tr, rep
