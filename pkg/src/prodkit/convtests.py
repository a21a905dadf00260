"""Sufficient tests and summability tools for infinite products.

Every test returns a TestReport. Hypotheses are asymptotic, so each check is
evaluated up to the horizon and reported as such; the conclusion is only
given when all checks hold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .accum import (
    DEFAULT_EPS, Kind, Trace, Verdict, _jsonable, classify_logsums, estimate_convergence,
    prefix_logsums,
)
from .errors import ProdkitError
from .seq import MappedSeq, as_seq

__all__ = [
    "HypCheck", "TestReport", "root_type_test", "condensation_test", "alternating_product",
    "cesaro_product_mean", "abel_type_product", "TAIL_TOL",
]

#: a sequence is taken to approach 1 when |log a_N| is below this at the horizon
TAIL_TOL = 1e-3


@dataclass
class HypCheck:
    name: str
    holds: bool
    witness: int | None = None
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "holds": bool(self.holds), "witness": self.witness, "note": self.note}


@dataclass
class TestReport:
    test: str
    hypotheses: list
    conclusion: Verdict | None = None
    estimates: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.conclusion is not None and not self.hypotheses_hold:
            raise ValueError("a conclusion needs every hypothesis check to hold")

    @property
    def hypotheses_hold(self):
        return all(h.holds for h in self.hypotheses)

    def to_dict(self):
        est = {k: (_jsonable(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.estimates.items()}
        return {
            "test": self.test,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "conclusion": None if self.conclusion is None else self.conclusion.to_dict(),
            "estimates": est,
            "diagnostics": self.diagnostics,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def _first(mask, idx):
    bad = np.flatnonzero(mask)
    return None if len(bad) == 0 else int(idx[bad[0]])


def _check(name, bad_mask, idx, note=""):
    w = _first(bad_mask, idx)
    return HypCheck(name, w is None, w, note)


def _safe_exp(x):
    if x > 709.0:
        return math.inf
    return math.exp(x) if x > -745.0 else 0.0


def root_type_test(a, t, N=10**5, eps=DEFAULT_EPS, tol=1e-3):
    """Root-type sufficient test: ``a_n^(1/t_n)`` bounded in ``(0, inf)`` with ``sum t_n < inf``.

    Bounds are estimated in the log domain (``log a_n / t_n``) as the running
    max/min over the last half of the horizon; they count as stable when the
    two quarter windows agree within ``tol`` (relative). The tolerance has to
    absorb the rounding of ``log a_n`` when ``a_n`` is close to 1. When ``a_n >= 1`` throughout only
    the upper bound is needed, when ``a_n <= 1`` only the lower one.
    """
    a = as_seq(a)
    t = as_seq(t, a.origin, positive=True)
    idx = a.indices(N)
    la = a.logs(idx)
    tv = t.values(idx)
    L = la / tv
    hyps = []
    T = prefix_logsums(tv)
    tv_verdict = classify_logsums(T, eps=0.0, n_start=a.origin)
    hyps.append(HypCheck("sum t_n converges", tv_verdict.converges, None,
                         f"weight partial sums: {tv_verdict.kind.value} up to n={int(idx[-1])}"))
    w0, w1 = N // 2, 3 * N // 4
    h1, h2 = L[w0:w1], L[w1:]
    up = a.positive and bool((la >= 0).all())
    down = bool((la <= 0).all())

    def stable(x1, x2):
        return bool(np.isfinite(x1) and np.isfinite(x2) and abs(x1 - x2) <= tol * max(1.0, abs(x2)))

    hi_ok = stable(h1.max(), h2.max())
    lo_ok = stable(h1.min(), h2.min())
    need_hi = not down
    need_lo = not up
    if need_hi:
        hyps.append(HypCheck("limsup a_n^(1/t_n) finite", hi_ok, None if hi_ok else int(idx[w1 + int(np.argmax(h2))]),
                             "upper bound of the root stable over the tail window"))
    if need_lo:
        hyps.append(HypCheck("liminf a_n^(1/t_n) positive", lo_ok, None if lo_ok else int(idx[w1 + int(np.argmin(h2))]),
                             "lower bound of the root stable over the tail window"))
    tail = np.concatenate([h1, h2])
    est = {"log_limsup_root": float(tail.max()), "log_liminf_root": float(tail.min()),
           "one_sided": "a_n >= 1" if up else ("a_n <= 1" if down else None)}
    est["limsup_root"] = _safe_exp(est["log_limsup_root"])
    est["liminf_root"] = _safe_exp(est["log_liminf_root"])
    # segment sandwich: alpha'^(sum t) <= prod a_k <= beta'^(sum t) for segments inside the window
    S = prefix_logsums(la)
    seg_a = S[w0:] - S[w0 - 1]
    seg_t = T[w0:] - T[w0 - 1]
    lo, hi = est["log_liminf_root"], est["log_limsup_root"]
    slack = 1e-12 * np.maximum(1.0, np.abs(seg_a))
    est["segment_sandwich_holds"] = bool(np.all((seg_a >= lo * seg_t - slack) & (seg_a <= hi * seg_t + slack)))
    rep = TestReport("root", hyps, estimates=est)
    if rep.hypotheses_hold:
        u = estimate_convergence(a, eps, N)
        lim = math.exp(S[-1])
        rep.conclusion = Verdict(Kind.CONVERGES, limit_estimate=lim, n_used=int(idx[-1]), eps=eps,
                                 evidence="root-type sufficient condition holds up to horizon; "
                                          f"direct verdict {u.kind.value}")
    return rep


def condensation_test(a, eps=DEFAULT_EPS, K=40, horizon=10**5):
    """Compare ``prod a_n`` with the condensed product ``prod_k a_(2^k)^(2^k)``.

    Requires ``a_1 >= a_2 >= ... >= 1`` (checked up to ``horizon``). The
    condensed terms are read directly at indices ``2^k``, ``k <= K``.
    """
    a = as_seq(a)
    raw = as_seq(a, positive=False) if a.positive else a
    if hasattr(a, "ast"):
        raw = type(a)(a.ast, a.origin, positive=False)
    idx = a.indices(horizon)
    v = raw.values(idx)
    hyps = [
        _check("non-increasing", np.concatenate([[False], v[1:] > v[:-1]]), idx),
        _check("bounded below by 1", v < 1.0, idx),
    ]
    rep = TestReport("condense", hyps)
    if not rep.hypotheses_hold:
        return rep
    k = np.arange(K + 1)
    pw = np.ldexp(1.0, k)
    c = pw * a.logs(2**k.astype(np.int64) + (a.origin - 1) * 0)
    V = prefix_logsums(c)
    cond = classify_logsums(V, eps, n_start=0)
    orig = estimate_convergence(a, eps, N=max(horizon, 10**6) if a.length is None else a.length)
    rep.estimates.update({
        "condensed_log": float(V[-1]), "condensed_value": _safe_exp(V[-1]),
        "K": K, "original": orig.to_dict(), "condensed": cond.to_dict(),
        "agree": cond.converges == orig.converges,
    })
    # u_n <= v_k for n < 2^k and u_n^2 >= v_k for n > 2^k, on the realized prefix
    S = prefix_logsums(a.logs(idx))
    ok = True
    for kk in range(1, K + 1):
        m = 2**kk
        if m + 1 > horizon:
            break
        slack = 8 * 2.0**-52 * max(1.0, abs(V[kk]))
        ok &= S[m - 2] <= V[kk] + slack and 2 * S[m] >= V[kk] - slack
    rep.estimates["sandwich_holds"] = bool(ok)
    rep.conclusion = cond
    return rep


def alternating_product(a, eps=DEFAULT_EPS, N=10**6, reciprocal=False):
    """The alternating product ``a_1 a_2^-1 a_3 a_4^-1 ...`` of a decreasing sequence ``a_n -> 1+``.

    With ``reciprocal=True``, ``a`` is a strictly decreasing sequence in
    ``(0, 1)`` and the product ``(1-a_1)(1-a_2)^-1(1-a_3)...`` is evaluated as
    the reciprocal of the alternating product of ``1/(1-a_n)``.
    """
    a = as_seq(a)
    idx = a.indices(N)
    hyps = []
    if reciprocal:
        v = a.values(idx)
        hyps.append(_check("a_n in (0, 1)", v >= 1.0, idx))
        hyps.append(_check("strictly decreasing", np.concatenate([[False], v[1:] >= v[:-1]]), idx))
        c = MappedSeq(a, lambda x: 1.0 / (1.0 - x), name="1/(1-a)")
        lc = -np.log1p(-v)
    else:
        c = a
        lc = a.logs(idx)
    hyps.append(_check("terms > 1", lc <= 0.0, idx))
    hyps.append(_check("strictly decreasing (transformed)" if reciprocal else "strictly decreasing",
                       np.concatenate([[False], lc[1:] >= lc[:-1]]), idx))
    hyps.append(HypCheck("tends to 1", bool(lc[-1] < TAIL_TOL), None if lc[-1] < TAIL_TOL else int(idx[-1]),
                         f"log of the term at n={int(idx[-1])} is {float(lc[-1]):.3g}"))
    sign = np.where((idx - a.origin) % 2 == 0, 1.0, -1.0)
    S = prefix_logsums(sign * lc)
    even = S[1::2]
    log_a1 = float(lc[0])
    bound_ok = bool(np.all(even < log_a1))
    est = {"log_alternating": float(S[-1]), "even_partials_below_a1": bound_ok,
           "max_even_partial": math.exp(float(even.max())) if len(even) else None,
           "a1": math.exp(log_a1)}
    value_log = -S[-1] if reciprocal else S[-1]
    est["value"] = math.exp(value_log)
    rep = TestReport("alternating", hyps, estimates=est)
    if reciprocal:
        rep.diagnostics.append("value is the reciprocal of the alternating product of 1/(1-a_n)")
    if rep.hypotheses_hold:
        v = classify_logsums(S, eps, n_start=a.origin)
        if v.converges:
            v.limit_estimate = est["value"]
        rep.conclusion = v
    return rep


def cesaro_product_mean(a, t=1.0, N=10**6):
    """Stream of ``sigma_n = (u_1^t_1 ... u_n^t_n)^(1/(t_1+...+t_n))`` over partial products ``u``."""
    a = as_seq(a)
    t = as_seq(t, a.origin, positive=True)
    idx = a.indices(N)
    S = prefix_logsums(a.logs(idx))
    w = t.values(idx)
    tr = Trace(idx, prefix_logsums(w * S) / prefix_logsums(w), "sigma")
    if N >= 16 and classify_logsums(prefix_logsums(w), eps=0.0).converges:
        tr.diagnostics.append("precondition violated: weights appear summable (sum t_n < inf)")
    return tr


def abel_type_product(b, a, eps=DEFAULT_EPS, N=10**6, checkpoints=None):
    """``prod b_k^(a_k)`` when ``prod mmod(b_n/b_(n+1))`` converges, ``b_n -> 1`` and segment sums of ``a`` are bounded.

    The summation-by-parts form of the partial products is verified at every
    realized ``n``; a mismatch beyond 1e-10 relative raises ProdkitError.
    """
    b = as_seq(b)
    a = as_seq(a, b.origin, positive=False)
    idx = b.indices(N + 1)
    lb_all = b.logs(idx)
    lb = lb_all[:N]
    av = a.values(idx[:N])
    idx = idx[:N]
    dl = lb_all[:-1] - lb_all[1:]  # log(b_k / b_(k+1))
    hyps = []
    mod = classify_logsums(prefix_logsums(np.abs(dl)), eps, n_start=b.origin)
    hyps.append(HypCheck("prod mmod(b_n/b_(n+1)) converges", mod.converges, None,
                         f"modulus of ratios: {mod.kind.value}"))
    hyps.append(HypCheck("b_n tends to 1", bool(abs(lb[-1]) < TAIL_TOL), None if abs(lb[-1]) < TAIL_TOL else int(idx[-1]),
                         f"|log b_N| = {abs(float(lb[-1])):.3g}"))
    A = prefix_logsums(av)
    A0 = np.concatenate([[0.0], A])
    M_half = float(A0[: N // 2 + 1].max() - A0[: N // 2 + 1].min())
    M = float(A0.max() - A0.min())
    growing = M > 1.5 * M_half + 1e-9
    hyps.append(HypCheck("segment sums of a bounded", not growing, int(idx[int(np.argmax(np.abs(A)))]) if growing else None,
                         f"M = {M:.6g} at N, {M_half:.6g} at N/2"))
    lhs = prefix_logsums(av * lb)
    inner = prefix_logsums(A * dl)
    rhs = np.concatenate([[0.0], inner[:-1]]) + A * lb
    err = np.abs(np.expm1(lhs - rhs))
    worst = float(err.max())
    cps = checkpoints or sorted({min(N, 10**j) for j in range(1, 8)} | {N})
    exact = []
    for n in cps:
        l = math.fsum((av[:n] * lb[:n]).tolist())
        r = math.fsum((A[: n - 1] * dl[: n - 1]).tolist()) + A[n - 1] * lb[n - 1]
        exact.append(abs(math.expm1(l - r)))
    worst = max(worst, max(exact))
    if worst > 1e-10:
        raise ProdkitError(f"summation-by-parts identity off by {worst:.3g} relative")
    est = {"M": M, "M_half": M_half, "identity_max_rel_error": worst, "checkpoints": cps,
           "log_value": float(lhs[-1]), "value": _safe_exp(lhs[-1])}
    rep = TestReport("abel", hyps, estimates=est)
    if rep.hypotheses_hold:
        rep.conclusion = classify_logsums(lhs, eps, n_start=b.origin)
    return rep
