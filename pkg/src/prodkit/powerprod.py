"""Power products ``prod a_n^(x^n)``, their convergence region, and Cauchy-product means."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accum import DEFAULT_EPS, Kind, Verdict, classify_logsums, estimate_convergence, prefix_logsums, weighted_geometric_means
from .convtests import TAIL_TOL, HypCheck, TestReport
from .errors import HypothesisError
from .seq import as_seq

__all__ = [
    "x_powers", "PowerProduct", "eval_power_product", "power_region_scan", "parse_grid",
    "cauchy_product_means", "mean_limit_check",
]

RENORM = 64


def x_powers(x, n):
    """``x**n`` for an integer array ``n >= 0``.

    ``x = -1`` is resolved by parity. Otherwise ``x^n`` is the product of an
    anchor ``x^(64 q)`` taken from ``exp(64 q log|x|)`` and a repeated-multiplication
    table ``x^r``, ``r < 64``, so no long chain of roundings builds up.
    """
    n = np.asarray(n, dtype=np.int64)
    x = float(x)
    if x == -1.0:
        return np.where(n % 2 == 0, 1.0, -1.0)
    if x == 0.0:
        return np.where(n == 0, 1.0, 0.0)
    if x == 1.0:
        return np.ones(n.shape)
    table = np.cumprod(np.concatenate([[1.0], np.full(RENORM - 1, x)]))
    q, r = np.divmod(n, RENORM)
    with np.errstate(over="ignore", under="ignore"):
        anchor = np.exp(q * RENORM * math.log(abs(x)))
    if x < 0:
        anchor = np.where((q * RENORM) % 2 == 0, anchor, -anchor)
    return anchor * table[r]


@dataclass
class PowerProduct:
    """``a_0 a_1^x a_2^(x^2) ...``; the base is indexed from 0 unless given otherwise."""

    base: object
    x: float

    def __post_init__(self):
        self.base = as_seq(self.base, origin=0)
        self.x = float(self.x)

    def exponents(self, idx):
        return x_powers(self.x, idx)

    def logs(self, idx):
        return self.exponents(idx) * self.base.logs(idx)


def eval_power_product(pp, N=10**5, eps=DEFAULT_EPS):
    """Verdict and value of ``prod_(n < N) a_n^(x^n)`` via ``sum x^n log a_n``."""
    if not isinstance(pp, PowerProduct):
        raise TypeError("expected a PowerProduct")
    idx = pp.base.indices(N)
    S = prefix_logsums(pp.logs(idx))
    v = classify_logsums(S, eps, n_start=pp.base.origin)
    v.evidence = f"x = {pp.x:g}; " + v.evidence
    return v


def parse_grid(text):
    """``"a:b:step"`` (``b`` excluded) or a comma list of values."""
    if ":" in text:
        a, b, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        k = int(math.floor((b - a) / step + 1e-9))
        vals = [a + i * step for i in range(k + 1)]
        return [round(v, 12) for v in vals if v < b - 1e-12]
    return [float(t) for t in text.split(",") if t.strip()]


def power_region_scan(b, grid, N=10**5, eps=DEFAULT_EPS, origin=1):
    """Verdicts of ``prod_k b_k^(x^k)`` over a grid of ``x``.

    Two hypothesis routes are checked up to the horizon: the ratio condition
    (``prod mmod(b_k/b_(k+1))`` converges and ``b_k -> 1``), and the special
    case of a strictly increasing positive sequence tending to 1. When either
    holds every ``x`` in ``[-1, 1)`` must converge.
    """
    b = as_seq(b, origin=origin)
    idx = b.indices(N + 1)
    lb_all = b.logs(idx)
    lb = lb_all[:N]
    dl = lb_all[:-1] - lb_all[1:]
    ratio = classify_logsums(prefix_logsums(np.abs(dl)), eps, n_start=origin)
    to_one = bool(abs(lb[-1]) < TAIL_TOL)
    inc_bad = np.flatnonzero(dl >= 0)
    below_one_bad = np.flatnonzero(lb_all >= 0)
    hyps = [
        HypCheck("prod mmod(b_k/b_(k+1)) converges", ratio.converges, None, ratio.kind.value),
        HypCheck("b_k tends to 1", to_one, None if to_one else int(idx[N - 1])),
    ]
    inc = HypCheck("strictly increasing to 1", not len(inc_bad) and not len(below_one_bad) and to_one,
                   int(idx[inc_bad[0] + 1]) if len(inc_bad) else (int(idx[below_one_bad[0]]) if len(below_one_bad) else None))
    rows = []
    for x in grid:
        pp = PowerProduct(b, x)
        v = eval_power_product(pp, N, eps)
        rows.append({"x": float(x), "verdict": v.to_dict()})
    guaranteed = all(h.holds for h in hyps) or inc.holds
    inside = [r for r in rows if -1.0 <= r["x"] < 1.0]
    report = {
        "hypotheses": [h.to_dict() for h in hyps] + [inc.to_dict()],
        "guarantee": guaranteed,
        "rows": rows,
        "all_inside_converge": all(r["verdict"]["kind"] == Kind.CONVERGES.value for r in inside),
    }
    report["consistent"] = (not guaranteed) or report["all_inside_converge"]
    return report


def cauchy_product_means(a, b, N=10**5, eps=1e-2, checkpoints=None):
    """Partial products of the Cauchy-type product ``c_n = a_0 b_n a_1 b_(n-1) ... a_n b_0``.

    Checks ``C_n = (A_0 ... A_n)(B_0 ... B_n)`` where ``C_n = c_0 ... c_n``, by
    comparing the weighted expansion ``log C_n = sum_j (n-j+1)(log a_j + log b_j)``
    with the nested partial sums, and the four root limits at ``N``.
    """
    a = as_seq(a, origin=0)
    b = as_seq(b, origin=0)
    va = estimate_convergence(a, N=N)
    vb = estimate_convergence(b, N=N)
    if not (va.converges and vb.converges):
        raise HypothesisError(f"both products must converge (got {va.kind.value}, {vb.kind.value})")
    idx = a.indices(N + 1)
    la, lb = a.logs(idx), b.logs(idx)
    LA, LB = prefix_logsums(la), prefix_logsums(lb)
    nested = prefix_logsums(LA) + prefix_logsums(LB)
    cps = checkpoints or sorted({min(N, int(round(v))) for v in np.geomspace(1, N, 12)})
    worst = 0.0
    rows = []
    for n in cps:
        w = (n - np.arange(n + 1) + 1).astype(float)
        direct = math.fsum((w * la[: n + 1]).tolist()) + math.fsum((w * lb[: n + 1]).tolist())
        err = abs(math.expm1(direct - nested[n]))
        worst = max(worst, err)
        rows.append({"n": n, "log_C_direct": direct, "log_C_nested": float(nested[n]), "rel_error": err})
    A, B = math.exp(LA[-1]), math.exp(LB[-1])
    roots = {
        "A_n^(1/n)": math.exp(LA[-1] / N),
        "B_n^(1/n)": math.exp(LB[-1] / N),
        "C_n^(1/n)": math.exp(nested[-1] / N),
        "c_n^(1/n)": math.exp((LA[-1] + LB[-1]) / N),
    }
    targets = {"A_n^(1/n)": 1.0, "B_n^(1/n)": 1.0, "C_n^(1/n)": A * B, "c_n^(1/n)": 1.0}
    limits = {k: {"value": v, "target": targets[k], "ok": abs(v - targets[k]) <= eps} for k, v in roots.items()}
    return {"N": N, "eps": eps, "A": A, "B": B, "AB": A * B, "checkpoints": rows,
            "identity_max_rel_error": worst, "identity_holds": worst <= 1e-10,
            "limits": limits, "limits_hold": all(v["ok"] for v in limits.values())}


def mean_limit_check(a, t, K, N=10**5, eps=1e-2):
    """Whether the weighted geometric means of ``a`` approach ``K`` within ``eps`` at ``N``.

    The hypotheses ``a_n -> K`` and ``sum t_n = inf`` are checked at the
    horizon; if one fails the verdict is Inconclusive and says which.
    """
    a = as_seq(a)
    K = float(K)
    tr = weighted_geometric_means(a, t, N)
    la_last = float(a.logs(np.array([a.origin + N - 1]))[0])
    failed = []
    if abs(la_last - math.log(K)) >= TAIL_TOL:
        failed.append(f"a_n does not approach K (|log a_N - log K| = {abs(la_last - math.log(K)):.3g})")
    failed += [d for d in tr.diagnostics if d.startswith("precondition")]
    g = tr.last()
    if failed:
        return Verdict(Kind.INCONCLUSIVE, n_used=int(tr.n[-1]), eps=eps, evidence="hypothesis failed: " + "; ".join(failed))
    if abs(g - K) <= eps:
        return Verdict(Kind.CONVERGES, limit_estimate=g, n_used=int(tr.n[-1]), eps=eps,
                       evidence=f"|g_N - K| = {abs(g - K):.3g} <= eps")
    return Verdict(Kind.INCONCLUSIVE, n_used=int(tr.n[-1]), eps=eps, evidence=f"|g_N - K| = {abs(g - K):.3g} > eps")
