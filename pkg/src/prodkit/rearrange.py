"""Rearrangements of conditionally convergent products, invariance and uniform tails.

The prescribed-limit construction works on the two monotone streams of a
product: the factors ``>= 1`` (p-stream) and the moduli of the factors ``< 1``
(q-stream), each in original order. Targets ``beta_i`` (above) and ``alpha_i``
(below) are approached alternately: p-factors are emitted until the running
product first exceeds ``beta_i``, then reciprocals of q-factors until it first
drops below ``alpha_i``. Everything runs on prefix log-sums of the streams, so
each crossing is one ``searchsorted``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .accum import (
    DEFAULT_EPS, Kind, Trace, Verdict, _pair_extremes, estimate_convergence,
    m_absolute_verdict, prefix_logsums,
)
from .errors import DomainError, EvaluationError, HypothesisError, HypothesisWarning
from .seq import Seq, as_seq
from .summation import neumaier_cumsum

__all__ = [
    "Stream", "split_pq", "Milestone", "RearrangementPlan", "RearrangedSeq",
    "riemann_rearrange", "target_schedule", "verify_rearrangement_invariance",
    "TailBound", "uniform_tail_bound", "spot_check_tail_bound",
]


MIN_OFFSET = 2.0**-44


@dataclass
class Stream:
    """Terms (as logs) of a sub-stream together with their original indices."""

    indices: np.ndarray
    logs: np.ndarray
    horizon: int
    diagnostics: list = field(default_factory=list)

    @property
    def values(self):
        return np.exp(self.logs)

    def __len__(self):
        return len(self.indices)


def split_pq(seq, horizon=10**6):
    """Split the first ``horizon`` factors into the p-stream and the q-stream.

    The q-stream holds ``mmod`` of the factors below 1, i.e. their reciprocals.

    >>> p, q = split_pq([2, 0.5, 3, 1/3])
    >>> p.values.tolist(), q.values.tolist()
    ([2.0, 3.0], [2.0, 3.0])
    """
    seq = as_seq(seq)
    if seq.length is not None:
        horizon = min(horizon, seq.length)
    idx = seq.indices(horizon)
    la = seq.logs(idx)
    up = la >= 0.0
    p = Stream(idx[up], la[up], horizon)
    q = Stream(idx[~up], -la[~up], horizon)
    for name, s in (("q", q), ("p", p)):
        if len(s) == 0:
            s.diagnostics.append(f"{name}-stream empty up to horizon {horizon}")
    return p, q


def target_schedule(alpha, beta, i, rule="geometric"):
    """``(alpha_i, beta_i)`` approaching ``(alpha, beta)`` with ``alpha_i < beta_i``.

    ``rule="geometric"`` offsets the targets by ``4^-i``; ``rule="harmonic"``
    by ``1/i``. Infinite or zero targets use ``beta_i = i+1`` and
    ``alpha_i = 1/(i+1)``.
    """
    if rule == "geometric":
        d_hi, d_lo = 4.0**-i, 4.0 ** -(i + 1)
    elif rule == "harmonic":
        d_hi, d_lo = 1.0 / i, 1.0 / (i + 1)
    else:
        raise DomainError(f"unknown schedule {rule!r}")
    # below this the offsets vanish in binary64 and alpha_i < beta_i would fail
    d_hi, d_lo = max(d_hi, MIN_OFFSET), max(d_lo, MIN_OFFSET)
    if math.isinf(beta):
        b = i + 1.0
    elif beta == 0.0:
        b = 1.0 / i
    else:
        b = beta * (1.0 + d_hi)
    if alpha == 0.0:
        a = 1.0 / (i + 1.0)
    elif math.isinf(alpha):
        a = float(i)
    else:
        a = alpha * (1.0 - d_lo)
    if i == 1:
        b = max(b, 1.0)
    if not a < b:
        mid = math.sqrt(a * b)
        a, b = mid * (1.0 - d_lo), mid * (1.0 + d_hi)
    return a, b


@dataclass
class Milestone:
    i: int
    m_i: int  # p-factors used after the upward crossing
    k_i: int  # q-factors used after the downward crossing
    pos_m: int  # emitted count at the upward crossing
    pos_k: int
    alpha_i: float
    beta_i: float
    log_u_at_m: float
    log_u_at_k: float | None

    def to_dict(self):
        return {
            "i": self.i, "m_i": self.m_i, "k_i": self.k_i,
            "u_at_m": math.exp(self.log_u_at_m),
            "u_at_k": None if self.log_u_at_k is None else math.exp(self.log_u_at_k),
        }


@dataclass
class RearrangementPlan:
    alpha: float
    beta: float
    schedule: str
    max_factors: int
    p: Stream
    q: Stream
    cp: int = 0
    cq: int = 0
    emitted: int = 0
    order: np.ndarray | None = None
    milestones: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    exhausted: bool = False

    def log_partials(self):
        """Compensated log partial products of the emitted stream."""
        return prefix_logsums(self.emitted_logs())

    def emitted_logs(self):
        from_p = np.isin(self.order, self.p.indices[: self.cp])
        out = np.empty(len(self.order))
        pos_p = np.searchsorted(self.p.indices, self.order[from_p])
        pos_q = np.searchsorted(self.q.indices, self.order[~from_p])
        out[from_p] = self.p.logs[pos_p]
        out[~from_p] = -self.q.logs[pos_q]
        return out

    def trace(self):
        S = self.log_partials()
        return Trace(np.arange(1, len(S) + 1, dtype=np.int64), S, "u")

    def to_jsonl(self):
        return "\n".join(json.dumps(m.to_dict()) for m in self.milestones)

    def check_permutation(self):
        """Emitted source indices are distinct and cover every index below both cursors."""
        distinct = len(np.unique(self.order)) == len(self.order)
        nxt = []
        if self.cp < len(self.p):
            nxt.append(int(self.p.indices[self.cp]))
        if self.cq < len(self.q):
            nxt.append(int(self.q.indices[self.cq]))
        gap_free_below = min(nxt) if nxt else self.p.horizon + 1
        origin = 1 if len(self.order) == 0 else min(int(self.order.min()), 1)
        expect = np.arange(origin, gap_free_below)
        covered = bool(np.isin(expect, self.order).all())
        return distinct and covered

    def verdict(self, eps=DEFAULT_EPS):
        """Verdict for the rearranged stream; the kind follows from the targets."""
        done = [m for m in self.milestones if m.log_u_at_k is not None]
        final = math.exp(self.log_partials()[-1]) if self.emitted else 1.0
        ev = f"{len(done)} complete cycles over {self.emitted} factors ({self.schedule} schedule)"
        if self.exhausted:
            ev += "; a stream was exhausted before max_factors"
        if not done:
            return Verdict(Kind.INCONCLUSIVE, n_used=self.emitted, eps=eps, evidence=ev + "; no complete cycle")
        last = done[-1]
        lo, hi = math.exp(last.log_u_at_k), math.exp(last.log_u_at_m)
        ev += f"; last crossings u={hi:.9g} (above), u={lo:.9g} (below)"
        a, b = self.alpha, self.beta
        if self.exhausted and self.emitted < self.max_factors:
            return Verdict(Kind.INCONCLUSIVE, liminf_estimate=None, n_used=self.emitted, eps=eps, evidence=ev)
        if b == 0.0:
            return Verdict(Kind.DIVERGES_TO_ZERO, n_used=self.emitted, eps=eps, evidence=ev)
        if math.isinf(a):
            return Verdict(Kind.DIVERGES_TO_INFINITY, n_used=self.emitted, eps=eps, evidence=ev)
        if a == b:
            return Verdict(Kind.CONVERGES, limit_estimate=final, n_used=self.emitted, eps=eps, evidence=ev)
        return Verdict(Kind.OSCILLATES, liminf_estimate=lo, limsup_estimate=hi,
                       n_used=self.emitted, eps=eps, evidence=ev)


class RearrangedSeq(Seq):
    """View of ``parent`` in the emitted order; realized up to the plan's horizon."""

    def __init__(self, parent, order):
        super().__init__(1, True)
        self.parent = parent
        self.order = np.asarray(order, dtype=np.int64)
        self.length = len(self.order)

    def _raw(self, idx):
        return self.parent.values(self.order[idx - 1])

    def describe(self):
        return f"rearranged({self.parent.describe()})"


def _construct(plan):
    Pc = np.concatenate([[0.0], np.cumsum(plan.p.logs)])
    Qc = np.concatenate([[0.0], np.cumsum(plan.q.logs)])
    cp = cq = emitted = 0
    logu = 0.0
    takes = []  # (stream, start, stop) blocks
    i = 1
    cap = plan.max_factors
    while emitted < cap:
        a, b = target_schedule(plan.alpha, plan.beta, i, plan.schedule)
        # smallest m with logu + Pc[m] - Pc[cp] > log b
        m = int(np.searchsorted(Pc, math.log(b) - logu + Pc[cp], side="right"))
        if m >= len(Pc):
            m = len(Pc) - 1
            plan.exhausted = m < cp + cap - emitted
        m = min(m, cp + cap - emitted)
        takes.append((0, cp, m))
        emitted += m - cp
        logu += Pc[m] - Pc[cp]
        cp = m
        ms = Milestone(i, cp, cq, emitted, emitted, a, b, logu, None)
        plan.milestones.append(ms)
        if emitted >= cap or plan.exhausted:
            break
        k = int(np.searchsorted(Qc, logu - math.log(a) + Qc[cq], side="right"))
        if k >= len(Qc):
            k = len(Qc) - 1
            plan.exhausted = k < cq + cap - emitted
        k = min(k, cq + cap - emitted)
        takes.append((1, cq, k))
        emitted += k - cq
        logu -= Qc[k] - Qc[cq]
        cq = k
        if plan.exhausted or emitted >= cap and logu >= math.log(a):
            break
        ms.k_i, ms.pos_k, ms.log_u_at_k = cq, emitted, logu
        i += 1
    plan.cp, plan.cq, plan.emitted = cp, cq, emitted
    parts = [(plan.p if s == 0 else plan.q).indices[lo:hi] for s, lo, hi in takes]
    plan.order = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def riemann_rearrange(seq, alpha, beta, max_factors=10**6, schedule="geometric", precheck=True):
    """Rearrange a conditionally convergent product towards liminf ``alpha``, limsup ``beta``.

    Returns the rearranged view and its plan. Failure of the numeric
    hypothesis precheck (product converges, modulus product diverges) is a
    warning; the construction still runs.
    """
    alpha, beta = float(alpha), float(beta)
    if not (0.0 <= alpha <= beta) or math.isnan(beta):
        raise DomainError(f"targets must satisfy 0 <= alpha <= beta <= inf, got ({alpha}, {beta})")
    if max_factors < 1:
        raise DomainError("max_factors must be >= 1")
    seq = as_seq(seq)
    warn = []
    if precheck:
        N = min(max_factors, 10**6) if seq.length is None else min(seq.length, max_factors)
        if N >= 2:
            plain = estimate_convergence(seq, N=N)
            mod, _ = m_absolute_verdict(seq, N=N)
            if not plain.converges:
                warn.append(f"hypothesis fails numerically: the product is not seen to converge ({plain.kind.value})")
            if mod.converges:
                warn.append("hypothesis fails numerically: the product converges m-absolutely; "
                            "every rearrangement has the same limit")
        for w in warn:
            warnings.warn(w, HypothesisWarning, stacklevel=2)
    horizon = 2 * max_factors
    cap = 8 * max_factors
    while True:
        p, q = split_pq(seq, horizon)
        plan = RearrangementPlan(alpha, beta, schedule, max_factors, p, q)
        plan.warnings = warn
        _construct(plan)
        finite_src = seq.length is not None and horizon >= seq.length
        if not plan.exhausted or horizon >= cap or finite_src:
            break
        horizon = min(2 * horizon, cap)
    plan.diagnostics.extend(p.diagnostics + q.diagnostics)
    if plan.exhausted and plan.emitted < max_factors:
        plan.diagnostics.append(
            f"Inconclusive: a stream ran out after {plan.emitted} factors (source horizon {p.horizon})"
        )
    return RearrangedSeq(seq, plan.order), plan


def verify_rearrangement_invariance(seq, trials=100, N=10**5, eps=1e-8, seed=0):
    """Compare ``u_N`` under ``trials`` random permutations of indices ``1..N``.

    Requires the product to converge m-absolutely (checked numerically at
    ``N``); the identity is always included as the reference.
    """
    seq = as_seq(seq)
    mod, _ = m_absolute_verdict(seq, N=N)
    if not mod.converges:
        raise HypothesisError(
            f"the modulus product does not converge ({mod.kind.value}); invariance is not claimed"
        )
    rng = np.random.default_rng(seed)
    logs = seq.logs(seq.indices(N))
    totals = [_total(logs)]
    for _ in range(trials):
        totals.append(_total(logs[rng.permutation(N)]))
    u = np.exp(np.array(totals))
    spread = float((u.max() - u.min()) / u.min())
    return {
        "trials": trials, "N": N, "eps": eps, "seed": seed,
        "u_identity": float(u[0]), "u_min": float(u.min()), "u_max": float(u.max()),
        "max_rel_spread": spread, "passed": spread <= eps,
    }


def _total(x):
    hi, comp = neumaier_cumsum(x)
    return float(hi[-1] + comp[-1])


@dataclass
class TailBound:
    n0: int | None
    eps: float
    horizon: int
    tail_log: float | None
    status: str
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"n0": self.n0, "eps": self.eps, "horizon": self.horizon,
                "tail_log": self.tail_log, "status": self.status, "diagnostics": self.diagnostics}


def uniform_tail_bound(seq, eps=1e-3, horizon=10**6):
    """Least ``n0`` so every tail block ``n0 <= n <= m <= horizon`` has modulus product within ``eps`` of 1.

    Since ``mmod >= 1`` the worst block is ``n0..horizon``, and the bound
    ``max(1 - prod mmod^-1, prod mmod - 1) = expm1(sum log mmod)``. The same
    ``n0`` bounds ``|1 - prod a_k^c_k|`` for all exponents ``|c_k| <= 1`` and
    every subproduct.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    seq = as_seq(seq)
    if seq.length is not None:
        horizon = min(horizon, seq.length)
    mod, _ = m_absolute_verdict(seq, N=horizon)
    if not mod.converges:
        raise HypothesisError(f"the modulus product does not converge ({mod.kind.value})")
    idx = seq.indices(horizon)
    lm = np.abs(seq.logs(idx))
    # tail sums T[j] = sum_{k >= j} lm[k], compensated, via the reversed prefix sums
    hi, comp = neumaier_cumsum(lm[::-1])
    T = (hi + comp)[::-1]
    ok = np.expm1(T) < eps
    # T is non-increasing, so ok is False...False True...True
    if not ok.any():
        return TailBound(None, eps, horizon, None, Kind.INCONCLUSIVE.value,
                         [f"bound not reached within horizon {horizon}"])
    j = int(np.argmax(ok))
    return TailBound(int(idx[j]), eps, horizon, float(T[j]), "ok",
                     [f"certified for blocks ending at or before n={int(idx[-1])}"])


def spot_check_tail_bound(seq, n0, eps, horizon=10**5, exponent_samples=1000, mask_samples=1000, seed=0):
    """Randomized check of the uniform tail bound for exponent families and subproducts.

    Half the exponent sequences are uniform on ``[-1, 1]``, half are random
    signs; masks keep each factor with probability 1/2. Counts blocks
    ``n0 <= n <= m <= horizon`` with ``|1 - prod| >= eps``.
    """
    seq = as_seq(seq)
    if seq.length is not None:
        horizon = min(horizon, seq.length)
    rng = np.random.default_rng(seed)
    idx = np.arange(n0, horizon + 1, dtype=np.int64)
    la = seq.logs(idx)
    violations = 0
    worst = 0.0
    kinds = [("uniform", exponent_samples // 2), ("sign", exponent_samples - exponent_samples // 2),
             ("mask", mask_samples)]
    batch = max(1, 4_000_000 // max(1, len(idx)))
    for kind, count in kinds:
        done = 0
        while done < count:
            b = min(batch, count - done)
            if kind == "uniform":
                c = rng.uniform(-1.0, 1.0, size=(b, len(idx)))
            elif kind == "sign":
                c = rng.choice([-1.0, 1.0], size=(b, len(idx)))
            else:
                c = (rng.random((b, len(idx))) < 0.5).astype(float)
            S = np.concatenate([np.zeros((b, 1)), np.cumsum(c * la, axis=1)], axis=1)
            for row in S:
                up, down = _pair_extremes(row)
                dev = max(math.expm1(up) if up > 0 else 0.0, -math.expm1(down) if down < 0 else 0.0)
                worst = max(worst, dev)
                violations += dev >= eps
            done += b
    return {"n0": n0, "eps": eps, "horizon": horizon, "exponent_samples": exponent_samples,
            "mask_samples": mask_samples, "seed": seed, "violations": int(violations),
            "worst_deviation": worst, "passed": violations == 0}
