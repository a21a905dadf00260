"""Log-domain partial products, convergence verdicts and the series oracle.

A product of positive factors is handled through its log partial sums
``S_n = log a_1 + ... + log a_n``; ``u_n = exp(S_n)`` is materialized only on
output. Verdicts are horizon-bounded: they describe what the realized prefix
``1..N`` shows and carry ``n_used`` and ``eps`` so the claim can be audited.

Classification of a log-partial-sum stream ``S_1..S_N`` (window ``W``):

1. Cauchy certificate: if every tail ratio ``u_n / u_m`` with
   ``N - W <= m < n <= N`` is within ``eps`` of 1 the product converges.
2. Otherwise consecutive blocks ``(N/r^(k+1), N/r^k]`` with ``r = N/(N-W)``
   are compared. The range ``w_k`` of ``S`` over each block decays like
   ``r^(-g k)``; a decay exponent ``g >= 0.15`` on both block pairs means the
   tails are shrinking (convergent), ``g <= 0.05`` means they are not.
3. Non-shrinking tails are split into drift (the block mid-range moves by more
   than half the block range: divergence to 0 or infinity) and oscillation
   (stable running min/max that differ: liminf/limsup estimates).
"""
from __future__ import annotations

import json
import math
import os
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .seq import MappedSeq, as_seq
from .summation import DoubleDouble, dd_cumsum, neumaier_cumsum

__all__ = [
    "Kind", "Verdict", "Trace", "LogAccumulator",
    "prefix_logsums", "partial_products", "classify_logsums", "verdict_from_logs",
    "estimate_convergence", "m_absolute_verdict", "weighted_geometric_means",
    "oracle_verdict", "oracle_compare", "get_precision", "sandwich_check",
    "DEFAULT_EPS", "DEFAULT_N",
]

DEFAULT_EPS = 1e-9
DEFAULT_N = 10**6

GAMMA_CONV = 0.15
GAMMA_DIV = 0.05
DRIFT_FRACTION = 0.5
ESCAPE = 700.0
ULP = 2.0**-52


class Kind(str, Enum):
    CONVERGES = "Converges"
    DIVERGES_TO_ZERO = "DivergesToZero"
    DIVERGES_TO_INFINITY = "DivergesToInfinity"
    OSCILLATES = "Oscillates"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


def _jsonable(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class Verdict:
    kind: Kind
    limit_estimate: float | None = None
    liminf_estimate: float | None = None
    limsup_estimate: float | None = None
    n_used: int = 0
    eps: float = DEFAULT_EPS
    evidence: str = ""

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.kind is Kind.CONVERGES and not (self.limit_estimate is not None and self.limit_estimate > 0):
            raise ValueError("a Converges verdict needs a positive limit estimate")
        if (
            self.kind is Kind.OSCILLATES
            and self.liminf_estimate is not None
            and self.limsup_estimate is not None
            and self.liminf_estimate > self.limsup_estimate
        ):
            raise ValueError("liminf estimate exceeds limsup estimate")

    @property
    def converges(self):
        return self.kind is Kind.CONVERGES

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "limit_estimate": _jsonable(self.limit_estimate),
            "liminf": _jsonable(self.liminf_estimate),
            "limsup": _jsonable(self.limsup_estimate),
            "n_used": int(self.n_used),
            "eps": float(self.eps),
            "evidence": self.evidence,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass
class Trace:
    """A stream of values indexed by ``n``, held in the log domain."""

    n: np.ndarray
    log_values: np.ndarray
    name: str = "u"
    diagnostics: list = field(default_factory=list)

    @property
    def values(self):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_values)

    @property
    def overflow(self):
        return int(np.count_nonzero(np.abs(self.log_values) > 709.0))

    def __len__(self):
        return len(self.n)

    def __iter__(self):
        return zip(self.n.tolist(), self.values.tolist())

    def last(self):
        return float(self.values[-1])

    def csv_rows(self, stride=1):
        yield ("n", self.name, f"log_{self.name}")
        vals = self.values
        for i in range(0, len(self.n), stride):
            yield (int(self.n[i]), repr(float(vals[i])), repr(float(self.log_values[i])))


def get_precision(precision=None):
    """Resolve the accumulator class: argument, else PRODKIT_PRECISION, else 'fast'."""
    p = precision or os.environ.get("PRODKIT_PRECISION", "fast")
    if p not in ("fast", "oracle"):
        raise ValueError(f"PRODKIT_PRECISION must be 'fast' or 'oracle', got {p!r}")
    return p


class LogAccumulator:
    """Compensated running ``sum log a_k`` with a window of recent ``u_n``."""

    def __init__(self, window=1024, precision=None):
        self.precision = get_precision(precision)
        self.n = 0
        self.logsum = 0.0
        self.compensation = 0.0
        self.window = deque(maxlen=window)
        self._dd = DoubleDouble() if self.precision == "oracle" else None

    def add(self, log_a):
        self.extend([log_a])

    def extend(self, logs):
        """Add a batch of log factors; returns their compensated prefix sums."""
        logs = np.asarray(logs, dtype=float)
        if self._dd is not None:
            out = np.empty(len(logs))
            for i, v in enumerate(logs.tolist()):
                self._dd.add(v)
                out[i] = self._dd.value
            self.logsum, self.compensation = self._dd.hi, self._dd.lo
        else:
            hi, comp = neumaier_cumsum(logs, self.logsum, self.compensation)
            if len(hi) == 0:
                return hi
            out = hi + comp
            self.logsum, self.compensation = float(hi[-1]), float(comp[-1])
        self.n += len(logs)
        tail = out[-self.window.maxlen:] if self.window.maxlen else out[:0]
        with np.errstate(over="ignore", under="ignore"):
            self.window.extend(np.exp(tail).tolist())
        return out

    @property
    def total(self):
        return self.logsum + self.compensation

    @property
    def value(self):
        try:
            return math.exp(self.total)
        except OverflowError:
            return math.inf


def prefix_logsums(logs, precision=None):
    """Compensated prefix sums of a log-factor array."""
    if get_precision(precision) == "oracle":
        return dd_cumsum(logs)
    hi, comp = neumaier_cumsum(logs)
    return hi + comp


def partial_products(seq, N, precision=None):
    """Partial products ``u_1..u_N`` as a log-domain Trace.

    Over- or underflow of ``exp`` is reported in the diagnostics; the log sums
    themselves are always retained.
    """
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    seq = as_seq(seq)
    idx = seq.indices(N)
    S = prefix_logsums(seq.logs(idx), precision)
    tr = Trace(idx, S, "u")
    if tr.overflow:
        tr.diagnostics.append(f"{tr.overflow} partial products over/underflow binary64; log sums retained")
    return tr


def _pair_extremes(S):
    """max and min of ``S[j] - S[i]`` over ``i < j``."""
    run_min = np.minimum.accumulate(S[:-1])
    run_max = np.maximum.accumulate(S[:-1])
    return float(np.max(S[1:] - run_min)), float(np.min(S[1:] - run_max))


def cauchy_deviation(S):
    """``max |u_n/u_m - 1|`` over ``m < n`` for log partial sums ``S``."""
    if len(S) < 2:
        return 0.0
    hi, lo = _pair_extremes(np.asarray(S, float))
    with np.errstate(over="ignore"):
        return max(math.expm1(min(hi, 709.0)) if hi > 0 else 0.0, -math.expm1(lo) if lo < 0 else 0.0)


def _fmt(x):
    return f"{x:.6g}"


def classify_logsums(S, eps=DEFAULT_EPS, window=None, n_start=1):
    """Verdict for a product whose log partial sums are ``S`` (``S[0]`` is at ``n_start``)."""
    S = np.asarray(S, dtype=float)
    N = len(S)
    n_last = n_start + N - 1
    W = N // 2 if window is None else int(window)
    if N == 0:
        return Verdict(Kind.INCONCLUSIVE, n_used=0, eps=eps, evidence="empty stream")
    if not (1 <= W < N) and N > 1:
        raise ValueError(f"window must satisfy 1 <= W < N (W={W}, N={N})")
    limit = math.exp(S[-1]) if S[-1] < 709.0 else math.inf
    if N < 2:
        return Verdict(Kind.INCONCLUSIVE, n_used=n_last, eps=eps, evidence="horizon too short")

    tail = S[N - W - 1:]
    dev = cauchy_deviation(tail)
    if dev < eps and limit > 0:
        return Verdict(
            Kind.CONVERGES, limit_estimate=limit, n_used=n_last, eps=eps,
            evidence=f"Cauchy certificate: max tail |u_n/u_m - 1| = {_fmt(dev)} < eps over last {W + 1} terms",
        )

    r = N / (N - W)
    edges = [int(round(N / r**k)) for k in range(4)]
    if edges[3] < 1 or min(edges[k] - edges[k + 1] for k in range(3)) < 3:
        return Verdict(
            Kind.INCONCLUSIVE, limit_estimate=None, n_used=n_last, eps=eps,
            evidence=f"horizon too short for block comparison; tail deviation {_fmt(dev)}",
        )
    blocks = [S[edges[k + 1] - 1: edges[k]] for k in range(3)]
    lo = [float(b.min()) for b in blocks]
    hi = [float(b.max()) for b in blocks]
    width = [h - l for h, l in zip(hi, lo)]
    tiny = 64 * ULP * max(1.0, abs(float(S[-1])))

    def decay(new, old):
        if new <= tiny:
            return math.inf
        if old <= tiny:
            return -math.inf
        return math.log(old / new) / math.log(r)

    g01, g12 = decay(width[0], width[1]), decay(width[1], width[2])
    ev = (
        f"tail deviation {_fmt(dev)}; block ranges {_fmt(width[0])}, {_fmt(width[1])}, {_fmt(width[2])}"
        f" (ratio {_fmt(r)}); decay exponents {_fmt(g01)}, {_fmt(g12)}"
    )
    if g01 >= GAMMA_CONV and g12 >= GAMMA_CONV:
        if limit == 0.0 or math.isinf(limit):
            kind = Kind.DIVERGES_TO_ZERO if limit == 0.0 else Kind.DIVERGES_TO_INFINITY
            return Verdict(kind, n_used=n_last, eps=eps, evidence=ev + "; settled log sum beyond binary64 range")
        return Verdict(Kind.CONVERGES, limit_estimate=limit, n_used=n_last, eps=eps, evidence=ev + "; tails shrinking")
    if abs(S[-1]) > ESCAPE:
        kind = Kind.DIVERGES_TO_INFINITY if S[-1] > 0 else Kind.DIVERGES_TO_ZERO
        return Verdict(kind, n_used=n_last, eps=eps, evidence=ev + f"; |log u_N| = {_fmt(abs(S[-1]))} escaped")
    if g01 > GAMMA_DIV or g12 > GAMMA_DIV:
        return Verdict(Kind.INCONCLUSIVE, n_used=n_last, eps=eps, evidence=ev + "; decay rate ambiguous")
    drift = (hi[0] + lo[0]) / 2 - (hi[1] + lo[1]) / 2
    ev += f"; mid-range drift {_fmt(drift)}"
    if abs(drift) > DRIFT_FRACTION * width[0]:
        kind = Kind.DIVERGES_TO_INFINITY if drift > 0 else Kind.DIVERGES_TO_ZERO
        return Verdict(kind, n_used=n_last, eps=eps, evidence=ev)
    tol = max(eps, 0.05 * width[0])
    if abs(lo[0] - lo[1]) <= tol and abs(hi[0] - hi[1]) <= tol:
        return Verdict(
            Kind.OSCILLATES, liminf_estimate=math.exp(lo[0]), limsup_estimate=math.exp(hi[0]),
            n_used=n_last, eps=eps, evidence=ev + "; running min/max stable",
        )
    return Verdict(Kind.INCONCLUSIVE, n_used=n_last, eps=eps, evidence=ev + "; envelope not stable")


def verdict_from_logs(logs, eps=DEFAULT_EPS, window=None, precision=None, n_start=1):
    return classify_logsums(prefix_logsums(logs, precision), eps, window, n_start)


def estimate_convergence(seq, eps=DEFAULT_EPS, N=DEFAULT_N, W=None, precision=None):
    """Horizon-bounded convergence verdict for ``prod a_n`` over ``n <= N``.

    >>> estimate_convergence("1+1/n", N=10**4).kind.value
    'DivergesToInfinity'
    """
    seq = as_seq(seq)
    idx = seq.indices(N)
    S = prefix_logsums(seq.logs(idx), precision)
    return classify_logsums(S, eps, W, n_start=seq.origin)


def mmod_view(seq):
    seq = as_seq(seq)
    return MappedSeq(seq, lambda v: np.where(v >= 1.0, v, 1.0 / v), name="mmod")


def _sandwich(S, M, idx):
    # u_n <= prod mmod and u_n >= 1 / prod mmod, compared in the log domain with 4-ulp slack
    slack = 4 * ULP * np.maximum(1.0, M)
    excess = np.maximum(S - M, -M - S)
    bad = excess > slack
    return {"holds": not bool(bad.any()), "checked": int(len(S)),
            "first_violation": int(idx[np.flatnonzero(bad)[0]]) if bad.any() else None,
            "max_excess": float(excess.max()) if len(S) else 0.0}


def sandwich_check(seq, N=DEFAULT_N, precision=None):
    """``(prod mmod a_k)^-1 <= prod a_k <= prod mmod a_k`` at every ``n <= N``.

    Holds for any positive sequence; ``max_excess`` is the largest signed
    log-domain excess (negative when every bound is strict).
    """
    seq = as_seq(seq)
    idx = seq.indices(N)
    la = seq.logs(idx)
    return _sandwich(prefix_logsums(la, precision), prefix_logsums(np.abs(la), precision), idx)


def m_absolute_verdict(seq, eps=DEFAULT_EPS, N=DEFAULT_N, W=None, precision=None):
    """Verdict for ``prod mmod(a_n)`` plus the bounds check on realized partial products.

    When the modulus product converges the report verifies, at every realized
    ``n``, ``(prod mmod a_k)^-1 <= prod a_k <= prod mmod a_k`` (4-ulp slack), and
    that the plain product is also classified as convergent.
    """
    seq = as_seq(seq)
    idx = seq.indices(N)
    la = seq.logs(idx)
    M = prefix_logsums(np.abs(la), precision)
    verdict = classify_logsums(M, eps, W, n_start=seq.origin)
    report = {"m_absolute": verdict.to_dict(), "sandwich_holds": None, "plain_converges": None}
    if verdict.converges:
        S = prefix_logsums(la, precision)
        sw = _sandwich(S, M, idx)
        report["sandwich_holds"] = sw["holds"]
        if not sw["holds"]:
            report["sandwich_first_violation"] = sw["first_violation"]
        plain = classify_logsums(S, eps, W, n_start=seq.origin)
        report["plain"] = plain.to_dict()
        report["plain_converges"] = plain.converges
        report["bounds"] = [math.exp(-M[-1]), math.exp(S[-1]), math.exp(M[-1])]
    return verdict, report


def weighted_geometric_means(seq, t, N, precision=None):
    """Stream ``g_n = (a_1^t_1 ... a_n^t_n)^(1/(t_1+...+t_n))`` in the log domain.

    The limit ``g_n -> lim a_n`` needs ``sum t_n = inf``; when the realized
    weights look summable a precondition diagnostic is attached.
    """
    seq = as_seq(seq)
    t = as_seq(t, seq.origin, positive=True)
    idx = seq.indices(N)
    w = t.values(idx)
    num = prefix_logsums(w * seq.logs(idx), precision)
    den = prefix_logsums(w, precision)
    tr = Trace(idx, num / den, "g")
    if N >= 16:
        # read the weight partial sums as log sums of a product to reuse the classifier
        wv = classify_logsums(den, eps=0.0, n_start=seq.origin)
        if wv.kind in (Kind.CONVERGES,):
            tr.diagnostics.append(
                "precondition violated: weights appear summable (sum t_n < inf); g_n need not tend to lim a_n"
            )
    return tr


# --- oracle -----------------------------------------------------------------
# Same term logs as the primary route; independent double-double accumulation
# and a separate classifier working on dyadic block means.


def _oracle_logs(seq, N):
    seq = as_seq(seq)
    return seq.logs(seq.indices(N)).tolist()


def _oracle_classify(S, eps, n_last):
    N = len(S)
    if N < 2:
        return Verdict(Kind.INCONCLUSIVE, n_used=n_last, eps=eps, evidence="oracle: horizon too short")
    top = S[N // 2 - 1:]
    spread_top = float(top.max() - top.min())
    limit = math.exp(S[-1]) if S[-1] < 709.0 else math.inf
    if spread_top < eps * 0.5 and limit > 0:
        return Verdict(Kind.CONVERGES, limit_estimate=limit, n_used=n_last, eps=eps,
                       evidence=f"oracle: last-half spread {_fmt(spread_top)} below eps")
    if N < 64:
        return Verdict(Kind.INCONCLUSIVE, n_used=n_last, eps=eps, evidence="oracle: horizon too short")
    cuts = [N, N // 2, N // 4, N // 8]
    blocks = [S[cuts[k + 1] - 1: cuts[k]] for k in range(3)]
    spread = [float(b.max() - b.min()) for b in blocks]
    mean = [float(b.mean()) for b in blocks]
    ev = f"oracle: dyadic spreads {_fmt(spread[0])}, {_fmt(spread[1])}, {_fmt(spread[2])}"
    if spread[0] <= 0.9 * spread[1] and spread[1] <= 0.9 * spread[2]:
        return Verdict(Kind.CONVERGES, limit_estimate=limit, n_used=n_last, eps=eps, evidence=ev)
    if S[-1] > ESCAPE or S[-1] < -ESCAPE:
        kind = Kind.DIVERGES_TO_INFINITY if S[-1] > 0 else Kind.DIVERGES_TO_ZERO
        return Verdict(kind, n_used=n_last, eps=eps, evidence=ev + "; escaped")
    d = mean[0] - mean[1]
    if abs(d) > 0.25 * spread[0]:
        kind = Kind.DIVERGES_TO_INFINITY if d > 0 else Kind.DIVERGES_TO_ZERO
        return Verdict(kind, n_used=n_last, eps=eps, evidence=ev + f"; mean drift {_fmt(d)}")
    return Verdict(Kind.OSCILLATES, liminf_estimate=math.exp(float(blocks[0].min())),
                   limsup_estimate=math.exp(float(blocks[0].max())), n_used=n_last, eps=eps,
                   evidence=ev + "; bounded without drift")


def oracle_verdict(seq, eps=DEFAULT_EPS, N=DEFAULT_N):
    """Verdict from the double-double log-series of the first ``N`` factors."""
    seq = as_seq(seq)
    S = dd_cumsum(_oracle_logs(seq, N))
    return _oracle_classify(S, eps, seq.origin + N - 1), S


def oracle_compare(seq, eps=DEFAULT_EPS, N=DEFAULT_N, W=None):
    """Cross-check the primary verdict against the log-series oracle."""
    seq = as_seq(seq)
    idx = seq.indices(N)
    S = prefix_logsums(seq.logs(idx), "fast")
    primary = classify_logsums(S, eps, W, n_start=seq.origin)
    oracle, S_dd = oracle_verdict(seq, eps, N)
    scale = max(abs(float(S_dd[-1])), 1e-300)
    report = {
        "primary": primary.to_dict(),
        "oracle": oracle.to_dict(),
        "kinds_agree": primary.kind == oracle.kind,
        "logsum_primary": float(S[-1]),
        "logsum_oracle": float(S_dd[-1]),
        "logsum_rel_diff": abs(float(S[-1]) - float(S_dd[-1])) / scale,
        "limit_rel_diff": None,
    }
    if primary.converges and oracle.converges:
        report["limit_rel_diff"] = abs(primary.limit_estimate - math.exp(S_dd[-1])) / math.exp(S_dd[-1])
    report["agree"] = report["kinds_agree"] and (
        report["limit_rel_diff"] is None or report["limit_rel_diff"] < 1e-9
    )
    return report
