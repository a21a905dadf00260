"""Unordered products over countable index sets, as nets over finite subsets.

A family is a positive term rule on one of three universes: the naturals
``1, 2, 3, ...``, the nonzero integers (enumerated ``1, -1, 2, -2, ...``) or an
explicit finite index list. For a countable family the net of finite
subproducts converges exactly when both one-sided log series
``sum max(log a_i, 0)`` and ``sum min(log a_i, 0)`` converge, and the worst
complement subset of a finite ``F`` keeps exactly the terms of one sign.
Verdicts below therefore classify the two monotone one-sided series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as _expr
from .accum import DEFAULT_EPS, Kind, Verdict, classify_logsums, prefix_logsums
from .errors import DomainError, EvaluationError
from .seq import Seq

__all__ = [
    "IndexedFamily", "FiniteSubset", "net_partial", "unordered_converges",
    "split_convergence", "countable_support", "chain_order", "cofinal_chain_limit",
    "partition_blocks", "decomposition_check", "random_enumerations", "equivalence_suite",
    "DEFAULT_HORIZON",
]

DEFAULT_HORIZON = 2**21
MIN_BLOCK = 64
AGREE_TOL = 1e-6


class IndexedFamily:
    """Positive terms ``a_i`` on a concrete universe.

    ``rule`` is an expression in ``n``, a vectorized callable on int64 index
    arrays, or a Seq (naturals only). ``universe`` is ``"naturals"``,
    ``"signed"`` or an iterable of distinct integer indices.
    """

    def __init__(self, rule, universe="naturals", name=None):
        if isinstance(universe, str):
            if universe not in ("naturals", "signed"):
                raise DomainError(f"unknown universe {universe!r}")
            self.universe = universe
            self.finite = None
        else:
            idx = np.asarray(list(universe), dtype=np.int64)
            if len(np.unique(idx)) != len(idx):
                raise DomainError("finite universe has duplicate indices")
            self.universe = "finite"
            self.finite = np.sort(idx)
        if isinstance(rule, str):
            self._ast = _expr.parse_seq(rule)
            self._fn = lambda idx: _expr.evaluate(self._ast, idx)
            self.name = name or rule
        elif isinstance(rule, Seq):
            if self.universe == "signed":
                raise DomainError("a Seq rule cannot be evaluated on negative indices")
            self._fn = rule.values
            self.name = name or rule.describe()
        elif callable(rule):
            self._fn = rule
            self.name = name or getattr(rule, "__name__", "func")
        else:
            raise DomainError("rule must be an expression, a callable or a Seq")
        self._cache_idx = np.empty(0, dtype=np.int64)
        self._cache_logs = np.empty(0)

    @property
    def size(self):
        return None if self.finite is None else len(self.finite)

    def enumerate(self, count):
        """The first ``count`` indices in canonical order."""
        if self.universe == "finite":
            return self.finite[:count]
        k = np.arange(count, dtype=np.int64)
        if self.universe == "naturals":
            return k + 1
        return np.where(k % 2 == 0, k // 2 + 1, -(k // 2 + 1))

    def position(self, idx):
        """Canonical (0-based) enumeration position of each index of an infinite universe."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.universe == "naturals":
            return idx - 1
        return np.where(idx > 0, 2 * idx - 2, -2 * idx - 1)

    def contains(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        if self.universe == "finite":
            return np.isin(idx, self.finite)
        if self.universe == "naturals":
            return idx >= 1
        return idx != 0

    def logs(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        if not self.contains(idx).all():
            bad = int(idx[~self.contains(idx)][0])
            raise DomainError(f"index {bad} is not in the {self.universe} universe")
        with np.errstate(all="ignore"):
            v = np.asarray(self._fn(idx), dtype=float)
        v = np.broadcast_to(v, idx.shape)
        ok = np.isfinite(v) & (v > 0)
        if not ok.all():
            k = int(np.flatnonzero(~ok.ravel())[0])
            n = int(idx.ravel()[k])
            raise EvaluationError(f"term at i={n} is {float(v.ravel()[k])!r}; terms must be finite and positive", n)
        return np.log(v)

    def realize(self, horizon):
        """Canonical indices and log terms of the first ``horizon`` members (cached)."""
        if self.finite is not None:
            horizon = len(self.finite)
        if len(self._cache_idx) < horizon:
            idx = self.enumerate(horizon)
            self._cache_logs = self.logs(idx)
            self._cache_idx = idx
        return self._cache_idx[:horizon], self._cache_logs[:horizon]

    def classes(self, horizon):
        """Realized ``I1 = {a_i > 1}``, ``I2 = {a_i < 1}``, ``I3 = {a_i = 1}``."""
        idx, la = self.realize(horizon)
        return idx[la > 0], idx[la < 0], idx[la == 0]

    def __repr__(self):
        return f"<IndexedFamily {self.name!r} on {self.universe}>"


@dataclass(frozen=True)
class FiniteSubset:
    indices: tuple

    def __init__(self, indices):
        arr = [int(i) for i in indices]
        if len(set(arr)) != len(arr):
            raise DomainError("finite subset has duplicate indices")
        object.__setattr__(self, "indices", tuple(sorted(arr)))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def issubset(self, other):
        return set(self.indices) <= set(other.indices)


def net_partial(fam, E):
    """``prod_{i in E} a_i``.

    >>> net_partial(IndexedFamily("exp(1/n^2)"), FiniteSubset([1, 2])) == math.exp(1.25)
    True
    """
    if not isinstance(E, FiniteSubset):
        E = FiniteSubset(E)
    if len(E) == 0:
        return 1.0
    return math.exp(math.fsum(fam.logs(np.array(E.indices)).tolist()))


def _side_verdicts(la, eps, n_start=1):
    pos = prefix_logsums(np.maximum(la, 0.0))
    neg = prefix_logsums(np.minimum(la, 0.0))
    return classify_logsums(pos, eps, n_start=n_start), classify_logsums(neg, eps, n_start=n_start), pos, neg


def _finite_verdict(la, eps, what):
    total = math.fsum(la.tolist())
    return Verdict(Kind.CONVERGES, limit_estimate=math.exp(total), n_used=len(la), eps=eps,
                   evidence=f"finite {what}: product of {len(la)} terms")


def unordered_converges(fam, eps=DEFAULT_EPS, horizon=DEFAULT_HORIZON):
    """Verdict for the net of finite subproducts of ``fam``."""
    idx, la = fam.realize(horizon)
    if fam.finite is not None:
        return _finite_verdict(la, eps, "family")
    vp, vn, pos, neg = _side_verdicts(la, eps)
    h = len(la) // 2
    comp = max(math.expm1(min(pos[-1] - pos[h - 1], 709.0)), -math.expm1(neg[-1] - neg[h - 1]))
    ev = (f"complement bound beyond the first {h} indices: {comp:.6g}; "
          f"positive part {vp.kind.value}, negative part {vn.kind.value}")
    if vp.converges and vn.converges:
        return Verdict(Kind.CONVERGES, limit_estimate=math.exp(pos[-1] + neg[-1]), n_used=len(la), eps=eps, evidence=ev)
    if not vp.converges and not vn.converges:
        def ex(v):
            return math.exp(v) if abs(v) < 709 else (math.inf if v > 0 else 0.0)
        return Verdict(Kind.OSCILLATES, liminf_estimate=ex(neg[-1]), limsup_estimate=ex(pos[-1]),
                       n_used=len(la), eps=eps, evidence=ev + "; both one-sided products diverge")
    if not vp.converges:
        return Verdict(Kind.DIVERGES_TO_INFINITY, n_used=len(la), eps=eps, evidence=ev)
    return Verdict(Kind.DIVERGES_TO_ZERO, n_used=len(la), eps=eps, evidence=ev)


def split_convergence(fam, eps=DEFAULT_EPS, horizon=DEFAULT_HORIZON):
    """Verdicts over ``I1`` and ``I2`` and the identity ``prod_I = prod_I1 * prod_I2``."""
    idx, la = fam.realize(horizon)
    out = []
    for sel, name in ((la > 0, "I1"), (la < 0, "I2")):
        part = la[sel]
        if len(part) == 0:
            out.append(Verdict(Kind.CONVERGES, limit_estimate=1.0, n_used=0, eps=eps,
                               evidence=f"{name} empty up to horizon: empty product is 1"))
        elif fam.finite is not None or len(part) < MIN_BLOCK:
            out.append(_finite_verdict(part, eps, name))
        else:
            out.append(classify_logsums(prefix_logsums(part), eps))
    v1, v2 = out
    check = {"identity_holds": None}
    if v1.converges and v2.converges:
        whole = math.exp(math.fsum(la.tolist()))
        rel = abs(whole - v1.limit_estimate * v2.limit_estimate) / whole
        check = {"identity_holds": rel < 1e-9, "relative_error": rel, "product": whole}
    return v1, v2, check


def countable_support(fam, horizon=DEFAULT_HORIZON, grid=(1, 2, 4, 8, 16, 32)):
    """Sizes of ``G_n = {a_i < 1 - 1/n}`` and ``H_n = {a_i > 1 + 1/n}`` at two horizons.

    A count that is still growing between half and full horizon is flagged as
    not finite.
    """
    idx, la = fam.realize(horizon)
    half = len(la) // 2
    rows = []
    finite = True
    for n in grid:
        g = la < math.log1p(-1.0 / n) if n > 1 else np.zeros(len(la), bool)
        h = la > math.log1p(1.0 / n)
        row = {"n": n, "G": int(g.sum()), "H": int(h.sum()),
               "G_half": int(g[:half].sum()), "H_half": int(h[:half].sum())}
        row["finite"] = row["G"] == row["G_half"] and row["H"] == row["H_half"]
        finite &= row["finite"]
        rows.append(row)
    return {"horizon": len(la), "rows": rows, "all_finite": bool(finite)}


def chain_order(fam, rule, horizon=DEFAULT_HORIZON):
    """Enumeration order (canonical positions mapped to indices) for a chain rule.

    Rules: ``"prefix"``, ``"evens-odds"`` (positions 2, 1, 4, 3, ...) and
    ``"split:a:b"`` (``a`` terms with ``log a_i >= 0`` then ``b`` terms with
    ``log a_i < 0``, repeated, each stream in canonical order; stops when a
    stream runs out). An explicit list of indices is used as given.
    """
    idx, la = fam.realize(horizon)
    if not isinstance(rule, str):
        return np.asarray(rule, dtype=np.int64)
    if rule == "prefix":
        return idx
    if rule == "evens-odds":
        k = len(idx) - len(idx) % 2
        pos = np.arange(k).reshape(-1, 2)[:, ::-1].ravel()
        return idx[np.concatenate([pos, np.arange(k, len(idx))])]
    if rule.startswith("split:"):
        try:
            _, a, b = rule.split(":")
            a, b = int(a), int(b)
        except ValueError:
            raise DomainError(f"bad chain rule {rule!r}; expected split:a:b") from None
        if a < 1 or b < 1:
            raise DomainError("split ratios must be positive")
        return _merge(idx[la >= 0], idx[la < 0], lambda t: (t // (a + b)) * a + np.minimum(t % (a + b), a))
    raise DomainError(f"unknown chain rule {rule!r}")


def _merge(P, Q, p_count):
    """Merge streams so that after ``t`` steps ``p_count(t)`` terms of ``P`` are used."""
    if len(Q) == 0:
        return P
    if len(P) == 0:
        return Q
    t = np.arange(1, len(P) + len(Q) + 1, dtype=np.int64)
    cp = np.asarray(p_count(t), dtype=np.int64)
    cq = t - cp
    ok = (cp <= len(P)) & (cq <= len(Q))
    stop = int(np.argmin(ok)) if not ok.all() else len(t)
    cp, cq = cp[:stop], cq[:stop]
    from_p = np.diff(np.concatenate([[0], cp])) == 1
    out = np.empty(stop, dtype=np.int64)
    out[from_p] = P[: int(from_p.sum())]
    out[~from_p] = Q[: int((~from_p).sum())]
    return out


def _chain_logs(fam, order, horizon):
    idx, la = fam.realize(horizon)
    if fam.universe == "naturals" and len(order) and order.max() <= len(la) and order.min() >= 1:
        return la[order - 1]
    return fam.logs(order)


def cofinal_chain_limit(fam, chain, eps=DEFAULT_EPS, horizon=DEFAULT_HORIZON, modulus=False):
    """Limit of the net along a chain of finite subsets.

    ``chain`` is a rule name or enumeration order (its prefixes form the
    chain) or an explicit list of increasing FiniteSubsets. Indices of the
    realized universe never reached by the chain are reported as a
    non-cofinal diagnostic. With ``modulus=True`` the terms are replaced by
    ``mmod(a_i)``.
    """
    diag = []
    if isinstance(chain, (list, tuple)) and chain and isinstance(chain[0], FiniteSubset):
        for a, b in zip(chain, chain[1:]):
            if not a.issubset(b) or len(a) >= len(b):
                raise DomainError("chain is not strictly increasing")
        S = np.array([math.log(net_partial(fam, E)) for E in chain])
        if modulus:
            S = np.array([math.fsum(np.abs(fam.logs(np.array(E.indices))).tolist()) for E in chain])
        reached = np.array(chain[-1].indices, dtype=np.int64)
    else:
        order = chain_order(fam, chain, horizon)
        la = _chain_logs(fam, order, horizon)
        if modulus:
            la = np.abs(la)
        S = prefix_logsums(la)
        reached = order
    if fam.finite is not None:
        if len(np.unique(reached)) != len(reached):
            raise DomainError("enumeration repeats an index")
        missing = np.setdiff1d(fam.finite, reached)
    else:
        # canonical positions reached; every position below half the largest must be covered
        pos = fam.position(reached)
        seen = np.zeros(int(pos.max()) + 1 if len(pos) else 0, dtype=bool)
        seen[pos] = True
        if int(seen.sum()) != len(pos):
            raise DomainError("enumeration repeats an index")
        missing = fam.enumerate(len(seen) // 2)[~seen[: len(seen) // 2]]
    if len(missing):
        diag.append(f"non-cofinal: index {int(missing[0])} (and {len(missing) - 1} more) never included")
    if fam.finite is not None and not len(missing):
        v = Verdict(Kind.CONVERGES, limit_estimate=math.exp(S[-1]) if len(S) else 1.0,
                    n_used=len(S), eps=eps, evidence="finite family: chain ends at the whole set")
    else:
        v = classify_logsums(S, eps) if len(S) else Verdict(Kind.INCONCLUSIVE, evidence="empty chain")
    if diag:
        v.evidence += "; " + "; ".join(diag)
    return v, diag


def partition_blocks(fam, partition, horizon=DEFAULT_HORIZON):
    """Realized blocks (lists of canonical indices) of a partition rule.

    Rules: ``"single"``, ``"mod:k"`` (by residue of ``|i|``) and ``"v2"`` (by
    the 2-adic valuation of ``|i|``); a callable maps an index array to block
    labels; an explicit list of index lists must be disjoint.
    """
    idx, _ = fam.realize(horizon)
    if isinstance(partition, str):
        if partition == "single":
            labels = np.zeros(len(idx), dtype=np.int64)
        elif partition.startswith("mod:"):
            k = int(partition.split(":")[1])
            if k < 1:
                raise DomainError("mod:k needs k >= 1")
            labels = np.abs(idx) % k
        elif partition == "v2":
            a = np.abs(idx)
            labels = np.log2(a & -a).astype(np.int64)
        else:
            raise DomainError(f"unknown partition rule {partition!r}")
    elif callable(partition):
        labels = np.asarray(partition(idx))
    else:
        blocks = [np.asarray(b, dtype=np.int64) for b in partition]
        allidx = np.concatenate(blocks) if blocks else np.empty(0, np.int64)
        if len(np.unique(allidx)) != len(allidx):
            raise DomainError("partition blocks overlap")
        return blocks
    out = []
    for lab in np.unique(labels):
        out.append(idx[labels == lab])
    return out


def decomposition_check(fam, partition, eps=DEFAULT_EPS, horizon=DEFAULT_HORIZON):
    """Iterated product over the blocks of a partition versus the unordered value.

    Blocks with at least 64 realized members are classified as infinite
    products; shorter blocks are treated as finite.
    """
    blocks = partition_blocks(fam, partition, horizon)
    inner = []
    logs_total = []
    all_conv = True
    for b in blocks:
        la = _chain_logs(fam, b, horizon)
        if fam.finite is not None or len(b) < MIN_BLOCK:
            v = _finite_verdict(la, eps, "block")
        else:
            v = classify_logsums(prefix_logsums(la), eps)
        inner.append({"first": int(b[0]), "size": len(b), "verdict": v.to_dict()})
        all_conv &= v.converges
        if v.converges:
            logs_total.append(math.log(v.limit_estimate))
    report = {"partition": partition if isinstance(partition, str) else "custom",
              "blocks": inner, "inner_all_converge": bool(all_conv), "iterated_value": None,
              "unordered_value": None, "agrees": None}
    if all_conv:
        report["iterated_value"] = math.exp(math.fsum(logs_total))
    u = unordered_converges(fam, eps, horizon)
    if u.converges:
        report["unordered_value"] = u.limit_estimate
        if all_conv:
            rel = abs(report["iterated_value"] - u.limit_estimate) / u.limit_estimate
            report["relative_difference"] = rel
            report["agrees"] = rel <= max(eps, AGREE_TOL)
    else:
        diverging = [blk for blk in inner if not Verdict(**_vkw(blk["verdict"])).converges]
        if diverging:
            report["diverging_block"] = diverging[0]["first"]
    return report


def _vkw(d):
    return {"kind": d["kind"], "limit_estimate": d["limit_estimate"], "liminf_estimate": d["liminf"],
            "limsup_estimate": d["limsup"], "n_used": d["n_used"], "eps": d["eps"], "evidence": d["evidence"]}


def random_enumerations(fam, count=10, seed=0, horizon=DEFAULT_HORIZON):
    """Enumerations interleaving the ``log >= 0`` and ``log < 0`` streams at random rates.

    Each uses a rate ``rho`` drawn log-uniformly from ``[1/2, 2]``: after ``t``
    steps ``round(t * rho / (1 + rho))`` terms of the first stream are used.
    """
    rng = np.random.default_rng(seed)
    idx, la = fam.realize(horizon)
    P, Q = idx[la >= 0], idx[la < 0]
    out = []
    for _ in range(count):
        rho = float(np.exp(rng.uniform(math.log(0.5), math.log(2.0))))
        frac = rho / (1.0 + rho)
        out.append((rho, _merge(P, Q, lambda t: np.floor(t * frac + 0.5).astype(np.int64))))
    return out


def _values_agree(values, tol=AGREE_TOL):
    if not values:
        return True
    lo, hi = min(values), max(values)
    return (hi - lo) / lo <= tol


def _route(verdicts):
    conv = all(v.converges for v in verdicts)
    vals = [v.limit_estimate for v in verdicts if v.converges]
    if conv and not _values_agree(vals):
        conv = False
    return {"converges": conv, "kinds": [v.kind.value for v in verdicts],
            "values": vals, "value": vals[0] if conv and vals else None}


def equivalence_suite(fam, eps=DEFAULT_EPS, horizon=DEFAULT_HORIZON,
                      chains=("prefix", "evens-odds", "split:1:2"),
                      partitions=("single", "mod:3", "v2"), enumerations=10, seed=0):
    """Run the five equivalent convergence routes plus random enumerations.

    Routes: (a) unordered product of ``mmod(a_i)``, (b) unordered product,
    (c) chains on ``mmod(a_i)``, (d) chains on ``a_i``, (e) iterated products
    over partitions, (f) random enumerations. Routes are compared on whether
    they converge; convergent values must agree within 1e-6 relative.
    """
    idx, la = fam.realize(horizon)
    mod_fam = IndexedFamily(lambda i: np.exp(np.abs(fam.logs(i))), fam.universe if fam.finite is None
                            else fam.finite.tolist(), name=f"mmod({fam.name})")
    routes = {}
    routes["a"] = _route([unordered_converges(mod_fam, eps, horizon)])
    routes["b"] = _route([unordered_converges(fam, eps, horizon)])
    routes["c"] = _route([cofinal_chain_limit(fam, c, eps, horizon, modulus=True)[0] for c in chains])
    routes["d"] = _route([cofinal_chain_limit(fam, c, eps, horizon)[0] for c in chains])
    e_verdicts = []
    for p in partitions:
        rep = decomposition_check(fam, p, eps, horizon)
        if rep["inner_all_converge"]:
            e_verdicts.append(Verdict(Kind.CONVERGES, limit_estimate=rep["iterated_value"], n_used=len(la), eps=eps))
        else:
            e_verdicts.append(Verdict(Kind.INCONCLUSIVE, n_used=len(la), eps=eps, evidence="a block diverges"))
    routes["e"] = _route(e_verdicts)
    routes["f"] = _route([cofinal_chain_limit(fam, order, eps, horizon)[0]
                          for _, order in random_enumerations(fam, enumerations, seed, horizon)])
    kinds_agree = len({r["converges"] for r in routes.values()}) == 1
    values_agree = True
    if kinds_agree and routes["a"]["converges"]:
        values_agree = _values_agree(routes["a"]["values"] + routes["c"]["values"]) and _values_agree(
            routes["b"]["values"] + routes["d"]["values"] + routes["e"]["values"] + routes["f"]["values"])
    return {"family": fam.name, "universe": fam.universe, "horizon": len(la), "routes": routes,
            "converges": routes["b"]["converges"], "kinds_agree": kinds_agree,
            "values_agree": values_agree, "agree": kinds_agree and values_agree}
