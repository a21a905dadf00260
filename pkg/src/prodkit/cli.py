"""Command-line front end.

Every subcommand runs one library operation and prints a single JSON document
(or a CSV table for streams) on standard output. Exit status: 0 when the
analysis completes, whatever the verdict; 1 on input errors; 2 when
``--strict`` is given and a theorem hypothesis fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings

import numpy as np

from . import accum, convtests, matprod, powerprod, rearrange, unordered
from .errors import HypothesisError, HypothesisWarning, ProdkitError
from .seq import ListSeq, as_seq

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2


class HypothesisFailure(Exception):
    """Raised inside a command when --strict turns a failed hypothesis into exit status 2."""

    def __init__(self, payload, message):
        super().__init__(message)
        self.payload = payload


def clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    return obj


def _load_json(text):
    """Inline JSON, or ``@path`` to read it from a file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def _seq(args, name="seq", origin=None, positive=True):
    text = getattr(args, name)
    if name == "seq":
        listfile = getattr(args, "list", None)
    else:
        listfile = getattr(args, name[:-4] + "_list", None) if name.endswith("_seq") else None
    org = args.origin if origin is None else origin
    if listfile:
        with open(listfile) as fh:
            return ListSeq(json.load(fh), org, positive)
    if text is None:
        raise ValueError(f"--{name.replace('_', '-')} is required")
    return as_seq(text, org, positive)


def _window(args):
    return None if args.window is None else args.window


def _stream_out(args, trace, payload):
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        for row in trace.csv_rows(args.stride):
            w.writerow(row)
        return None
    return payload


def _strict(args, report, hypotheses_hold, message):
    if args.strict and not hypotheses_hold:
        raise HypothesisFailure(report, message)
    return report


# --- commands -----------------------------------------------------------


def cmd_analyze(args):
    seq = _seq(args)
    v = accum.estimate_convergence(seq, args.eps, args.n_max, _window(args))
    if args.format == "csv":
        return _stream_out(args, accum.partial_products(seq, args.n_max), None)
    return v.to_dict()


def cmd_m_absolute(args):
    v, report = accum.m_absolute_verdict(_seq(args), args.eps, args.n_max, _window(args))
    return report


def cmd_oracle(args):
    return accum.oracle_compare(_seq(args), args.eps, args.n_max, _window(args))


def cmd_rearrange(args):
    seq = _seq(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        view, plan = rearrange.riemann_rearrange(seq, args.alpha, args.beta, args.max_factors, args.schedule)
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write(plan.to_jsonl() + ("\n" if plan.milestones else ""))
    if args.format == "csv":
        return _stream_out(args, plan.trace(), None)
    v = plan.verdict(args.eps)
    report = {
        "verdict": v.to_dict(),
        "final_u": math.exp(plan.log_partials()[-1]) if plan.emitted else 1.0,
        "emitted": plan.emitted,
        "cycles": len(plan.milestones),
        "permutation_ok": plan.check_permutation(),
        "last_milestones": [m.to_dict() for m in plan.milestones[-args.show_milestones:]] if args.show_milestones else [],
        "warnings": plan.warnings,
        "diagnostics": plan.diagnostics,
    }
    return _strict(args, report, not caught, "hypothesis precheck failed")


def cmd_invariance(args):
    try:
        return rearrange.verify_rearrangement_invariance(_seq(args), args.trials, args.n_max, args.tol, args.seed)
    except HypothesisError as e:
        report = {"hypothesis_error": str(e)}
        return _strict(args, report, False, str(e))


def cmd_tails(args):
    seq = _seq(args)
    try:
        tb = rearrange.uniform_tail_bound(seq, args.tail_eps, args.horizon)
    except HypothesisError as e:
        return _strict(args, {"hypothesis_error": str(e)}, False, str(e))
    report = {"bound": tb.to_dict()}
    if args.spot_check and tb.n0 is not None:
        report["spot_check"] = rearrange.spot_check_tail_bound(
            seq, tb.n0, args.tail_eps, min(args.horizon, args.spot_horizon),
            args.samples, args.samples, args.seed)
    return report


def _family(args):
    universe = args.universe
    if universe not in ("naturals", "signed"):
        universe = _load_json(universe)
    return unordered.IndexedFamily(args.seq, universe)


def cmd_unordered(args):
    fam = _family(args)
    if args.suite:
        return unordered.equivalence_suite(fam, args.eps, args.horizon, enumerations=args.enumerations, seed=args.seed)
    report = {"verdict": unordered.unordered_converges(fam, args.eps, args.horizon)}
    v1, v2, check = unordered.split_convergence(fam, args.eps, args.horizon)
    report["split"] = {"I1": v1, "I2": v2, "identity": check}
    if args.chain:
        chain = args.chain if not args.chain.startswith(("[", "@")) else _load_json(args.chain)
        v, diag = unordered.cofinal_chain_limit(fam, chain, args.eps, args.horizon)
        report["chain"] = {"rule": args.chain, "verdict": v, "diagnostics": diag}
    if args.partition:
        part = args.partition if not args.partition.startswith(("[", "@")) else _load_json(args.partition)
        report["decomposition"] = unordered.decomposition_check(fam, part, args.eps, args.horizon)
    if args.support:
        report["support"] = unordered.countable_support(fam, args.horizon)
    return report


def _report_out(args, rep):
    return _strict(args, rep.to_dict(), rep.hypotheses_hold, "hypothesis check failed")


def cmd_test(args):
    kind = args.test_kind
    if kind == "root":
        rep = convtests.root_type_test(_seq(args), _seq(args, "t", positive=True), args.n_max, args.eps)
    elif kind == "condense":
        rep = convtests.condensation_test(_seq(args, positive=not args.raw_check), args.eps, args.K, args.horizon)
    elif kind == "alternating":
        rep = convtests.alternating_product(_seq(args), args.eps, args.n_max, args.reciprocal)
    elif kind == "cesaro":
        tr = convtests.cesaro_product_mean(_seq(args), _seq(args, "t"), args.n_max)
        payload = {"n": int(tr.n[-1]), "sigma": tr.last(), "diagnostics": tr.diagnostics}
        return _stream_out(args, tr, payload)
    else:
        rep = convtests.abel_type_product(_seq(args, "b"), _seq(args, "a", positive=False), args.eps, args.n_max)
    return _report_out(args, rep)


def cmd_matrix(args):
    kind = args.matrix_kind
    if kind == "apply":
        A = _load_json(args.matrix)
        A = A["rows"] if isinstance(A, dict) else A
        x = _load_json(args.x)
        return {"result": matprod.star_apply(A, x)}
    if kind == "check-identities":
        return matprod.random_homomorphism_trials(args.trials, args.size, args.seed, args.tol)
    spec = args.matrix
    spec = _load_json(spec) if spec.startswith(("{", "@")) else spec
    A = matprod.SummabilityMatrix.from_spec(spec)
    tr, rep = matprod.regular_transform(A, _seq(args), args.m_max, args.tol_y, args.p)
    if args.format == "csv":
        return _stream_out(args, tr, None)
    return _report_out(args, rep)


def cmd_power(args):
    kind = args.power_kind
    if kind == "eval":
        base = _seq(args, "base_seq", origin=args.origin if args.origin_set else 0)
        return powerprod.eval_power_product(powerprod.PowerProduct(base, args.x), args.n_max, args.eps).to_dict()
    if kind == "scan":
        grid = powerprod.parse_grid(args.x_grid)
        base = _seq(args, "base_seq", origin=args.origin)
        rep = powerprod.power_region_scan(base, grid, args.n_max, args.eps, origin=args.origin)
        return _strict(args, rep, rep["guarantee"], "no hypothesis route holds")
    try:
        return powerprod.cauchy_product_means(_seq(args, "a", origin=0), _seq(args, "b", origin=0), args.n_max, args.tol)
    except HypothesisError as e:
        return _strict(args, {"hypothesis_error": str(e)}, False, str(e))


# --- parser -------------------------------------------------------------


def _common(p, n_default=10**6):
    p.add_argument("--eps", type=float, default=accum.DEFAULT_EPS, help="verdict tolerance (default 1e-9)")
    p.add_argument("--n-max", type=int, default=n_default, help=f"horizon N (default {n_default})")
    p.add_argument("--window", type=int, default=None, help="Cauchy window W (default N/2)")
    p.add_argument("--origin", type=int, default=1, choices=(0, 1), help="index origin of --seq")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--stride", type=int, default=1, help="row stride for CSV streams")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 2 when a hypothesis fails")


def _seq_arg(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--seq", help='term expression in n, e.g. "exp((-1)^(n+1)/n)"')
    g.add_argument("--list", help="JSON file holding an explicit list of terms")


def _base_arg(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--base-seq", help="base expression in n")
    g.add_argument("--base-list", help="JSON file holding explicit base terms")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit status 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# options whose values may start with a minus sign (grids such as "-1,0,0.5")
_SIGNED_VALUES = ("--x-grid", "--x", "--alpha", "--beta", "--p")


def _glue_signed(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_VALUES:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser():
    parser = _Parser(prog="prodkit", description="Infinite products in the log domain.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="convergence verdict for prod a_n")
    _seq_arg(p)
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("m-absolute", help="verdict for prod mmod(a_n) and the bounds check")
    _seq_arg(p)
    _common(p)
    p.set_defaults(func=cmd_m_absolute)

    p = sub.add_parser("oracle", help="compare the verdict with the double-double log-series oracle")
    _seq_arg(p)
    _common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("rearrange", help="rearrange towards liminf alpha and limsup beta")
    _seq_arg(p)
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True, help="use inf for an unbounded target")
    p.add_argument("--max-factors", type=int, default=10**6)
    p.add_argument("--schedule", choices=("geometric", "harmonic"), default="geometric")
    p.add_argument("--trace-out", help="write milestones as JSON lines to this file")
    p.add_argument("--show-milestones", type=int, default=5, help="number of final milestones in the report")
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("invariance", help="u_N under random permutations of 1..N")
    _seq_arg(p)
    _common(p, 10**5)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("tails", help="uniform tail bound n0 for exponent families and subproducts")
    _seq_arg(p)
    _common(p)
    p.add_argument("--tail-eps", type=float, default=1e-3)
    p.add_argument("--horizon", type=int, default=10**6)
    p.add_argument("--spot-check", action="store_true")
    p.add_argument("--spot-horizon", type=int, default=10**5)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("unordered", help="unordered product over naturals, signed integers or a finite set")
    p.add_argument("--seq", required=True)
    _common(p)
    p.add_argument("--universe", default="naturals", help='naturals, signed or a JSON list of indices')
    p.add_argument("--horizon", type=int, default=unordered.DEFAULT_HORIZON)
    p.add_argument("--chain", help='prefix, evens-odds, split:a:b or a JSON index list')
    p.add_argument("--partition", help='single, mod:k, v2 or a JSON list of blocks')
    p.add_argument("--support", action="store_true", help="report the sizes of G_n and H_n")
    p.add_argument("--suite", action="store_true", help="run the equivalence suite")
    p.add_argument("--enumerations", type=int, default=10)
    p.set_defaults(func=cmd_unordered)

    p = sub.add_parser("test", help="sufficient tests and product means")
    tsub = p.add_subparsers(dest="test_kind", required=True, parser_class=_Parser)
    q = tsub.add_parser("root", help="root-type test with weights t")
    _seq_arg(q)
    q.add_argument("--t", required=True, help="weight expression with convergent sum")
    _common(q, 10**5)
    q = tsub.add_parser("condense", help="condensed product a_(2^k)^(2^k)")
    _seq_arg(q)
    _common(q)
    q.add_argument("--K", type=int, default=40)
    q.add_argument("--horizon", type=int, default=10**5, help="horizon of the hypothesis check")
    q.add_argument("--raw-check", action="store_true", help="accept non-positive terms in the hypothesis check")
    q = tsub.add_parser("alternating", help="a_1 a_2^-1 a_3 ... for decreasing a_n -> 1")
    _seq_arg(q)
    _common(q)
    q.add_argument("--reciprocal", action="store_true", help="(1-a_1)(1-a_2)^-1... for decreasing a_n in (0,1)")
    q = tsub.add_parser("cesaro", help="weighted geometric means of the partial products")
    _seq_arg(q)
    q.add_argument("--t", default="1", help="weights (default 1)")
    _common(q)
    q = tsub.add_parser("abel", help="prod b_k^(a_k) with bounded segment sums of a")
    q.add_argument("--b", required=True)
    q.add_argument("--a", required=True)
    _common(q)
    for q in tsub.choices.values():
        q.set_defaults(func=cmd_test)

    p = sub.add_parser("matrix", help="star action and product summability")
    msub = p.add_subparsers(dest="matrix_kind", required=True, parser_class=_Parser)
    q = msub.add_parser("apply", help="A*x for a dense matrix")
    q.add_argument("--matrix", required=True, help='JSON {"rows": [[...]]} inline or @file')
    q.add_argument("--x", required=True, help="JSON list of positive entries")
    _common(q)
    q = msub.add_parser("check-identities", help="random trials of the three identities")
    q.add_argument("--size", type=int, default=5, help="largest dimension")
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--tol", type=float, default=1e-12)
    _common(q)
    q = msub.add_parser("regular", help="y_m = prod x_n^(a_(m,n)) for a summability matrix")
    q.add_argument("--matrix", default="cesaro", help='cesaro, euler:q or JSON {"kind": ...}')
    _seq_arg(q)
    q.add_argument("--m-max", type=int, default=10**6)
    q.add_argument("--p", type=float, default=None, help="limit of x_n if not 1")
    q.add_argument("--tol-y", type=float, default=1e-4, help="tolerance for y_m -> 1")
    _common(q)
    for q in msub.choices.values():
        q.set_defaults(func=cmd_matrix)

    p = sub.add_parser("power", help="power products prod a_n^(x^n)")
    psub = p.add_subparsers(dest="power_kind", required=True, parser_class=_Parser)
    q = psub.add_parser("eval", help="value at one x (base indexed from 0)")
    _base_arg(q)
    q.add_argument("--x", type=float, required=True)
    _common(q, 10**5)
    q = psub.add_parser("scan", help="verdicts over a grid of x (base indexed from 1)")
    _base_arg(q)
    q.add_argument("--x-grid", required=True, help='"a:b:step" or a comma list')
    _common(q, 10**5)
    q = psub.add_parser("cauchy", help="root limits of the Cauchy-type product")
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--tol", type=float, default=1e-2)
    _common(q, 10**5)
    for q in psub.choices.values():
        q.set_defaults(func=cmd_power)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_glue_signed(argv))
    args.origin_set = any(a == "--origin" or a.startswith("--origin=") for a in argv)
    if getattr(args, "window", None) is not None and args.window >= getattr(args, "n_max", args.window + 1):
        print("prodkit: error: --window must be smaller than --n-max", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "eps", 1.0) <= 0:
        print("prodkit: error: --eps must be positive", file=sys.stderr)
        return EXIT_INPUT
    status = EXIT_OK
    try:
        payload = args.func(args)
    except HypothesisFailure as e:
        payload, status = e.payload, EXIT_HYPOTHESIS
        print(f"prodkit: hypothesis failure: {e}", file=sys.stderr)
    except (ProdkitError, ValueError, KeyError, OSError) as e:
        print(f"prodkit: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if payload is not None:
        json.dump(clean(payload), sys.stdout, indent=2, allow_nan=False)
        sys.stdout.write("\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
