import json
import subprocess
import sys

import pytest

from prodkit.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--seq", "exp((-1)^(n+1)/n)", "--n-max", "1000000", "--eps", "1e-9")
    d = json.loads(out)
    assert code == 0
    assert d["kind"] == "Converges" and abs(d["limit_estimate"] - 2) < 1e-3
    assert list(d) == ["kind", "limit_estimate", "liminf", "limsup", "n_used", "eps", "evidence"]


def test_divergent_verdict_still_exits_zero(capsys):
    code, out, _ = run(capsys, "analyze", "--seq", "1+1/n", "--n-max", "10000")
    assert code == 0 and json.loads(out)["kind"] == "DivergesToInfinity"


def test_parse_error_reports_offset(capsys):
    code, out, err = run(capsys, "analyze", "--seq", "exp(1/n^")
    assert code == 1 and out == ""
    assert "offset 8" in err


def test_missing_list_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--list", str(tmp_path / "none.json"))
    assert code == 1 and "No such file" in err


def test_list_input_and_csv(capsys, tmp_path):
    f = tmp_path / "terms.json"
    f.write_text("[2, 1.5, 1.3333333333333333]")
    code, out, _ = run(capsys, "analyze", "--list", str(f), "--n-max", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "n,u,log_u" and len(lines) == 4
    assert lines[1].startswith("1,2.0,")


def test_window_validation(capsys):
    code, _, err = run(capsys, "analyze", "--seq", "2", "--n-max", "10", "--window", "10")
    assert code == 1 and "window" in err


def test_rearrange(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "rearrange", "--seq", "exp((-1)^(n+1)/n)", "--alpha", "3", "--beta", "3",
                       "--max-factors", "100000", "--trace-out", str(trace))
    d = json.loads(out)
    assert code == 0 and abs(d["final_u"] - 3) < 0.01 and d["permutation_ok"]
    first = json.loads(trace.read_text().splitlines()[0])
    assert set(first) == {"i", "m_i", "k_i", "u_at_m", "u_at_k"}


def test_rearrange_strict_hypothesis(capsys):
    code, out, err = run(capsys, "rearrange", "--seq", "exp((-1)^(n+1)/n^2)", "--alpha", "1", "--beta", "2",
                         "--max-factors", "1000", "--strict")
    assert code == 2 and json.loads(out)["warnings"]
    code, _, _ = run(capsys, "rearrange", "--seq", "exp((-1)^(n+1)/n^2)", "--alpha", "1", "--beta", "2",
                     "--max-factors", "1000")
    assert code == 0


def test_invariance_strict(capsys):
    code, _, err = run(capsys, "invariance", "--seq", "exp((-1)^(n+1)/n)", "--n-max", "1000", "--strict")
    assert code == 2 and "hypothesis" in err


def test_matrix_identities(capsys):
    code, out, _ = run(capsys, "matrix", "check-identities", "--size", "3", "--trials", "100", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["failures"] == 0


def test_matrix_apply_from_file(capsys, tmp_path):
    f = tmp_path / "A.json"
    f.write_text(json.dumps({"rows": [[1, 2], [0, 1]]}))
    code, out, _ = run(capsys, "matrix", "apply", "--matrix", "@" + str(f), "--x", "[2, 3]")
    res = json.loads(out)["result"]
    assert code == 0 and abs(res[0] - 18) < 1e-12 and abs(res[1] - 3) < 1e-12


def test_matrix_apply_missing_file(capsys):
    code, _, err = run(capsys, "matrix", "apply", "--matrix", "@/nonexistent/A.json", "--x", "[1]")
    assert code == 1


def test_condense_strict_failure(capsys):
    code, out, _ = run(capsys, "test", "condense", "--seq", "1-1/n", "--strict")
    d = json.loads(out)
    assert code == 2 and d["conclusion"] is None
    assert [h["witness"] for h in d["hypotheses"]] == [2, 1]


def test_power_scan(capsys):
    code, out, _ = run(capsys, "power", "scan", "--base-seq", "n/(n+1)", "--x-grid", "-1,0.5,1")
    d = json.loads(out)
    assert [r["verdict"]["kind"] for r in d["rows"]] == ["Converges", "Converges", "DivergesToZero"]


def test_cesaro_csv_stride(capsys):
    code, out, _ = run(capsys, "test", "cesaro", "--seq", "2^((-1)^n)", "--n-max", "100", "--format", "csv",
                       "--stride", "10")
    lines = out.strip().splitlines()
    assert lines[0] == "n,sigma,log_sigma" and len(lines) == 11


def test_every_subcommand_has_help():
    p = build_parser()
    sub = next(a for a in p._actions if a.dest == "command")
    assert set(sub.choices) == {"analyze", "m-absolute", "rearrange", "invariance", "tails", "unordered",
                                "test", "matrix", "power", "oracle"}
    nested = {"test": {"root", "condense", "alternating", "cesaro", "abel"},
              "matrix": {"apply", "check-identities", "regular"},
              "power": {"eval", "scan", "cauchy"}}
    for name, kids in nested.items():
        sp = next(a for a in sub.choices[name]._actions if a.dest.endswith("_kind"))
        assert set(sp.choices) == kids
        for k in kids:
            assert sp.choices[k].format_help()


@pytest.mark.parametrize("argv", [
    ["unordered", "--seq", "exp(1/n^2)", "--horizon", "65536", "--suite", "--seed", "3"],
    ["tails", "--seq", "exp((-1)^(n+1)/n^2)", "--spot-check", "--samples", "20", "--seed", "4"],
    ["invariance", "--seq", "exp((-1)^(n+1)/n^2)", "--trials", "20", "--seed", "5"],
])
def test_deterministic_output(capsys, argv):
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and a


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "prodkit", "oracle", "--seq", "exp(1/n^2)", "--n-max", "10000"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["kinds_agree"]
