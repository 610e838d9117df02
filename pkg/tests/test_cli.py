import csv
import subprocess
import sys

import pytest

from helpers import DATA, GOLDEN, SAMPLES
from ndprover.checker import verify_proof
from ndprover.cli import execute, format_report, main
from ndprover.syntax import parse_proof

FRIENDS = str(SAMPLES / "friends.ndkb")
COMPETE = str(SAMPLES / "compete.ndkb")
BEACH = str(SAMPLES / "beach.ndkb")


def test_check_valid_proof(capsys):
    code = main(["check", str(GOLDEN / "or_elim.ndp")])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[:2] == ["VALID", "fragment: planning"]
    assert "stat: steps=6" in out


def test_check_broken_proof(capsys):
    code = main(["check", str(DATA / "broken.ndp")])
    out = capsys.readouterr().out
    assert code == 1
    assert out.strip() == "INVALID step 3: ∨-Elim requires three premise sequents"


def test_quiet_prints_only_the_verdict(capsys):
    assert main(["--quiet", "check", str(DATA / "broken.ndp")]) == 1
    assert capsys.readouterr().out == "INVALID\n"
    assert main(["check", "-q", str(GOLDEN / "and_intro.ndp")]) == 0
    assert capsys.readouterr().out == "VALID\n"


def test_run_prints_derived_facts():
    out = execute(["run", FRIENDS])
    assert out.code == 0
    assert [l for l in out.lines if not l.startswith("stat:")] == ["friends(a,b).", "friends(b,a)."]
    assert "stat: derived=2" in out.lines
    dumped = execute(["run", FRIENDS, "--dump"])
    assert "like(a,b)." in dumped.lines


def test_run_contradiction_is_a_negative_result(tmp_path):
    kb = tmp_path / "clash.ndkb"
    kb.write_text("p(a). ~q(a). q(X) <- p(X).\n")
    out = execute(["run", str(kb)])
    assert out.code == 1
    assert "contradiction" in out.lines[0]


@pytest.mark.parametrize("strategy", ["ground", "shallow", "top1", "astar"])
def test_query_each_strategy(strategy, tmp_path):
    proof_path = tmp_path / "q.ndp"
    out = execute(["query", COMPETE, "compete(a,b)", "--strategy", strategy, "--emit-proof", str(proof_path)])
    assert out.code == 0 and out.verdict == "FOUND"
    assert "witness: X3=c" in out.lines
    assert verify_proof(parse_proof(proof_path.read_text())[0])


def test_query_not_found_and_budget():
    out = execute(["query", COMPETE, "compete(a,zz)", "--strategy", "ground"])
    assert out.code == 1 and out.verdict == "NOT-FOUND"
    out = execute(["query", COMPETE, "compete(a,b)", "--strategy", "astar", "--budget", "1"])
    assert out.code == 3 and out.verdict == "NOT-FOUND"
    assert any("astar-budget" in l for l in out.lines)


def test_plan_with_trace_and_proof(tmp_path):
    proof_path = tmp_path / "beach.ndp"
    out = execute(["plan", BEACH, "satisfied(p,e)", "--trace", "--emit-proof", str(proof_path)])
    assert out.code == 0 and out.lines[0] == "GUARANTEED satisfied(p,e)"
    assert "split on sunny(e) | ~sunny(e)" in out.lines
    assert "stat: leaves=2" in out.lines
    proof = parse_proof(proof_path.read_text())[0]
    assert verify_proof(proof) and proof.count("OrElim") == 1


def test_plan_leaf_guard_exit_code():
    out = execute(["plan", BEACH, "satisfied(p,e)", "--max-leaves", "1"])
    assert out.code == 3
    assert "leaf-ceiling" in out.errors[0]
    assert out.lines and out.lines[0].startswith("split on")


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["query", COMPETE, "compete(a,b)"],  # --strategy is required
    ["query", COMPETE, "compete(a,b)", "--strategy", "astar", "--budget", "0"],
    ["--threads", "0", "run", FRIENDS],
    ["bench", "--fragment", "forward", "--sizes", "a,b", "--out", "x.csv"],
    ["run", "/nonexistent/file.ndkb"],
])
def test_usage_errors_exit_2(argv):
    assert execute(argv).code == 2


def test_parse_errors_exit_2_with_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.ndkb"
    bad.write_text("p(a).\nq(X).\n")
    assert main(["run", str(bad)]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:2:1: error: fact q(X) is not ground" in err


def test_bad_thread_variable(monkeypatch):
    monkeypatch.setenv("NDPROVER_THREADS", "many")
    out = execute(["run", FRIENDS])
    assert out.code == 2 and "NDPROVER_THREADS" in out.errors[0]
    monkeypatch.setenv("NDPROVER_THREADS", "2")
    assert execute(["run", FRIENDS]).code == 0


def test_bench_writes_csv(tmp_path):
    path = tmp_path / "b.csv"
    out = execute(["bench", "--fragment", "planning", "--sizes", "2,3,4", "--out", str(path)])
    assert out.code == 0
    assert "stat: rows=3" in out.lines
    rows = list(csv.reader(path.read_text().splitlines()))
    assert len(rows) == 4
    assert rows[0][:3] == ["fragment", "seed", "param_D"]
    assert [r[rows[0].index("leaves")] for r in rows[1:]] == ["4", "8", "16"]


def test_format_report_quiet_and_verbose():
    out = execute(["check", str(GOLDEN / "and_intro.ndp")])
    assert format_report(out, 0) == "VALID\n"
    assert format_report(out, 1).startswith("VALID\nfragment: forward\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ndprover.cli", "check", str(GOLDEN / "and_elim.ndp")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("VALID")
