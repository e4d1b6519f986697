import json
import subprocess
import sys
from pathlib import Path

import pytest

from wkat.cli import main

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).parent / "golden"

# name, argv, exit code
CASES = [
    ("equiv_sliding", ["equiv", "-e1", "(a b)* a", "-e2", "a (b a)*", "--bound", "4"], 0),
    ("equiv_weight", ["equiv", "-e1", "a", "-e2", "a @ {2}", "--semiring", "TROP3", "--bound", "2"], 1),
    ("srp_3_2", ["srp", "--days", "3", "--price", "2"], 0),
    ("srp_2_5", ["srp", "--days", "2", "--price", "5"], 0),
    ("check_trop3", ["check-semiring", "TROP3"], 0),
    ("check_nonintegral", ["check-semiring", str(DATA / "nonintegral.semiring")], 1),
    ("normalize_loop", ["normalize", "-e", "(p a)* ~p", "-e", "a", "--tests", "p",
                        "--semiring", "TROP3"], 0),
    ("interp_pa", ["interp", "-e", "p a", "--tests", "p", "--bound", "2"], 0),
    ("eval_star", ["eval", "--ts", str(DATA / "srp3.ts"), "-e", "a*"], 0),
    ("run_srp", ["run", "--prog", str(DATA / "srp.prog"), "--ts", str(DATA / "srp3.ts")], 0),
    ("cayley_loop", ["cayley-check", "-e", "(p a)* ~p", "--tests", "p", "--bound", "3"], 0),
]


@pytest.mark.parametrize("name,argv,code", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv, code, capsys):
    assert main(argv) == code
    out = capsys.readouterr().out
    assert out == (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")


@pytest.mark.parametrize("argv", [
    ["equiv", "-e1", "a", "-e2", "("],
    ["normalize", "-e", "a", "--semiring", str(DATA / "nonintegral.semiring")],
    ["interp", "-e", "a", "--bound", "12"],
    ["interp", "-e", "a", "--semiring", "NOPE"],
    ["eval", "--ts", str(DATA / "missing.ts"), "-e", "a"],
    ["eval", "--ts", str(DATA / "srp3.ts"), "-e", "c"],
    ["srp", "--days", "0", "--price", "1"],
])
def test_structural_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error")


def test_integrality_diagnostic_names_witness(capsys):
    main(["normalize", "-e", "a", "--semiring", str(DATA / "nonintegral.semiring")])
    err = capsys.readouterr().err
    assert "'2'" in err and "refusing to normalize" in err


def test_usage_errors_exit_2(capsys):
    for argv in (["frobnicate"], ["equiv", "-e1", "a"], ["srp", "--days", "x", "--price", "1"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
    capsys.readouterr()


def test_json_outputs(capsys):
    assert main(["srp", "--days", "3", "--price", "2", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["optimal_cost"] == "2"
    assert main(["equiv", "-e1", "a", "-e2", "a@{2}", "--semiring", "TROP3", "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "Distinguisher" and data["witness"] == "ε a ε"
    assert main(["eval", "--ts", str(DATA / "srp3.ts"), "-e", "p", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["semiring"] == "TROP6" and len(data["entries"]) == 3


def test_selftest_is_deterministic(capsys):
    assert main(["selftest", "--samples", "5", "--seed", "3"]) == 0
    first = capsys.readouterr().out
    main(["selftest", "--samples", "5", "--seed", "3"])
    second = capsys.readouterr().out
    strip = lambda s: [line.rsplit("  ", 1)[0] if line.endswith("s") else line  # noqa: E731
                       for line in s.splitlines()]
    assert strip(first) == strip(second)
    assert all(line.startswith("PASS") for line in first.splitlines())


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "wkat.cli", "srp", "--days", "4", "--price", "3"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("optimal cost: 3")
