import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qlam.cli import main
from qlam.generate import generate_term
from qlam.quantum import parse_register
from qlam.syntax import pretty

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def prog(name):
    return str(PROGRAMS / name)


def test_run_epr_applied(capsys):
    assert main(["run", prog("epr_applied.qlam")]) == 0
    assert capsys.readouterr().out.strip() == "1/sqrt(2)|01> + 1/sqrt(2)|10>"


def test_check_nonlinear_exits_one(capsys):
    assert main(["check", prog("nonlinear.qlam")]) == 1
    assert "variable x used twice" in capsys.readouterr().err


def test_circuit_text(capsys):
    assert main(["circuit", prog("epr.qlam"), "--format", "text"]) == 0
    assert capsys.readouterr().out == "H 1\nCNOT 1 2\n"


def test_circuit_json_is_stable(capsys):
    main(["circuit", prog("epr.qlam")])
    first = capsys.readouterr().out
    main(["circuit", prog("epr.qlam")])
    assert capsys.readouterr().out == first
    data = json.loads(first)
    assert data["gates"] == [{"name": "H", "wires": [1]}, {"name": "CNOT", "wires": [1, 2]}]


def test_run_with_input_and_trace(capsys):
    assert main(["run", prog("epr.qlam"), "--input", "|11>", "--trace"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "1/sqrt(2)|01> - 1/sqrt(2)|10>"
    fires = [ln for ln in lines if ln.startswith("fire")]
    assert fires[0].startswith("fire H^{1}") and fires[1].startswith("fire CNOT^{1,2}")


def test_run_json_random_schedule(capsys):
    assert main(["run", prog("epr.qlam"), "--input", "|00>", "--json", "--schedule", "random", "--seed", "5"]) == 0
    data = json.loads(capsys.readouterr().out)
    amps = {k: complex(*v) for k, v in data["register"]["amplitudes"].items()}
    assert amps.keys() == {"00", "11"}
    assert data["output_permutation"] == [1, 2]


def test_missing_input_is_a_user_error(capsys):
    assert main(["run", prog("epr.qlam")]) == 1
    assert "InputArityMismatch" in capsys.readouterr().err


def test_eval_show_steps(capsys):
    assert main(["eval", prog("epr_applied.qlam"), "--show-steps"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "1/sqrt(2)|01> + 1/sqrt(2)|10>"
    assert lines[0].startswith("[1]")


def test_eval_step_limit_is_internal_error(capsys):
    assert main(["eval", prog("epr_applied.qlam"), "--max-steps", "1"]) == 2


def test_user_gate_library(capsys):
    assert main(["run", prog("sqrt_not.qlam"), "--gates", prog("sqrt_not.json")]) == 0
    assert capsys.readouterr().out.strip() == "|1>"


def test_gate_library_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QLAM_GATES", prog("sqrt_not.json"))
    assert main(["eval", prog("sqrt_not.qlam")]) == 0
    assert capsys.readouterr().out.strip() == "|1>"


def test_check_json(capsys):
    assert main(["check", prog("epr.qlam"), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["type"] == "B * B -o B * B"
    assert data["derivation"]["rule"] == "I_lolli2"


def test_mll_trace(capsys):
    assert main(["mll", prog("epr.qlam"), "--trace"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[")
    assert out.count("-> exit") == 2


def test_missing_file(capsys):
    assert main(["check", prog("no_such_file.qlam")]) == 1


def test_syntax_error(tmp_path, capsys):
    f = tmp_path / "bad.qlam"
    f.write_text("\\x. (x")
    assert main(["check", str(f)]) == 1
    assert "SyntaxError" in capsys.readouterr().err


@pytest.mark.parametrize("seed", range(15))
def test_run_and_eval_agree(tmp_path, capsys, seed):
    f = tmp_path / "t.qlam"
    f.write_text(pretty(generate_term(seed, 6, 4)))
    main(["run", str(f), "--precision", "12"])
    ran = parse_register(capsys.readouterr().out.strip())
    main(["eval", str(f), "--precision", "12"])
    ev = parse_register(capsys.readouterr().out.strip())
    assert np.max(np.abs(ran.amplitudes - ev.amplitudes)) <= 1e-6


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "qlam", "run", prog("epr_applied.qlam")],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "1/sqrt(2)|01> + 1/sqrt(2)|10>"
