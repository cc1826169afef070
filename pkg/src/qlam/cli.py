"""``qlam`` command line: check, run, circuit, eval and mll subcommands."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import equational, machine, mll
from .errors import InputArityMismatch, InternalError, QlamError, UserError
from .machine import input_arity
from .quantum import BUILTINS, Register, format_register, load_gate_file, parse_register
from .syntax import read_source
from .typecheck import format_derivation, typecheck


def _complex_json(c: complex):
    return [float(c.real), float(c.imag)]


def _register_json(r: Register) -> dict:
    return {"qubits": r.n, "amplitudes": {k: _complex_json(v) for k, v in r.as_dict().items()}}


def _gates(args):
    path = args.gates or os.environ.get("QLAM_GATES")
    return load_gate_file(path) if path else BUILTINS


def _derivation(args):
    gates = _gates(args)
    return typecheck((), read_source(args.file), gates), gates


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif text:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args):
    d, _ = _derivation(args)
    _emit(args, {"type": str(d.type), "derivation": d.to_dict()}, format_derivation(d))


def _input_register(args, d):
    if args.input is None:
        return Register.empty() if input_arity(d) == 0 else None
    return parse_register(args.input)


def _event_text(ev):
    if isinstance(ev, machine.FireEvent):
        wires = ",".join(map(str, ev.wires))
        return f"fire {ev.gate}^{{{wires}}} at node {ev.sync}"
    return f"move {ev.slot}: {ev.source} -> {ev.target}"


def _event_json(ev):
    if isinstance(ev, machine.FireEvent):
        return {"kind": "fire", "gate": ev.gate, "node": ev.sync, "wires": list(ev.wires)}
    return {"kind": "move", "slot": ev.slot, "from": str(ev.source), "to": str(ev.target)}


def cmd_run(args):
    d, gates = _derivation(args)
    inp = _input_register(args, d)
    if inp is None:
        raise InputArityMismatch(input_arity(d), 0)
    sched = machine.make_scheduler(args.schedule, args.seed)
    res = machine.run(d, inp, sched, gates)
    payload = {
        "register": _register_json(res.register),
        "output_permutation": list(res.permutation),
        "steps": res.steps,
        "moves": res.moves,
    }
    if args.trace:
        payload["trace"] = [_event_json(ev) for ev in res.trace]
    lines = [_event_text(ev) for ev in res.trace] if args.trace else []
    lines.append(format_register(res.register, args.precision))
    _emit(args, payload, "\n".join(lines))


def cmd_circuit(args):
    d, _ = _derivation(args)
    c = machine.extract_circuit(d)
    if args.format == "text" and not args.json:
        text = c.to_text()
        if text:
            print(text)
    else:
        print(json.dumps(c.to_json(), indent=2, sort_keys=True))


def cmd_eval(args):
    d, gates = _derivation(args)
    s = equational.SuperposedTerm.of(d.term, gates=gates)
    steps = []
    on_step = steps.append if args.show_steps else None
    nf = equational.normalize(s, args.max_steps, gates=gates, on_step=on_step)
    if args.json:
        payload = {"summands": len(nf)}
        try:
            payload["register"] = _register_json(equational.to_amplitude_vector(nf).to_register())
        except QlamError:
            payload["terms"] = [[_complex_json(x.coeff), str(x.term)] for x in nf]
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    for k, s in enumerate(steps, start=1):
        print(f"[{k}] {equational.format_superposed(s, args.precision)}")
    print(equational.format_superposed(nf, args.precision))


def cmd_mll(args):
    d, _ = _derivation(args)
    tr = mll.translate_derivation(d)
    mll.check_proof(tr.proof)
    if args.json:
        payload = {
            "sequent": tr.proof.sequent(),
            "nodes": tr.proof.node_count(),
            "axioms": tr.proof.count(mll.AX),
            "cuts": tr.proof.count(mll.CUT),
            "atoms": tr.proof.atom_count(),
        }
        if args.trace:
            payload["runs"] = [[str(o) for o in tr.machine.run(s)] for s in tr.machine.initial()]
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    print(mll.format_proof(tr.proof))
    if args.trace:
        for s in tr.machine.initial():
            print(" -> ".join(str(o) for o in tr.machine.run(s)) + " -> exit")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlam", description="Linear quantum lambda calculus toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="source file (.qlam)")
    common.add_argument("--gates", help="JSON gate library merged with the built-ins (default: $QLAM_GATES)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--precision", type=int, default=6, help="digits for amplitudes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="type-check and print the derivation")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", parents=[common], help="run the token machine")
    p.add_argument("--input", help="input register, e.g. '|01>' or '1/sqrt(2)|0> + 1/sqrt(2)|1>'")
    p.add_argument("--trace", action="store_true", help="print every machine transition")
    p.add_argument("--schedule", choices=("canonical", "random"), default="canonical")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("circuit", parents=[common], help="extract the circuit")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("eval", parents=[common], help="normalize with the equational theory")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--show-steps", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mll", parents=[common], help="print the canonical MLL proof")
    p.add_argument("--trace", action="store_true", help="single-token runs from each initial occurrence")
    p.set_defaults(func=cmd_mll)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UserError as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return 1
    except InternalError as e:
        print(f"internal error [{e.code}]: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
