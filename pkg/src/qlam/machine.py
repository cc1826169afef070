"""Wave-style token machine over typing derivations.

Each input qubit and each bit constant owns a token.  Tokens walk the B
occurrences of the derivation; the direction of travel is fixed by the
occurrence polarity (negative occurrences move towards the leaves, positive
ones towards the root).  A gate axiom is a synchronization point: its tokens
wait at the argument occurrences until all of them are there, then the gate
is applied to the corresponding register qubits and the tokens continue from
the result occurrences.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import (
    Deadlock,
    InputArityMismatch,
    InternalError,
    OpenTerm,
    StepBudgetExceeded,
)
from .quantum import (
    BUILTINS,
    Register,
    apply_lifted,
    apply_permutation,
    invert_permutation,
    tensor,
)
from .typecheck import (
    A_U,
    A_V,
    E_LOLLI,
    I_LOLLI1,
    I_LOLLI2,
    I_TENSOR,
    LOLLI_L,
    LOLLI_R,
    TENS_L,
    TENS_R,
    Derivation,
    Occurrence,
    bit_leaves,
    bitocc,
    bitval,
    enumerate_occurrences,
    noccs,
    poccs,
)

# ---------------------------------------------------------------------------
# routing


@dataclass(frozen=True)
class Move:
    target: Occurrence


@dataclass(frozen=True)
class SyncInput:
    sync: int
    index: int


@dataclass(frozen=True)
class FinalSlot:
    position: int  # 1-based index into poccs of the conclusion type


Successor = Union[Move, SyncInput, FinalSlot]


@dataclass(frozen=True)
class SyncNode:
    gate: str
    inputs: tuple  # argument occurrences, left to right
    outputs: tuple  # result occurrences, same order


@dataclass
class RoutingGraph:
    successor: dict
    syncs: dict
    occurrence_count: int

    def moved(self, occ: Occurrence, target: Occurrence) -> "RoutingGraph":
        """A copy with one edge redirected (test fixtures only)."""
        succ = dict(self.successor)
        succ[occ] = Move(target)
        return RoutingGraph(succ, self.syncs, self.occurrence_count)


def _successor(d: Derivation, occ: Occurrence) -> Successor:
    node = d.node(occ.node)
    path = occ.path
    if occ.hyp is None:
        if occ.negative:
            # travelling up into the rule that concludes this judgment
            rule = node.rule
            if rule == A_V:
                return Move(Occurrence(node.id, 0, path))
            if rule == A_U:
                return SyncInput(node.id, noccs(node.type).index(path))
            if rule == I_LOLLI1:
                body = node.children[0]
                if path[0] == LOLLI_L:
                    return Move(Occurrence(body.id, len(body.env) - 1, path[1:]))
                return Move(Occurrence(body.id, None, path[1:]))
            if rule == I_LOLLI2:
                body = node.children[0]
                if path[0] == LOLLI_L:
                    hyp = len(body.env) - (2 if path[1] == TENS_L else 1)
                    return Move(Occurrence(body.id, hyp, path[2:]))
                return Move(Occurrence(body.id, None, path[1:]))
            if rule == E_LOLLI:
                return Move(Occurrence(node.children[0].id, None, (LOLLI_R,) + path))
            if rule == I_TENSOR:
                child = node.children[0 if path[0] == TENS_L else 1]
                return Move(Occurrence(child.id, None, path[1:]))
            raise InternalError(f"negative conclusion occurrence at {rule} leaf")
        parent = d.parent(node.id)
        if parent is None:
            return FinalSlot(poccs(node.type).index(path) + 1)
        if parent.rule == E_LOLLI:
            fun, arg = parent.children
            if node is fun:
                if path[0] == LOLLI_L:
                    return Move(Occurrence(arg.id, None, path[1:]))
                return Move(Occurrence(parent.id, None, path[1:]))
            return Move(Occurrence(fun.id, None, (LOLLI_L,) + path))
        if parent.rule == I_TENSOR:
            side = TENS_L if node is parent.children[0] else TENS_R
            return Move(Occurrence(parent.id, None, (side,) + path))
        return Move(Occurrence(parent.id, None, (LOLLI_R,) + path))

    name = node.env[occ.hyp][0]
    if occ.negative:
        if node.rule == A_V:
            return Move(Occurrence(node.id, None, path))
        for child in node.children:
            names = child.env_names()
            if name in names:
                return Move(Occurrence(child.id, names.index(name), path))
        raise InternalError(f"hypothesis {name} not passed to any premise of node {node.id}")
    parent = d.parent(node.id)
    if parent is None:
        raise OpenTerm(f"hypothesis {name} reaches the root")
    if parent.rule == I_LOLLI1 and parent.term.var == name:
        return Move(Occurrence(parent.id, None, (LOLLI_L,) + path))
    if parent.rule == I_LOLLI2 and name in (parent.term.left, parent.term.right):
        side = TENS_L if name == parent.term.left else TENS_R
        return Move(Occurrence(parent.id, None, (LOLLI_L, side) + path))
    return Move(Occurrence(parent.id, parent.env_names().index(name), path))


def build_routing(d: Derivation) -> RoutingGraph:
    occs = enumerate_occurrences(d)
    successor = {}
    for occ in occs:
        if occ.hyp is not None and d.parent(occ.node) is None and not occ.negative:
            continue  # free hypothesis of an open root: no successor
        successor[occ] = _successor(d, occ)
    syncs = {}
    for node in d.nodes():
        if node.rule == A_U:
            syncs[node.id] = SyncNode(
                node.term.name,
                tuple(Occurrence(node.id, None, p) for p in noccs(node.type)),
                tuple(Occurrence(node.id, None, p) for p in poccs(node.type)),
            )
    return RoutingGraph(successor, syncs, len(occs))


# ---------------------------------------------------------------------------
# states and scheduling


@dataclass(frozen=True)
class MachineState:
    slots: tuple  # Occurrence per token; slot i <-> qubit i
    register: Optional[Register]


@dataclass(frozen=True)
class MoveEvent:
    slot: int  # 1-based
    source: Occurrence
    target: Occurrence


@dataclass(frozen=True)
class FireEvent:
    sync: int
    gate: str
    wires: tuple
    moves: tuple  # MoveEvent per token, input order


class Done:
    """Returned by :func:`step` when every token sits at a final occurrence."""

    def __repr__(self):
        return "Done"


DONE = Done()


class CanonicalScheduler:
    """Fire ready gates first, otherwise round-robin over slots."""

    def __init__(self):
        self.cursor = 0

    def choose(self, fires, moves):
        if fires:
            return ("fire", min(fires))
        later = [s for s in moves if s >= self.cursor]
        slot = min(later) if later else min(moves)
        self.cursor = slot + 1
        return ("move", slot)


class RandomScheduler:
    def __init__(self, seed):
        self.rng = random.Random(seed)

    def choose(self, fires, moves):
        options = [("fire", s) for s in sorted(fires)] + [("move", s) for s in sorted(moves)]
        return self.rng.choice(options)


def make_scheduler(kind: str = "canonical", seed: int = 0):
    if kind == "canonical":
        return CanonicalScheduler()
    if kind == "random":
        return RandomScheduler(seed)
    raise ValueError(f"unknown scheduler {kind!r}")


def input_arity(d: Derivation) -> int:
    return len(noccs(d.type))


def initial_state(d: Derivation, inp: Optional[Register]) -> MachineState:
    """Tokens on the negative conclusion atoms, then on the bits by label.

    ``inp=None`` runs the machine symbolically, without a register.
    """
    if d.env:
        raise OpenTerm(f"derivation has free variables {', '.join(d.env_names())}")
    entries = [Occurrence(d.id, None, p) for p in noccs(d.type)]
    if inp is None:
        return MachineState(tuple(entries + bitocc(d)), None)
    if inp.n != len(entries):
        raise InputArityMismatch(len(entries), inp.n)
    return MachineState(tuple(entries + bitocc(d)), tensor(inp, bitval(d)))


def _ready(g: RoutingGraph, slots):
    """Movable slot indices and sync nodes whose inputs are all occupied."""
    moves = []
    waiting: dict[int, dict[int, int]] = {}
    for i, occ in enumerate(slots):
        succ = g.successor[occ]
        if isinstance(succ, Move):
            moves.append(i)
        elif isinstance(succ, SyncInput):
            waiting.setdefault(succ.sync, {})[succ.index] = i
    fires = {s: w for s, w in waiting.items() if len(w) == len(g.syncs[s].inputs)}
    return fires, moves


def is_final(g: RoutingGraph, s: MachineState) -> bool:
    return all(isinstance(g.successor[o], FinalSlot) for o in s.slots)


def step(g: RoutingGraph, s: MachineState, scheduler, gates=BUILTINS):
    """One transition: a token move or a gate firing.

    Returns ``(new_state, event)`` or :data:`DONE`.
    """
    fires, moves = _ready(g, s.slots)
    if not fires and not moves:
        if is_final(g, s):
            return DONE
        raise Deadlock(f"no transition from non-final state {[str(o) for o in s.slots]}")
    kind, which = scheduler.choose(sorted(fires), moves)
    slots = list(s.slots)
    if kind == "move":
        src = slots[which]
        dst = g.successor[src].target
        slots[which] = dst
        return MachineState(tuple(slots), s.register), MoveEvent(which + 1, src, dst)
    sync = g.syncs[which]
    holders = fires[which]
    wires = tuple(holders[k] + 1 for k in range(len(sync.inputs)))
    events = []
    for k, slot in enumerate(wires):
        src = slots[slot - 1]
        slots[slot - 1] = sync.outputs[k]
        events.append(MoveEvent(slot, src, sync.outputs[k]))
    reg = s.register
    if reg is not None:
        reg = apply_lifted(gates[sync.gate], wires, reg)
    return MachineState(tuple(slots), reg), FireEvent(which, sync.gate, wires, tuple(events))


@dataclass
class RunResult:
    register: Optional[Register]  # reordered so qubit j matches poccs(A)[j]
    permutation: tuple  # slot i finishes on output position permutation[i-1]
    trace: list = field(repr=False)
    moves: int  # individual token hops
    steps: int  # machine transitions
    final: MachineState = field(repr=False)
    initial: MachineState = field(repr=False)

    def token_paths(self) -> list[list[Occurrence]]:
        paths = [[o] for o in self.initial.slots]
        for ev in self.trace:
            for mv in (ev.moves if isinstance(ev, FireEvent) else (ev,)):
                paths[mv.slot - 1].append(mv.target)
        return paths

    def fired(self) -> list[tuple]:
        return [(ev.gate, ev.wires) for ev in self.trace if isinstance(ev, FireEvent)]


def run_graph(d: Derivation, g: RoutingGraph, inp: Optional[Register], scheduler=None, gates=BUILTINS) -> RunResult:
    scheduler = scheduler or CanonicalScheduler()
    start = state = initial_state(d, inp)
    budget = g.occurrence_count + 1
    trace = []
    moves = 0
    while True:
        out = step(g, state, scheduler, gates)
        if out is DONE:
            break
        state, event = out
        trace.append(event)
        moves += len(event.moves) if isinstance(event, FireEvent) else 1
        if len(trace) > budget:
            raise StepBudgetExceeded(budget)
    sigma = tuple(g.successor[o].position for o in state.slots)
    reg = state.register
    if reg is not None:
        reg = apply_permutation(invert_permutation(sigma), reg)
    return RunResult(reg, sigma, trace, moves, len(trace), state, start)


def run(d: Derivation, inp: Optional[Register] = None, scheduler=None, gates=BUILTINS) -> RunResult:
    """Compute the function denoted by a closed derivation on ``inp``.

    ``inp`` defaults to the empty register, which is what ground programs
    (no negative atoms in their type) expect.
    """
    if inp is None:
        inp = Register.empty()
    return run_graph(d, build_routing(d), inp, scheduler, gates)


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Circuit:
    qubits: int
    inputs: tuple  # per slot: None for a free input, else the bit value
    gates: tuple  # (name, wires) in firing order
    output_permutation: tuple

    @property
    def free_inputs(self) -> int:
        return sum(1 for x in self.inputs if x is None)

    def to_json(self) -> dict:
        return {
            "qubits": self.qubits,
            "inputs": [
                {"slot": i, "kind": "free" if v is None else "bit", "value": v}
                for i, v in enumerate(self.inputs, start=1)
            ],
            "gates": [{"name": name, "wires": list(wires)} for name, wires in self.gates],
            "output_order": list(self.output_permutation),
        }

    def to_text(self) -> str:
        return "\n".join(f"{name} {' '.join(map(str, wires))}" for name, wires in self.gates)


def extract_circuit(d: Derivation, scheduler=None) -> Circuit:
    """Run the machine without a register and record the gates it fires."""
    g = build_routing(d)
    result = run_graph(d, g, None, scheduler)
    inputs = [None] * len(noccs(d.type)) + [leaf.term.value for leaf in bit_leaves(d)]
    return Circuit(len(inputs), tuple(inputs), tuple(result.fired()), result.permutation)


def eval_circuit(c: Circuit, inp: Register, gates=BUILTINS) -> Register:
    if inp.n != c.free_inputs:
        raise InputArityMismatch(c.free_inputs, inp.n)
    reg = tensor(inp, Register.basis([v for v in c.inputs if v is not None]))
    for name, wires in c.gates:
        reg = apply_lifted(gates[name], wires, reg)
    return apply_permutation(invert_permutation(c.output_permutation), reg)
