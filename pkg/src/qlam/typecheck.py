"""Linear type inference producing explicit derivation trees, plus the
occurrence machinery (polarities, positive/negative atom lists, bit
occurrences) that the token machine runs on.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import (
    NonFunctionApplied,
    PairPatternOnNonTensor,
    TypeMismatch,
    UnboundVariable,
    UnknownGate,
    VariableUnused,
    VariableUsedTwice,
)
from .quantum import BUILTINS, Register
from .syntax import (
    QUBIT,
    App,
    Bit,
    Gate,
    LamPair,
    LamVar,
    Lolli,
    Qubit,
    Tensor,
    TensorT,
    Term,
    Type,
    Var,
    gate_type,
    pretty,
)

A_V, A_Q0, A_Q1, A_U = "a_v", "a_q0", "a_q1", "a_U"
I_LOLLI1, I_LOLLI2, E_LOLLI, I_TENSOR = "I_lolli1", "I_lolli2", "E_lolli", "I_tensor"
RULES = (A_V, A_Q0, A_Q1, A_U, I_LOLLI1, I_LOLLI2, E_LOLLI, I_TENSOR)

LOLLI_L, LOLLI_R, TENS_L, TENS_R = "lolli_l", "lolli_r", "tens_l", "tens_r"

Env = tuple  # of (name, Type) pairs, names distinct


@dataclass(frozen=True, eq=False)
class Derivation:
    """One rule instance; ``id`` is the pre-order index within its tree."""

    id: int
    rule: str
    env: Env
    term: Term
    type: Type
    children: tuple = ()

    def nodes(self) -> list["Derivation"]:
        return _index(self).nodes

    def node(self, node_id: int) -> "Derivation":
        return _index(self).nodes[node_id - self.id]

    def parent(self, node_id: int) -> Optional["Derivation"]:
        """Parent within the subtree rooted here (None for this node)."""
        p = _index(self).parent[node_id - self.id]
        return None if p is None else _index(self).nodes[p - self.id]

    def env_names(self) -> list[str]:
        return [name for name, _ in self.env]

    def judgment(self) -> str:
        env = ", ".join(f"{x}:{a}" for x, a in self.env)
        return f"{env} |- {pretty(self.term)} : {self.type}".lstrip()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "rule": self.rule,
            "env": [[x, str(a)] for x, a in self.env],
            "term": pretty(self.term),
            "type": str(self.type),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class _Index:
    nodes: list
    parent: list


@functools.lru_cache(maxsize=256)
def _index(root: Derivation) -> _Index:
    nodes, parent = [], []
    stack = [(root, None)]
    while stack:
        node, par = stack.pop()
        assert node.id == root.id + len(nodes), "derivation ids must be pre-order"
        nodes.append(node)
        parent.append(par)
        for child in reversed(node.children):
            stack.append((child, node.id))
    return _Index(nodes, parent)


def format_derivation(d: Derivation) -> str:
    lines = []

    def go(node, depth):
        lines.append(f"{'  ' * depth}[{node.id}] ({node.rule}) {node.judgment()}")
        for c in node.children:
            go(c, depth + 1)

    go(d, 0)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# inference


class _Meta:
    __slots__ = ("id",)

    def __init__(self, id):
        self.id = id

    def __repr__(self):
        return f"?{self.id}"


class _UnifyError(Exception):
    pass


class _Inference:
    def __init__(self, arities):
        self.arities = arities
        self.subst: dict[int, object] = {}
        self.counter = itertools.count()

    def fresh(self):
        return _Meta(next(self.counter))

    def resolve(self, t):
        while isinstance(t, _Meta) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def zonk(self, t, default=None):
        t = self.resolve(t)
        if isinstance(t, _Meta):
            return t if default is None else default
        if isinstance(t, Lolli):
            return Lolli(self.zonk(t.dom, default), self.zonk(t.cod, default))
        if isinstance(t, TensorT):
            return TensorT(self.zonk(t.left, default), self.zonk(t.right, default))
        return t

    def occurs(self, meta, t):
        t = self.resolve(t)
        if isinstance(t, _Meta):
            return t.id == meta.id
        if isinstance(t, Lolli):
            return self.occurs(meta, t.dom) or self.occurs(meta, t.cod)
        if isinstance(t, TensorT):
            return self.occurs(meta, t.left) or self.occurs(meta, t.right)
        return False

    def unify(self, a, b):
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, _Meta) and isinstance(b, _Meta) and a.id == b.id:
            return
        if isinstance(a, _Meta):
            if self.occurs(a, b):
                raise _UnifyError
            self.subst[a.id] = b
        elif isinstance(b, _Meta):
            self.unify(b, a)
        elif isinstance(a, Qubit) and isinstance(b, Qubit):
            return
        elif isinstance(a, Lolli) and isinstance(b, Lolli):
            self.unify(a.dom, b.dom)
            self.unify(a.cod, b.cod)
        elif isinstance(a, TensorT) and isinstance(b, TensorT):
            self.unify(a.left, b.left)
            self.unify(a.right, b.right)
        else:
            raise _UnifyError

    def show(self, t):
        return self.zonk(t)

    # returns (rule, term, type, children, used) with ``used`` the free
    # variables of ``term`` in first-occurrence order
    def infer(self, t: Term, scope: dict):
        if isinstance(t, Var):
            if t.name not in scope:
                raise UnboundVariable(t.name)
            return (A_V, t, scope[t.name], (), [t.name])
        if isinstance(t, Bit):
            return (A_Q1 if t.value else A_Q0, t, QUBIT, (), [])
        if isinstance(t, Gate):
            if t.name not in self.arities:
                raise UnknownGate(t.name)
            return (A_U, t, gate_type(self.arities[t.name]), (), [])
        if isinstance(t, Tensor):
            left = self.infer(t.left, scope)
            right = self.infer(t.right, scope)
            used = _disjoint_union(left[4], right[4])
            return (I_TENSOR, t, TensorT(left[2], right[2]), (left, right), used)
        if isinstance(t, App):
            fun = self.infer(t.fun, scope)
            arg = self.infer(t.arg, scope)
            used = _disjoint_union(fun[4], arg[4])
            ftype = self.resolve(fun[2])
            if isinstance(ftype, (Qubit, TensorT)):
                raise NonFunctionApplied(self.show(ftype))
            if isinstance(ftype, _Meta):
                dom, cod = self.fresh(), self.fresh()
                self.unify(ftype, Lolli(dom, cod))
                ftype = self.resolve(ftype)
            try:
                self.unify(ftype.dom, arg[2])
            except _UnifyError:
                dom, found = self.show(ftype.dom), self.show(arg[2])
                if isinstance(t.fun, LamPair) and not isinstance(self.resolve(arg[2]), (TensorT, _Meta)):
                    raise PairPatternOnNonTensor(found) from None
                raise TypeMismatch(dom, found) from None
            return (E_LOLLI, t, ftype.cod, (fun, arg), used)
        if isinstance(t, LamVar):
            dom = self.fresh()
            body = self.infer(t.body, {**scope, t.var: dom})
            used = _bind(body[4], [t.var])
            return (I_LOLLI1, t, Lolli(dom, body[2]), (body,), used)
        if isinstance(t, LamPair):
            a, b = self.fresh(), self.fresh()
            body = self.infer(t.body, {**scope, t.left: a, t.right: b})
            used = _bind(body[4], [t.left, t.right])
            return (I_LOLLI2, t, Lolli(TensorT(a, b), body[2]), (body,), used)
        raise TypeError(f"not a term: {t!r}")


def _disjoint_union(xs, ys):
    dup = set(xs) & set(ys)
    if dup:
        raise VariableUsedTwice(min(dup))
    return xs + ys


def _bind(used, names):
    for name in names:
        if name not in used:
            raise VariableUnused(name)
    return [x for x in used if x not in names]


def typecheck(env, t: Term, gates=None) -> Derivation:
    """Infer the unique derivation of ``env |- t : A``.

    ``env`` is a sequence of ``(name, Type)`` pairs; every variable must be
    used exactly once.  Type variables left unconstrained by the term (as in
    ``\\x. x``) default to ``B``, the only ground type.
    """
    env = tuple((name, a) for name, a in env)
    names = [name for name, _ in env]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise VariableUsedTwice(dup)
    arities = (gates if gates is not None else BUILTINS)
    arities = arities.arities() if hasattr(arities, "arities") else dict(arities)
    inf = _Inference(arities)
    proto = inf.infer(t, dict(env))
    for name in names:
        if name not in proto[4]:
            raise VariableUnused(name)

    counter = itertools.count()

    def build(p, node_env):
        rule, term, typ, kids, _ = p
        node_id = next(counter)
        typ = inf.zonk(typ, QUBIT)
        built = []
        if rule in (I_TENSOR, E_LOLLI):
            for kid in kids:
                used = set(kid[4])
                built.append(build(kid, tuple((x, a) for x, a in node_env if x in used)))
        elif rule == I_LOLLI1:
            (body,) = kids
            x_type = inf.zonk(typ.dom, QUBIT)
            built.append(build(body, node_env + ((term.var, x_type),)))
        elif rule == I_LOLLI2:
            (body,) = kids
            built.append(build(body, node_env + ((term.left, typ.dom.left), (term.right, typ.dom.right))))
        return Derivation(node_id, rule, node_env, term, typ, tuple(built))

    order = {name: i for i, name in enumerate(names)}
    root_env = tuple(sorted(((x, inf.zonk(a, QUBIT)) for x, a in env), key=lambda p: order[p[0]]))
    return build(proto, root_env)


def infer_type(t: Term, gates=None) -> Type:
    return typecheck((), t, gates).type


# ---------------------------------------------------------------------------
# occurrences


@dataclass(frozen=True, order=True)
class Occurrence:
    """An atom ``B`` inside a judgment of a derivation.

    ``hyp`` is the index of the hypothesis in the node's environment, or None
    for the conclusion.  ``path`` descends through the type to the atom.
    """

    node: int
    hyp: Optional[int]
    path: tuple

    @property
    def negative(self) -> bool:
        flips = sum(1 for step in self.path if step == LOLLI_L) + (self.hyp is not None)
        return flips % 2 == 1

    @property
    def polarity(self) -> str:
        return "-" if self.negative else "+"

    def __str__(self):
        slot = "C" if self.hyp is None else f"H{self.hyp}"
        return f"{self.node}:{slot}:{'.'.join(self.path) or '.'}"


def subtype(a: Type, path) -> Type:
    for step in path:
        if step in (LOLLI_L, LOLLI_R):
            if not isinstance(a, Lolli):
                raise ValueError(f"path step {step} into {a}")
            a = a.dom if step == LOLLI_L else a.cod
        else:
            if not isinstance(a, TensorT):
                raise ValueError(f"path step {step} into {a}")
            a = a.left if step == TENS_L else a.right
    return a


def atom_paths(a: Type) -> list[tuple]:
    """All B positions of ``a``, left to right."""
    if isinstance(a, Qubit):
        return [()]
    if isinstance(a, Lolli):
        return [(LOLLI_L,) + p for p in atom_paths(a.dom)] + [(LOLLI_R,) + p for p in atom_paths(a.cod)]
    return [(TENS_L,) + p for p in atom_paths(a.left)] + [(TENS_R,) + p for p in atom_paths(a.right)]


def poccs(a: Type) -> list[tuple]:
    if isinstance(a, Qubit):
        return [()]
    if isinstance(a, TensorT):
        return [(TENS_L,) + p for p in poccs(a.left)] + [(TENS_R,) + p for p in poccs(a.right)]
    return [(LOLLI_L,) + p for p in noccs(a.dom)] + [(LOLLI_R,) + p for p in poccs(a.cod)]


def noccs(a: Type) -> list[tuple]:
    if isinstance(a, Qubit):
        return []
    if isinstance(a, TensorT):
        return [(TENS_L,) + p for p in noccs(a.left)] + [(TENS_R,) + p for p in noccs(a.right)]
    return [(LOLLI_L,) + p for p in poccs(a.dom)] + [(LOLLI_R,) + p for p in noccs(a.cod)]


def format_path(a: Type, path) -> str:
    """Show the type with ``[.]`` at the position ``path`` points to."""
    if not path:
        return "[.]"
    step, rest = path[0], path[1:]
    if step in (LOLLI_L, LOLLI_R):
        dom = format_path(a.dom, rest) if step == LOLLI_L else str(a.dom)
        cod = format_path(a.cod, rest) if step == LOLLI_R else str(a.cod)
        return f"({dom} -o {cod})"
    left = format_path(a.left, rest) if step == TENS_L else str(a.left)
    right = format_path(a.right, rest) if step == TENS_R else str(a.right)
    return f"({left} * {right})"


def bit_leaves(d: Derivation) -> list[Derivation]:
    """The a_q0/a_q1 leaves of ``d`` sorted by bit label."""
    leaves = [n for n in d.nodes() if n.rule in (A_Q0, A_Q1)]
    return sorted(leaves, key=lambda n: n.term.label)


def bitocc(d: Derivation) -> list[Occurrence]:
    return [Occurrence(n.id, None, ()) for n in bit_leaves(d)]


def bitval(d: Derivation) -> Register:
    return Register.basis([n.term.value for n in bit_leaves(d)])


def enumerate_occurrences(d: Derivation) -> list[Occurrence]:
    """Every B of every judgment: pre-order nodes, hypotheses before conclusion."""
    out = []
    for node in d.nodes():
        for i, (_, a) in enumerate(node.env):
            out.extend(Occurrence(node.id, i, p) for p in atom_paths(a))
        out.extend(Occurrence(node.id, None, p) for p in atom_paths(node.type))
    return out


def occurrence_type(d: Derivation, occ: Occurrence) -> Type:
    node = d.node(occ.node)
    base = node.type if occ.hyp is None else node.env[occ.hyp][1]
    return base
