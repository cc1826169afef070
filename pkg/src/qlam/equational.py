"""Superposed derivations and the oriented equational theory.

The axioms beta, beta.pair and quant are applied left to right, one redex per
summand per round, under any term context.  A summand is stored as its term;
the matching derivation is re-derived on demand.  Derivations are syntax
directed, so this is the same derivation the substitution lemma would build.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IllTypedRedex, NotGroundNormalForm, StepLimitExceeded
from .quantum import BUILTINS, Register, format_register
from .syntax import (
    App,
    Bit,
    Gate,
    LamPair,
    LamVar,
    Tensor,
    Term,
    Var,
    bits_of,
    free_vars,
    pretty,
)
from .typecheck import typecheck

PRUNE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Summand:
    coeff: complex
    term: Term
    env: tuple = ()

    @cached_property
    def derivation(self):
        return typecheck(self.env, self.term)


@dataclass(frozen=True, eq=False)
class SuperposedTerm:
    """A formal weighted sum of derivations sharing environment and type."""

    summands: tuple
    env: tuple
    type: object

    @classmethod
    def of(cls, t: Term, env=(), gates=BUILTINS) -> "SuperposedTerm":
        d = typecheck(env, t, gates)
        s = Summand(1.0 + 0j, t, d.env)
        s.__dict__["derivation"] = d
        return cls((s,), d.env, d.type)

    def __iter__(self):
        return iter(self.summands)

    def __len__(self):
        return len(self.summands)

    def squared_norm(self) -> float:
        return float(sum(abs(s.coeff) ** 2 for s in self.summands))

    def __str__(self):
        return format_superposed(self)


class NormalForm:
    def __repr__(self):
        return "NormalForm"


NORMAL_FORM = NormalForm()


# ---------------------------------------------------------------------------
# substitution


def _all_names(t: Term) -> set:
    names = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            names.add(s.name)
        elif isinstance(s, LamVar):
            names.add(s.var)
            stack.append(s.body)
        elif isinstance(s, LamPair):
            names.update((s.left, s.right))
            stack.append(s.body)
        elif isinstance(s, (App, Tensor)):
            stack.extend((s.left, s.right) if isinstance(s, Tensor) else (s.fun, s.arg))
    return names


def _fresh(base: str, avoid: set) -> str:
    for k in itertools.count(1):
        name = f"{base.rstrip('0123456789')}{k}"
        if name not in avoid:
            return name


def substitute(t: Term, mapping: dict) -> Term:
    """Capture-avoiding simultaneous substitution of terms for variables."""
    if not mapping:
        return t
    danger = set()
    for n in mapping.values():
        danger |= set(free_vars(n))
    avoid = danger | _all_names(t) | set(mapping)
    for n in mapping.values():
        avoid |= _all_names(n)

    def go(s, m):
        if isinstance(s, Var):
            return m.get(s.name, s)
        if isinstance(s, (Bit, Gate)):
            return s
        if isinstance(s, Tensor):
            return Tensor(go(s.left, m), go(s.right, m))
        if isinstance(s, App):
            return App(go(s.fun, m), go(s.arg, m))
        binders = [s.var] if isinstance(s, LamVar) else [s.left, s.right]
        m = {k: v for k, v in m.items() if k not in binders}
        renamed = []
        for b in binders:
            if b in danger and m:
                new = _fresh(b, avoid)
                avoid.add(new)
                m[b] = Var(new)
                renamed.append(new)
            else:
                renamed.append(b)
        body = go(s.body, m) if m else s.body
        if isinstance(s, LamVar):
            return LamVar(renamed[0], body)
        return LamPair(renamed[0], renamed[1], body)

    return go(t, dict(mapping))


# ---------------------------------------------------------------------------
# redexes


def bit_tuple(t: Term):
    """The bits of a right-nested literal tuple ``|b1> * (|b2> * ...)``, else None."""
    out = []
    while isinstance(t, Tensor):
        if not isinstance(t.left, Bit):
            return None
        out.append(t.left)
        t = t.right
    if not isinstance(t, Bit):
        return None
    out.append(t)
    return out


def redex_kind(t: Term, gates=BUILTINS):
    if not isinstance(t, App):
        return None
    if isinstance(t.fun, LamVar):
        return "beta"
    if isinstance(t.fun, LamPair) and isinstance(t.arg, Tensor):
        return "beta.pair"
    if isinstance(t.fun, Gate):
        bits = bit_tuple(t.arg)
        if bits is not None and len(bits) == gates[t.fun.name].arity:
            return "quant"
    return None


def _kids(t):
    if isinstance(t, Tensor):
        return (t.left, t.right)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, (LamVar, LamPair)):
        return (t.body,)
    return ()


def find_redex(t: Term, strategy: str = "leftmost", gates=BUILTINS):
    """Path (child indices) to the leftmost- or rightmost-innermost redex, or None."""
    kids = _kids(t)
    order = range(len(kids)) if strategy == "leftmost" else reversed(range(len(kids)))
    for i in order:
        p = find_redex(kids[i], strategy, gates)
        if p is not None:
            return (i,) + p
    return () if redex_kind(t, gates) else None


def _get(t, path):
    for i in path:
        t = _kids(t)[i]
    return t


def _replace(t, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, Tensor):
        return Tensor(_replace(t.left, rest, new), t.right) if i == 0 else Tensor(t.left, _replace(t.right, rest, new))
    if isinstance(t, App):
        return App(_replace(t.fun, rest, new), t.arg) if i == 0 else App(t.fun, _replace(t.arg, rest, new))
    if isinstance(t, LamVar):
        return LamVar(t.var, _replace(t.body, rest, new))
    return LamPair(t.left, t.right, _replace(t.body, rest, new))


def fire(term: Term, path, gates=BUILTINS) -> list[tuple[complex, Term]]:
    """Fire the redex at ``path`` inside ``term``; returns weighted reducts."""
    r = _get(term, path)
    kind = redex_kind(r, gates)
    if kind == "beta":
        return [(1.0, _replace(term, path, substitute(r.fun.body, {r.fun.var: r.arg})))]
    if kind == "beta.pair":
        lam = r.fun
        body = substitute(lam.body, {lam.left: r.arg.left, lam.right: r.arg.right})
        return [(1.0, _replace(term, path, body))]
    if kind == "quant":
        bits = bit_tuple(r.arg)
        gate = gates[r.fun.name]
        vec = np.zeros(1 << gate.arity, dtype=np.complex128)
        vec[int("".join(str(b.value) for b in bits), 2)] = 1
        vec = gate.matrix @ vec
        top = max((b.label for b in bits_of(term)), default=0)
        out = []
        for idx, amp in enumerate(vec):
            if abs(amp) <= PRUNE_TOL:
                continue
            values = format(idx, f"0{gate.arity}b")
            new = _tuple([Bit(int(v), top + k + 1) for k, v in enumerate(values)])
            out.append((complex(amp), _replace(term, path, new)))
        return out
    raise IllTypedRedex(f"no redex at {path} in {pretty(term)}")


def _tuple(bits):
    t = bits[-1]
    for b in reversed(bits[:-1]):
        t = Tensor(b, t)
    return t


def shape_key(t: Term):
    """Structural key ignoring bit labels and bound variable names."""

    def go(s, scope):
        if isinstance(s, Var):
            return ("v", scope.get(s.name, s.name))
        if isinstance(s, Bit):
            return ("b", s.value)
        if isinstance(s, Gate):
            return ("g", s.name)
        if isinstance(s, Tensor):
            return ("t", go(s.left, scope), go(s.right, scope))
        if isinstance(s, App):
            return ("a", go(s.fun, scope), go(s.arg, scope))
        depth = len(scope)
        if isinstance(s, LamVar):
            return ("l", go(s.body, {**scope, s.var: depth}))
        return ("p", go(s.body, {**scope, s.left: depth, s.right: depth + 1}))

    return go(t, {})


def _merge(env, weighted) -> tuple:
    merged: dict = {}
    for c, t in weighted:
        key = shape_key(t)
        if key in merged:
            c0, t0 = merged[key]
            merged[key] = (c0 + c, t0)
        else:
            merged[key] = (c, t)
    return tuple(Summand(c, t, env) for c, t in merged.values() if abs(c) > PRUNE_TOL)


def reduce_once(s: SuperposedTerm, strategy: str = "leftmost", gates=BUILTINS):
    """Fire one innermost redex in every summand that has one."""
    out = []
    fired = False
    for summand in s:
        path = find_redex(summand.term, strategy, gates)
        if path is None:
            out.append((summand.coeff, summand.term))
            continue
        fired = True
        for k, t in fire(summand.term, path, gates):
            out.append((summand.coeff * k, t))
    if not fired:
        return NORMAL_FORM
    return SuperposedTerm(_merge(s.env, out), s.env, s.type)


def normalize(s: SuperposedTerm, max_steps: int = 10_000, strategy: str = "leftmost",
              gates=BUILTINS, on_step=None) -> SuperposedTerm:
    for _ in range(max_steps):
        nxt = reduce_once(s, strategy, gates)
        if nxt is NORMAL_FORM:
            return s
        s = nxt
        if on_step is not None:
            on_step(s)
    if reduce_once(s, strategy, gates) is NORMAL_FORM:
        return s
    raise StepLimitExceeded(max_steps)


# ---------------------------------------------------------------------------
# amplitude read-out


@dataclass(frozen=True)
class AmplitudeVector:
    n: int
    coefficients: dict  # bit string -> complex

    def to_register(self) -> Register:
        amps = np.zeros(1 << self.n, dtype=np.complex128)
        for bits, c in self.coefficients.items():
            amps[int(bits, 2) if bits else 0] += c
        return Register(self.n, amps)


def _flatten_bits(t):
    if isinstance(t, Bit):
        return [t.value]
    if isinstance(t, Tensor):
        left, right = _flatten_bits(t.left), _flatten_bits(t.right)
        if left is None or right is None:
            return None
        return left + right
    return None


def to_amplitude_vector(s: SuperposedTerm) -> AmplitudeVector:
    """Read coefficients of a ground normal form, bits taken left to right."""
    if s.env:
        raise NotGroundNormalForm("superposed term is open")
    coeffs: dict[str, complex] = {}
    n = None
    for summand in s:
        bits = _flatten_bits(summand.term)
        if bits is None:
            raise NotGroundNormalForm(f"summand {pretty(summand.term)} is not a tuple of bits")
        key = "".join(map(str, bits))
        if n is None:
            n = len(key)
        coeffs[key] = coeffs.get(key, 0) + summand.coeff
    if n is None:
        raise NotGroundNormalForm("empty sum")
    return AmplitudeVector(n, coeffs)


def _format_coeff(c: complex, precision: int) -> str:
    reg = Register(0, np.array([c]))
    text = format_register(reg, precision)
    return text[:-2] if text.endswith("|>") else text


def format_superposed(s: SuperposedTerm, precision: int = 6) -> str:
    """Ground normal forms in register notation, anything else as a weighted sum."""
    try:
        vec = to_amplitude_vector(s)
        amps = vec.to_register().amplitudes
        if abs(np.linalg.norm(amps) - 1) < 1e-9:
            return format_register(vec.to_register(), precision)
    except NotGroundNormalForm:
        pass
    parts = []
    for summand in s:
        c = summand.coeff
        body = pretty(summand.term)
        if abs(c - 1) <= 1e-12:
            parts.append(body)
        else:
            parts.append(f"{_format_coeff(c, precision) or '1'} * [{body}]")
    return " + ".join(parts)
