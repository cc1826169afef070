"""Abstract and concrete syntax of QLambda terms and types.

Concrete grammar::

    term   ::= lam | tensor
    lam    ::= '\\' x '.' term | '\\' '<' x ',' y '>' '.' term
    tensor ::= app ['*' (lam | tensor)]          -- right associative
    app    ::= atom {atom} [lam]                 -- left associative
    atom   ::= var | Gate | '|0>' ['_' n] | '|1>' ['_' n] | '(' term ')'

Variables start with a lowercase letter or underscore, gate symbols with an
uppercase letter, so a variable can never shadow a gate.  ``--`` starts a line
comment.  ``λ`` and ``⊗`` are accepted as synonyms for ``\\`` and ``*``.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import DuplicateBitLabel, ParseError

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Qubit:
    def __str__(self):
        return "B"


@dataclass(frozen=True)
class Lolli:
    dom: "Type"
    cod: "Type"

    def __str__(self):
        left = f"({self.dom})" if isinstance(self.dom, Lolli) else str(self.dom)
        return f"{left} -o {self.cod}"


@dataclass(frozen=True)
class TensorT:
    left: "Type"
    right: "Type"

    def __str__(self):
        left = f"({self.left})" if not isinstance(self.left, Qubit) else str(self.left)
        right = f"({self.right})" if isinstance(self.right, Lolli) else str(self.right)
        return f"{left} * {right}"


Type = Union[Qubit, Lolli, TensorT]

QUBIT = Qubit()


def qubits(n: int) -> Type:
    """The right-nested tensor power ``B * (B * ... B)`` with ``n >= 1`` factors."""
    if n < 1:
        raise ValueError("qubits() needs at least one factor")
    t: Type = QUBIT
    for _ in range(n - 1):
        t = TensorT(QUBIT, t)
    return t


def gate_type(arity: int) -> Type:
    return Lolli(qubits(arity), qubits(arity))


def atom_count(t: Type) -> int:
    if isinstance(t, Qubit):
        return 1
    if isinstance(t, Lolli):
        return atom_count(t.dom) + atom_count(t.cod)
    return atom_count(t.left) + atom_count(t.right)


def is_ground(t: Type) -> bool:
    """True for tensor trees of qubits (no arrows)."""
    if isinstance(t, Qubit):
        return True
    if isinstance(t, TensorT):
        return is_ground(t.left) and is_ground(t.right)
    return False


def parse_type(text: str) -> Type:
    """Parse ``B``, ``A * B`` (right assoc, tighter) and ``A -o B`` (right assoc)."""
    toks = re.findall(r"-o|⊸|[()*⊗]|B|\S", text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def eat(tok):
        nonlocal pos
        if peek() != tok:
            raise ParseError(f"expected {tok!r} in type", pos)
        pos += 1

    def lolli():
        left = tensor()
        if peek() in ("-o", "⊸"):
            eat(peek())
            return Lolli(left, lolli())
        return left

    def tensor():
        left = atom()
        if peek() in ("*", "⊗"):
            eat(peek())
            return TensorT(left, tensor())
        return left

    def atom():
        tok = peek()
        if tok == "B":
            eat("B")
            return QUBIT
        if tok == "(":
            eat("(")
            t = lolli()
            eat(")")
            return t
        raise ParseError(f"unexpected {tok!r} in type", pos)

    result = lolli()
    if pos != len(toks):
        raise ParseError(f"trailing input {toks[pos]!r} in type", pos)
    return result


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Bit:
    value: int
    label: int


@dataclass(frozen=True)
class Gate:
    name: str


@dataclass(frozen=True)
class Tensor:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class LamVar:
    var: str
    body: "Term"


@dataclass(frozen=True)
class LamPair:
    left: str
    right: str
    body: "Term"


Term = Union[Var, Bit, Gate, Tensor, App, LamVar, LamPair]


def children(t: Term) -> tuple:
    if isinstance(t, (Tensor,)):
        return (t.left, t.right)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, (LamVar, LamPair)):
        return (t.body,)
    return ()


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order, left to right."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(children(s)))


def free_vars(t: Term) -> Counter:
    """Multiset of free variable occurrences."""
    if isinstance(t, Var):
        return Counter([t.name])
    if isinstance(t, (Bit, Gate)):
        return Counter()
    if isinstance(t, (Tensor, App)):
        a, b = children(t)
        return free_vars(a) + free_vars(b)
    fv = free_vars(t.body)
    bound = (t.var,) if isinstance(t, LamVar) else (t.left, t.right)
    for name in bound:
        fv.pop(name, None)
    return fv


def bits_of(t: Term) -> list[Bit]:
    return [s for s in subterms(t) if isinstance(s, Bit)]


def gates_of(t: Term) -> list[str]:
    return [s.name for s in subterms(t) if isinstance(s, Gate)]


def relabel(t: Term, labels) -> Term:
    """Replace bit labels in pre-order by the successive items of ``labels``."""
    it = iter(labels)

    def go(s):
        if isinstance(s, Bit):
            return Bit(s.value, next(it))
        if isinstance(s, Tensor):
            return Tensor(go(s.left), go(s.right))
        if isinstance(s, App):
            return App(go(s.fun), go(s.arg))
        if isinstance(s, LamVar):
            return LamVar(s.var, go(s.body))
        if isinstance(s, LamPair):
            return LamPair(s.left, s.right, go(s.body))
        return s

    return go(t)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<bit>\|(?P<bval>[01])>(?:_(?P<blabel>\d+))?)
  | (?P<gate>[A-Z][A-Za-z0-9_]*)
  | (?P<var>[a-z_][A-Za-z0-9_']*)
  | (?P<sym>[\\λ<>,.()*⊗])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int
    value: object = None


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.group("ws") is None:
            if m.group("bit"):
                label = m.group("blabel")
                toks.append(_Tok("bit", m.group(0), pos,
                                 (int(m.group("bval")), int(label) if label else None)))
            elif m.group("gate"):
                toks.append(_Tok("gate", m.group(0), pos))
            elif m.group("var"):
                toks.append(_Tok("var", m.group(0), pos))
            else:
                sym = m.group(0)
                sym = {"λ": "\\", "⊗": "*"}.get(sym, sym)
                toks.append(_Tok(sym, sym, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self):
        return self.toks[self.i]

    def expect(self, kind):
        tok = self.cur
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {kind!r}, found {shown!r}", tok.pos)
        self.i += 1
        return tok

    def term(self):
        if self.cur.kind == "\\":
            return self.lam()
        return self.tensor()

    def lam(self):
        self.expect("\\")
        if self.cur.kind == "<":
            self.i += 1
            x = self.expect("var")
            self.expect(",")
            y = self.expect("var")
            self.expect(">")
            if x.text == y.text:
                raise ParseError(f"pattern binds {x.text} twice", y.pos)
            self.expect(".")
            return LamPair(x.text, y.text, self.term())
        x = self.expect("var")
        self.expect(".")
        return LamVar(x.text, self.term())

    def tensor(self):
        left = self.app()
        if self.cur.kind == "*":
            self.i += 1
            right = self.lam() if self.cur.kind == "\\" else self.tensor()
            return Tensor(left, right)
        return left

    def app(self):
        t = self.atom()
        while True:
            if self.cur.kind in ("var", "gate", "bit", "("):
                t = App(t, self.atom())
            elif self.cur.kind == "\\":
                return App(t, self.lam())
            else:
                return t

    def atom(self):
        tok = self.cur
        if tok.kind == "var":
            self.i += 1
            return Var(tok.text)
        if tok.kind == "gate":
            self.i += 1
            return Gate(tok.text)
        if tok.kind == "bit":
            self.i += 1
            value, label = tok.value
            # label None is resolved after the whole term is read
            return Bit(value, label)
        if tok.kind == "(":
            self.i += 1
            t = self.term()
            self.expect(")")
            return t
        shown = tok.text or "end of input"
        raise ParseError(f"unexpected {shown!r}", tok.pos)


def parse(text: str) -> Term:
    """Parse a term, assigning the smallest unused labels to unlabeled bits.

    Unlabeled bits are numbered left to right, skipping labels already given
    explicitly somewhere in the term.
    """
    p = _Parser(text)
    t = p.term()
    if p.cur.kind != "eof":
        raise ParseError(f"unexpected {p.cur.text!r}", p.cur.pos)
    bits = bits_of(t)
    explicit = [b.label for b in bits if b.label is not None]
    seen = set()
    for label in explicit:
        if label in seen:
            raise DuplicateBitLabel(label)
        seen.add(label)
    if len(explicit) == len(bits):
        return t
    fresh = (n for n in range(1, len(bits) + len(seen) + 1) if n not in seen)
    return relabel(t, [b.label if b.label is not None else next(fresh) for b in bits])


# ---------------------------------------------------------------------------
# printing


def _atomic(t):
    return isinstance(t, (Var, Bit, Gate))


def pretty(t: Term) -> str:
    """Print a term so that ``parse(pretty(t)) == t``; bit labels are always shown."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Gate):
        return t.name
    if isinstance(t, Bit):
        return f"|{t.value}>_{t.label}"
    if isinstance(t, LamVar):
        return f"\\{t.var}. {pretty(t.body)}"
    if isinstance(t, LamPair):
        return f"\\<{t.left},{t.right}>. {pretty(t.body)}"
    if isinstance(t, App):
        fun = pretty(t.fun) if isinstance(t.fun, (App, Var, Gate, Bit)) else f"({pretty(t.fun)})"
        arg = pretty(t.arg) if _atomic(t.arg) else f"({pretty(t.arg)})"
        return f"{fun} {arg}"
    left = pretty(t.left) if _atomic(t.left) else f"({pretty(t.left)})"
    right = pretty(t.right) if _atomic(t.right) or isinstance(t.right, Tensor) else f"({pretty(t.right)})"
    return f"{left} * {right}"


def read_source(path) -> Term:
    """Read a ``.qlam`` file (UTF-8, one term, ``--`` comments)."""
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
