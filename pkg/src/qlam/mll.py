"""Multiplicative linear logic: formulas, one-sided sequent proofs, the
single-token MLL machine, and the canonical translation of typing derivations.

Sequents are ordered lists; exchange is implicit.  Every formula in a proof
node's conclusion records its *origin*: either it is copied from a premise
(context), it is the principal formula of the node, or (axioms) it is one of
the two dual formulas.  The token machine only follows origins.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import CorrespondenceViolation, InvalidProof
from .syntax import Lolli, Qubit, TensorT, Type
from .typecheck import (
    A_Q0,
    A_Q1,
    A_U,
    A_V,
    E_LOLLI,
    I_LOLLI1,
    I_LOLLI2,
    I_TENSOR,
    LOLLI_L,
    TENS_L,
    Derivation,
    Occurrence,
    bit_leaves,
    noccs,
)

# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Atom:
    name: str = "α"

    def neg(self):
        return NegAtom(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NegAtom:
    name: str = "α"

    def neg(self):
        return Atom(self.name)

    def __str__(self):
        return f"{self.name}⊥"


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def neg(self):
        return Par(self.left.neg(), self.right.neg())

    def __str__(self):
        return f"{_wrap(self.left)} ⊗ {_wrap(self.right)}"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def neg(self):
        return Tensor(self.left.neg(), self.right.neg())

    def __str__(self):
        return f"{_wrap(self.left)} ⅋ {_wrap(self.right)}"


Formula = Union[Atom, NegAtom, Tensor, Par]


def _wrap(f):
    return f"({f})" if isinstance(f, (Tensor, Par)) else str(f)


def neg(f: Formula) -> Formula:
    return f.neg()


def subformula(f: Formula, path) -> Formula:
    for step in path:
        f = f.left if step == "l" else f.right
    return f


def formula_atom_paths(f: Formula) -> list[tuple]:
    if isinstance(f, (Atom, NegAtom)):
        return [()]
    return [("l",) + p for p in formula_atom_paths(f.left)] + [("r",) + p for p in formula_atom_paths(f.right)]


def translate_type(a: Type, atom: str = "α") -> Formula:
    if isinstance(a, Qubit):
        return Atom(atom)
    if isinstance(a, Lolli):
        return Par(translate_type(a.dom, atom).neg(), translate_type(a.cod, atom))
    if isinstance(a, TensorT):
        return Tensor(translate_type(a.left, atom), translate_type(a.right, atom))
    raise TypeError(f"not a type: {a!r}")


# ---------------------------------------------------------------------------
# proofs

AX, CUT, TENSOR, PAR = "ax", "cut", "tensor", "par"

# origins of conclusion formulas
#   ("ctx", premise, index)             copied from a premise
#   ("tensor", (p0, i0), (p1, i1))      principal formula of a tensor
#   ("par", ia, ib)                     principal formula of a par (premise 0)
#   ("ax", other)                       axiom formula, dual of position ``other``


@dataclass(frozen=True, eq=False)
class MllProof:
    id: int
    rule: str
    conclusion: tuple
    children: tuple = ()
    origins: tuple = ()
    cut: Optional[tuple] = None  # (i0, i1) for cut nodes

    def nodes(self):
        """Pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def count(self, rule: str) -> int:
        return sum(1 for n in self.nodes() if n.rule == rule)

    def atom_count(self) -> int:
        return sum(len(formula_atom_paths(f)) for n in self.nodes() for f in n.conclusion)

    def is_cut_free(self) -> bool:
        return self.count(CUT) == 0

    def sequent(self) -> str:
        return "⊢ " + ", ".join(str(f) for f in self.conclusion)


class ProofBuilder:
    """Creates proof nodes with fresh ids; ``order`` permutes a conclusion."""

    def __init__(self):
        self._ids = itertools.count()

    def _make(self, rule, items, children, order, cut=None):
        if order is not None:
            items = [items[k] for k in order]
        forms = tuple(f for f, _ in items)
        origins = tuple(o for _, o in items)
        return MllProof(next(self._ids), rule, forms, tuple(children), origins, cut)

    def ax(self, f: Formula, order=None) -> MllProof:
        """``⊢ F⊥, F``."""
        return self._make(AX, [(f.neg(), ("ax", 1)), (f, ("ax", 0))], (), order)

    def cut(self, p: MllProof, i: int, q: MllProof, j: int, order=None) -> MllProof:
        items = [(f, ("ctx", 0, k)) for k, f in enumerate(p.conclusion) if k != i]
        items += [(f, ("ctx", 1, k)) for k, f in enumerate(q.conclusion) if k != j]
        return self._make(CUT, items, (p, q), order, cut=(i, j))

    def tensor(self, p: MllProof, i: int, q: MllProof, j: int, order=None) -> MllProof:
        items = [(f, ("ctx", 0, k)) for k, f in enumerate(p.conclusion) if k != i]
        items += [(f, ("ctx", 1, k)) for k, f in enumerate(q.conclusion) if k != j]
        items.append((Tensor(p.conclusion[i], q.conclusion[j]), ("tensor", (0, i), (1, j))))
        return self._make(TENSOR, items, (p, q), order)

    def par(self, p: MllProof, i: int, j: int, order=None) -> MllProof:
        items = [(f, ("ctx", 0, k)) for k, f in enumerate(p.conclusion) if k not in (i, j)]
        items.append((Par(p.conclusion[i], p.conclusion[j]), ("par", i, j)))
        return self._make(PAR, items, (p,), order)


def format_proof(p: MllProof, indent: int = 0) -> str:
    lines = [f"{'  ' * indent}[{p.id}] ({p.rule}) {p.sequent()}"]
    for c in p.children:
        lines.append(format_proof(c, indent + 1))
    return "\n".join(lines)


def check_proof(p: MllProof) -> None:
    """Rule-by-rule validation from conclusions alone (origins are ignored).

    Raises :class:`InvalidProof` on the first bad node.
    """
    for node in p.nodes():
        concl = Counter(node.conclusion)
        prem = [Counter(c.conclusion) for c in node.children]
        ok = False
        if node.rule == AX:
            ok = len(node.children) == 0 and len(node.conclusion) == 2 and \
                node.conclusion[0] == node.conclusion[1].neg()
        elif node.rule == PAR and len(prem) == 1:
            for f in concl:
                if isinstance(f, Par) and concl - Counter([f]) + Counter([f.left, f.right]) == prem[0]:
                    ok = True
                    break
        elif node.rule == TENSOR and len(prem) == 2:
            for f in concl:
                if isinstance(f, Tensor) and prem[0][f.left] and prem[1][f.right]:
                    rest = (prem[0] - Counter([f.left])) + (prem[1] - Counter([f.right]))
                    if concl - Counter([f]) == rest:
                        ok = True
                        break
        elif node.rule == CUT and len(prem) == 2:
            for f in prem[0]:
                if prem[1][f.neg()]:
                    rest = (prem[0] - Counter([f])) + (prem[1] - Counter([f.neg()]))
                    if concl == rest:
                        ok = True
                        break
        if not ok:
            raise InvalidProof(f"node {node.id} ({node.rule}) does not follow from its premises: {node.sequent()}")


def check_origins(p: MllProof) -> None:
    """Check that recorded origins agree with the formulas they describe."""
    for node in p.nodes():
        for k, (f, o) in enumerate(zip(node.conclusion, node.origins)):
            kind = o[0]
            if kind == "ctx":
                good = node.children[o[1]].conclusion[o[2]] == f
            elif kind == "tensor":
                (a, i), (b, j) = o[1], o[2]
                good = f == Tensor(node.children[a].conclusion[i], node.children[b].conclusion[j])
            elif kind == "par":
                c = node.children[0].conclusion
                good = f == Par(c[o[1]], c[o[2]])
            else:
                good = node.rule == AX and node.conclusion[o[1]] == f.neg()
            if not good:
                raise InvalidProof(f"origin of formula {k} at node {node.id} is inconsistent")


# ---------------------------------------------------------------------------
# the machine


@dataclass(frozen=True, order=True)
class AtomOccurrence:
    node: int
    position: int
    path: tuple
    sign: str  # "+" for an atom, "-" for a co-atom

    def __str__(self):
        return f"{self.node}:{self.position}:{''.join(self.path) or '.'}{self.sign}"


class Exit:
    def __repr__(self):
        return "Exit"


EXIT = Exit()


class MllMachine:
    """Successor function over atom occurrences: atoms go down, co-atoms go up."""

    def __init__(self, proof: MllProof):
        self.proof = proof
        self.by_id = {n.id: n for n in proof.nodes()}
        self.atoms = proof.atom_count()
        # (child id, position) -> (parent, how)
        self.down = {}
        for node in proof.nodes():
            for k, o in enumerate(node.origins):
                if o[0] == "ctx":
                    self.down[(node.children[o[1]].id, o[2])] = (node.id, k, ())
                elif o[0] == "tensor":
                    (a, i), (b, j) = o[1], o[2]
                    self.down[(node.children[a].id, i)] = (node.id, k, ("l",))
                    self.down[(node.children[b].id, j)] = (node.id, k, ("r",))
                elif o[0] == "par":
                    c = node.children[0].id
                    self.down[(c, o[1])] = (node.id, k, ("l",))
                    self.down[(c, o[2])] = (node.id, k, ("r",))
            if node.rule == CUT:
                (i, j), (p, q) = node.cut, node.children
                self.down[(p.id, i)] = ("cut", q.id, j)
                self.down[(q.id, j)] = ("cut", p.id, i)

    def occ(self, node: int, position: int, path: tuple) -> AtomOccurrence:
        f = subformula(self.by_id[node].conclusion[position], path)
        if not isinstance(f, (Atom, NegAtom)):
            raise ValueError(f"path {path} does not end at an atom")
        return AtomOccurrence(node, position, tuple(path), "+" if isinstance(f, Atom) else "-")

    def occurrences(self) -> list[AtomOccurrence]:
        return [self.occ(n.id, k, p) for n in self.proof.nodes()
                for k, f in enumerate(n.conclusion) for p in formula_atom_paths(f)]

    def initial(self) -> list[AtomOccurrence]:
        """Co-atoms of the end sequent."""
        root = self.proof
        return [o for k, f in enumerate(root.conclusion) for p in formula_atom_paths(f)
                if (o := self.occ(root.id, k, p)).sign == "-"]

    def final(self) -> list[AtomOccurrence]:
        root = self.proof
        return [o for k, f in enumerate(root.conclusion) for p in formula_atom_paths(f)
                if (o := self.occ(root.id, k, p)).sign == "+"]

    def step(self, o: AtomOccurrence):
        if o.sign == "-":
            node = self.by_id[o.node]
            origin = node.origins[o.position]
            kind = origin[0]
            if kind == "ax":
                return self.occ(node.id, origin[1], o.path)
            if kind == "ctx":
                return self.occ(node.children[origin[1]].id, origin[2], o.path)
            head, rest = o.path[0], o.path[1:]
            if kind == "tensor":
                child, idx = origin[1] if head == "l" else origin[2]
                return self.occ(node.children[child].id, idx, rest)
            idx = origin[1] if head == "l" else origin[2]
            return self.occ(node.children[0].id, idx, rest)
        target = self.down.get((o.node, o.position))
        if target is None:
            if o.node == self.proof.id:
                return EXIT
            raise InvalidProof(f"occurrence {o} has nowhere to go")
        if target[0] == "cut":
            return self.occ(target[1], target[2], o.path)
        parent, k, prefix = target
        return self.occ(parent, k, prefix + o.path)

    def run(self, o: AtomOccurrence) -> list[AtomOccurrence]:
        """The maximal run from ``o`` (inclusive); guards against cycles."""
        out = [o]
        limit = self.atoms + 1
        while True:
            nxt = self.step(out[-1])
            if nxt is EXIT:
                return out
            out.append(nxt)
            if len(out) > limit:
                raise InvalidProof("MLL run does not terminate")


def mll_step(p: MllProof, o: AtomOccurrence):
    return MllMachine(p).step(o)


@dataclass(frozen=True)
class VisitReport:
    atoms: int
    runs: int
    visited_once: bool
    missing: tuple = ()
    repeated: tuple = ()


def unique_visit(machine: MllMachine) -> VisitReport:
    """Maximal runs from all initial occurrences cover every atom exactly once."""
    seen = Counter()
    starts = machine.initial()
    for s in starts:
        seen.update(machine.run(s))
    every = machine.occurrences()
    missing = tuple(o for o in every if o not in seen)
    repeated = tuple(o for o, c in seen.items() if c > 1)
    return VisitReport(len(every), len(starts), not missing and not repeated, missing, repeated)


# ---------------------------------------------------------------------------
# canonical translation of derivations


_PATH = {"lolli_l": "l", "lolli_r": "r", "tens_l": "l", "tens_r": "r"}


@dataclass
class Translation:
    derivation: Derivation
    proof: MllProof
    top: dict  # derivation node id -> proof node id
    bits: dict  # derivation node id -> number of bit formulas
    machine: MllMachine = field(init=False, repr=False)

    def __post_init__(self):
        self.machine = MllMachine(self.proof)

    def atom_of(self, occ: Occurrence) -> AtomOccurrence:
        node = self.derivation.node(occ.node)
        n = self.bits[occ.node]
        pos = n + occ.hyp if occ.hyp is not None else n + len(node.env)
        return self.machine.occ(self.top[occ.node], pos, tuple(_PATH[s] for s in occ.path))

    def slot_entries(self) -> list[AtomOccurrence]:
        """Initial MLL occurrence of each machine slot: arguments, then bits by label."""
        root = self.derivation
        n = self.bits[root.id]
        last = n + len(root.env)
        args = [self.machine.occ(self.proof.id, last, tuple(_PATH[s] for s in p)) for p in noccs(root.type)]
        return args + [self.machine.occ(self.proof.id, k, ()) for k in range(n)]


def translate_derivation(d: Derivation, atom: str = "α") -> Translation:
    """The canonical proof of the sequent ``⊢ α⊥ (per bit), ⌊Γ⌋⊥, ⌊A⌋``.

    Bit formulas are ordered by label and hypotheses by environment order.
    """
    b = ProofBuilder()
    top, nbits = {}, {}
    alpha = Atom(atom)

    def tags_of(node):
        # the tag of each formula in the sequent for ``node``
        return [("bit", leaf.term.label) for leaf in bit_leaves(node)] + \
            [("var", x) for x, _ in node.env] + [("concl",)]

    def arrange(proof_node, tags, node):
        """Order of ``proof_node``'s conclusion matching the sequent of ``node``."""
        want = tags_of(node)
        return [tags.index(t) for t in want]

    def go(node: Derivation):
        rule = node.rule
        if rule in (A_Q0, A_Q1):
            p = b.ax(alpha)
        elif rule == A_V:
            p = b.ax(translate_type(node.type, atom))
        elif rule == A_U:
            p = _gate_proof(b, alpha, node.type)
        elif rule == I_LOLLI1:
            (body,) = node.children
            q, tq = go(body)
            hyp = tq.index(("var", node.term.var))
            p = b.par(q, hyp, tq.index(("concl",)))
            tags = [t for k, t in enumerate(tq) if k not in (hyp, tq.index(("concl",)))] + [("concl",)]
            p = _reorder(b, p, arrange(p, tags, node))
        elif rule == I_LOLLI2:
            (body,) = node.children
            q, tq = go(body)
            x, y = tq.index(("var", node.term.left)), tq.index(("var", node.term.right))
            p1 = b.par(q, x, y)
            t1 = [t for k, t in enumerate(tq) if k not in (x, y)] + [("pair",)]
            p = b.par(p1, t1.index(("pair",)), t1.index(("concl",)))
            tags = [t for t in t1 if t not in (("pair",), ("concl",))] + [("concl",)]
            p = _reorder(b, p, arrange(p, tags, node))
        elif rule == E_LOLLI:
            fun, arg = node.children
            f, tf = go(fun)
            a, ta = go(arg)
            cod = translate_type(node.type, atom)
            ax = b.ax(cod)  # ⊢ ⌊B⌋⊥, ⌊B⌋
            t = b.tensor(a, ta.index(("concl",)), ax, 0)  # ..., ⌊B⌋, ⌊A⌋ ⊗ ⌊B⌋⊥
            tt = [x for x in ta if x != ("concl",)] + [("concl",), ("cutf",)]
            p = b.cut(f, tf.index(("concl",)), t, len(tt) - 1)
            tags = [x for x in tf if x != ("concl",)] + tt[:-1]
            p = _reorder(b, p, arrange(p, tags, node))
        elif rule == I_TENSOR:
            left, right = node.children
            l, tl = go(left)
            r, tr = go(right)
            p = b.tensor(l, tl.index(("concl",)), r, tr.index(("concl",)))
            tags = [x for x in tl if x != ("concl",)] + [x for x in tr if x != ("concl",)] + [("concl",)]
            p = _reorder(b, p, arrange(p, tags, node))
        else:
            raise InvalidProof(f"unknown rule {rule}")
        top[node.id] = p.id
        nbits[node.id] = len(bit_leaves(node))
        return p, tags_of(node)

    proof, _ = go(d)
    return Translation(d, proof, top, nbits)


def _reorder(b: ProofBuilder, p: MllProof, order) -> MllProof:
    """Same node with its conclusion permuted (exchange is implicit)."""
    if list(order) == list(range(len(order))):
        return p
    return MllProof(p.id, p.rule, tuple(p.conclusion[k] for k in order), p.children,
                    tuple(p.origins[k] for k in order), p.cut)


def _gate_proof(b: ProofBuilder, alpha: Atom, gate_t: Type) -> MllProof:
    """``⊢ ⌊B^n⌋⊥ ⅋ ⌊B^n⌋``: n axioms, tensors, then pars in identity order."""
    n = len(noccs(gate_t))
    axioms = [b.ax(alpha) for _ in range(n)]
    # right-nested tensor; sequent is α⊥_1 .. α⊥_n, α ⊗ (α ⊗ ...)
    p = axioms[-1]
    for ax in reversed(axioms[:-1]):
        k = len(p.conclusion) - 1
        p = b.tensor(ax, 1, p, k, order=[0] + list(range(1, k + 1)) + [k + 1])
    # pars pair up the co-atoms right to left, keeping the tensor last
    while len(p.conclusion) > 2:
        m = len(p.conclusion) - 1  # co-atom formulas sit at 0 .. m-1
        p = b.par(p, m - 2, m - 1, order=list(range(m - 2)) + [m - 1, m - 2])
    return b.par(p, 0, 1)


# ---------------------------------------------------------------------------
# correspondence with the quantum machine


@dataclass(frozen=True)
class CorrespondenceReport:
    machine_steps: int
    mll_steps: int
    atoms: int
    visited_once: bool


def project_state(tr: Translation, slots) -> list[AtomOccurrence]:
    """Forget the register; map every token occurrence into the canonical proof."""
    return [tr.atom_of(o) for o in slots]


def _reaches(m: MllMachine, src: AtomOccurrence, dst: AtomOccurrence, strict: bool) -> Optional[int]:
    if src == dst and not strict:
        return 0
    cur, n = src, 0
    while n <= m.atoms:
        cur = m.step(cur)
        n += 1
        if cur is EXIT:
            return None
        if cur == dst:
            return n
    return None


def check_correspondence(tr: Translation, result) -> CorrespondenceReport:
    """Check a completed machine run against the canonical MLL machine.

    Every token hop must be matched by one or more MLL steps, initial tokens
    must lie on the runs starting from the end sequent's co-atoms, final
    tokens must exit, and the maximal runs must visit each atom once.
    """
    from .machine import FireEvent  # local: the machine module does not need mll

    m = tr.machine
    total = 0
    for i, (entry, occ) in enumerate(zip(tr.slot_entries(), result.initial.slots)):
        if _reaches(m, entry, tr.atom_of(occ), strict=False) is None:
            raise CorrespondenceViolation(0, f"slot {i + 1} starts off its MLL run")
    for k, ev in enumerate(result.trace, start=1):
        for mv in (ev.moves if isinstance(ev, FireEvent) else (ev,)):
            n = _reaches(m, tr.atom_of(mv.source), tr.atom_of(mv.target), strict=True)
            if n is None:
                raise CorrespondenceViolation(k, f"slot {mv.slot}: {mv.source} -> {mv.target} has no MLL counterpart")
            total += n
    for i, occ in enumerate(result.final.slots):
        if m.step(tr.atom_of(occ)) is not EXIT:
            raise CorrespondenceViolation(len(result.trace), f"slot {i + 1} does not end on the end sequent")
    visit = unique_visit(m)
    if not visit.visited_once:
        raise CorrespondenceViolation(len(result.trace), "maximal MLL runs do not visit every atom exactly once")
    return CorrespondenceReport(len(result.trace), total, visit.atoms, True)
