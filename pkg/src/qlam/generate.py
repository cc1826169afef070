"""Random well-typed closed terms, built by type-directed synthesis.

``_Synth.gen(goal, ctx, depth)`` returns a term of ground type ``goal`` that
uses every variable of ``ctx`` exactly once.  Two invariants keep every
partial goal completable: the qubit charge of the ground variables fits in
the goal's width, and every function variable (always ``B^k -o B^k``) has
``k`` no larger than that width.  Once the depth budget is spent,
:meth:`_Synth.complete` finishes deterministically.

Linearity conserves qubits, so a closed term of ground type ``G`` (or of
type ``A1 -o ... -o G`` with ground ``Ai``) runs on a register of exactly
``width(G)`` qubits; ``max_qubits`` bounds that width.
"""
from __future__ import annotations

import random

from .errors import GenerationExhausted, QlamError
from .quantum import BUILTINS
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
    atom_count,
    bits_of,
    qubits,
    relabel,
)
from .typecheck import typecheck

DEFAULT_GATES = ("H", "X", "Y", "Z", "S", "T", "CNOT", "CZ", "SWAP")


def random_ground_type(rng: random.Random, width: int) -> Type:
    if width == 1:
        return QUBIT
    k = rng.randint(1, width - 1)
    return TensorT(random_ground_type(rng, k), random_ground_type(rng, width - k))


def _is_nested_power(t: Type) -> int:
    """k if ``t`` is ``B^k`` (right nested), else 0."""
    k = 0
    while isinstance(t, TensorT):
        if not isinstance(t.left, Qubit):
            return 0
        t, k = t.right, k + 1
    return k + 1


class _Synth:
    def __init__(self, rng: random.Random, gates):
        self.rng = rng
        self.gates = {}
        for name in gates:
            self.gates.setdefault(BUILTINS[name].arity, []).append(name)
        self.counter = 0

    def fresh(self, base="x"):
        self.counter += 1
        return f"{base}{self.counter}"

    # -- helpers -----------------------------------------------------------

    @staticmethod
    def charge(ctx):
        return sum(atom_count(a) for _, a in ctx if not isinstance(a, Lolli))

    @staticmethod
    def max_dom(ctx):
        return max((atom_count(a.dom) for _, a in ctx if isinstance(a, Lolli)), default=0)

    def fits(self, ctx, width):
        return self.charge(ctx) <= width and self.max_dom(ctx) <= width

    def bind(self, t: Type, body, arg: Term, ctx):
        """``(\\y. M) arg`` or ``(\\<a,b>. M) arg``; ``body(ctx')`` builds M."""
        if isinstance(t, TensorT):
            a, b = self.fresh(), self.fresh()
            inner = body(ctx + [(a, t.left), (b, t.right)])
            return App(LamPair(a, b, inner), arg)
        y = self.fresh()
        return App(LamVar(y, body(ctx + [(y, t)])), arg)

    def bit(self):
        return Bit(self.rng.randint(0, 1), 0)

    def random_split(self, ctx, w1, w2):
        for _ in range(8):
            left, right = [], []
            for v in ctx:
                (left if self.rng.random() < 0.5 else right).append(v)
            if self.fits(left, w1) and self.fits(right, w2):
                return left, right
        return None

    # -- synthesis ---------------------------------------------------------

    def gen(self, goal: Type, ctx: list, depth: int) -> Term:
        width = atom_count(goal)
        if depth <= 0:
            return self.complete(goal, ctx)
        options = []
        if isinstance(goal, Qubit) and not ctx:
            options.append(("bit", 2))
        if isinstance(goal, Qubit) and len(ctx) == 1 and ctx[0][1] == QUBIT:
            options.append(("var", 3))
        if any(isinstance(a, TensorT) for _, a in ctx):
            options.append(("destruct", 2))
        if isinstance(goal, TensorT):
            options.append(("split", 3))
        k = _is_nested_power(goal)
        if k in self.gates:
            options.append(("gate", 4))
        options.append(("let", 2))
        if any(isinstance(a, Lolli) for _, a in ctx):
            options.append(("apply", 4))
        if any(n <= width for n in self.gates):
            options.append(("hof", 1))
        names, weights = zip(*options)
        choice = self.rng.choices(names, weights)[0]
        return getattr(self, f"_p_{choice}")(goal, ctx, depth) or self.complete(goal, ctx)

    def _p_bit(self, goal, ctx, depth):
        return self.bit()

    def _p_var(self, goal, ctx, depth):
        return Var(ctx[0][0])

    def _p_destruct(self, goal, ctx, depth):
        tens = [v for v in ctx if isinstance(v[1], TensorT)]
        x, t = self.rng.choice(tens)
        rest = [v for v in ctx if v[0] != x]
        return self.bind(t, lambda c: self.gen(goal, c, depth - 1), Var(x), rest)

    def _p_split(self, goal, ctx, depth):
        w1, w2 = atom_count(goal.left), atom_count(goal.right)
        split = self.random_split(ctx, w1, w2)
        if split is None:
            return None
        left, right = split
        return Tensor(self.gen(goal.left, left, depth - 1), self.gen(goal.right, right, depth - 1))

    def _p_gate(self, goal, ctx, depth):
        name = self.rng.choice(self.gates[_is_nested_power(goal)])
        return App(Gate(name), self.gen(goal, ctx, depth - 1))

    def _p_let(self, goal, ctx, depth):
        width = atom_count(goal)
        split = self.random_split(ctx, width, width)
        if split is None:
            return None
        first, rest = split
        low = max(self.charge(first), self.max_dom(first), 1)
        high = width - self.charge(rest)
        if low > high:
            return None
        mid = random_ground_type(self.rng, self.rng.randint(low, high))
        arg = self.gen(mid, first, depth - 1)
        return self.bind(mid, lambda c: self.gen(goal, c, depth - 1), arg, rest)

    def _p_apply(self, goal, ctx, depth):
        funs = [v for v in ctx if isinstance(v[1], Lolli)]
        f, ft = self.rng.choice(funs)
        k = atom_count(ft.dom)
        others = [v for v in ctx if v[0] != f]
        split = self.random_split(others, k, atom_count(goal))
        if split is None:
            return None
        first, rest = split
        if self.charge(rest) + k > atom_count(goal):
            return None
        call = App(Var(f), self.gen(ft.dom, first, depth - 1))
        if not rest and ft.cod == goal:
            return call
        return self.bind(ft.cod, lambda c: self.gen(goal, c, depth - 1), call, rest)

    def _p_hof(self, goal, ctx, depth):
        k = self.rng.choice([n for n in self.gates if n <= atom_count(goal)])
        power = qubits(k)
        f = self.fresh("f")
        roll = self.rng.random()
        if roll < 0.4:
            fun = Gate(self.rng.choice(self.gates[k]))
        elif k >= 2 and roll < 0.7:
            a, b = self.fresh(), self.fresh()
            fun = LamPair(a, b, self.gen(power, [(a, power.left), (b, power.right)], depth - 1))
        else:
            x = self.fresh()
            fun = LamVar(x, self.gen(power, [(x, power)], depth - 1))
        body = self.gen(goal, ctx + [(f, Lolli(power, power))], depth - 1)
        return App(LamVar(f, body), fun)

    # -- deterministic completion -------------------------------------------

    def complete(self, goal: Type, ctx: list) -> Term:
        for x, t in ctx:
            if isinstance(t, TensorT):
                rest = [v for v in ctx if v[0] != x]
                return self.bind(t, lambda c: self.complete(goal, c), Var(x), rest)
        for f, t in ctx:
            if isinstance(t, Lolli):
                k = atom_count(t.dom)
                singles = [v for v in ctx if v[1] == QUBIT]
                used, rest = singles[:k], [v for v in ctx if v[0] != f and v not in singles[:k]]
                leaves = [Var(x) for x, _ in used] + [self.bit() for _ in range(k - len(used))]
                call = App(Var(f), _shape(t.dom, leaves))
                return self.bind(t.cod, lambda c: self.complete(goal, c), call, rest)
        leaves = [Var(x) for x, _ in ctx]
        leaves += [self.bit() for _ in range(atom_count(goal) - len(leaves))]
        self.rng.shuffle(leaves)
        return _shape(goal, leaves)


def _shape(t: Type, leaves: list) -> Term:
    """Fill the tensor tree ``t`` with ``leaves`` left to right."""
    it = iter(leaves)

    def go(s):
        if isinstance(s, TensorT):
            left = go(s.left)
            return Tensor(left, go(s.right))
        return next(it)

    return go(t)


def generate_term(seed: int, max_depth: int, max_qubits: int, *, ground: bool = True,
                  gates=DEFAULT_GATES, retries: int = 20) -> Term:
    """A closed well-typed term, deterministic in ``seed``.

    With ``ground=False`` the term is a function ``A1 -o ... -o G`` taking
    ground arguments.
    """
    if max_depth < 1 or max_qubits < 1:
        raise ValueError("max_depth and max_qubits must be positive")
    rng = random.Random(seed)
    for _ in range(retries):
        synth = _Synth(rng, gates)
        width = rng.randint(1, max_qubits)
        goal = random_ground_type(rng, width)
        if ground:
            term = synth.gen(goal, [], max_depth)
        else:
            term = _function(synth, goal, max_depth)
        n = len(bits_of(term))
        labels = list(range(1, n + 1))
        rng.shuffle(labels)
        term = relabel(term, labels)
        try:
            typecheck((), term)
        except QlamError:
            continue
        return term
    raise GenerationExhausted(f"no well-typed term after {retries} attempts (seed {seed})")


def _function(synth: _Synth, goal: Type, depth: int) -> Term:
    rng = synth.rng
    budget = atom_count(goal)
    params = []
    while budget > 0 and (not params or rng.random() < 0.4):
        w = rng.randint(1, budget)
        params.append(random_ground_type(rng, w))
        budget -= w
    binders = []
    ctx = []
    for t in params:
        if isinstance(t, TensorT) and rng.random() < 0.5:
            a, b = synth.fresh(), synth.fresh()
            binders.append((a, b))
            ctx += [(a, t.left), (b, t.right)]
        else:
            x = synth.fresh()
            binders.append(x)
            ctx.append((x, t))
    body = synth.gen(goal, ctx, depth)
    for b in reversed(binders):
        body = LamPair(b[0], b[1], body) if isinstance(b, tuple) else LamVar(b, body)
    return body
