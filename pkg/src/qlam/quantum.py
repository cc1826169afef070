"""Quantum registers, gates, lifted operators and register text I/O.

Basis convention: big endian.  Qubit 1 is the most significant bit of the
basis index, so ``|b1 b2 ... bn>`` has index ``int("b1b2...bn", 2)``.  Gate
matrices use the same convention over their own wires.
"""
from __future__ import annotations

import json
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import (
    ArityMismatch,
    BadDimension,
    DuplicateWire,
    InconsistentBitWidth,
    MalformedAmplitude,
    MalformedGateLibrary,
    NameClash,
    NonUnitaryMatrix,
    NotNormalized,
    SizeMismatch,
    WireOutOfRange,
)

UNITARY_TOL = 1e-9
NORM_TOL = 1e-9
PARSE_NORM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Register:
    """A normalized state vector on ``n`` qubits (``n == 0`` is a unit scalar)."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (1 << self.n,):
            raise SizeMismatch(f"{self.n} qubits need {1 << self.n} amplitudes, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits) -> "Register":
        bits = [int(b) for b in bits]
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int("".join(map(str, bits)) or "0", 2)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def empty(cls) -> "Register":
        return cls(0, np.ones(1, dtype=np.complex128))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, bits: str) -> complex:
        return complex(self.amplitudes[int(bits, 2)]) if bits else complex(self.amplitudes[0])

    def as_dict(self, tol: float = 1e-12) -> dict[str, complex]:
        out = {}
        for idx, a in enumerate(self.amplitudes):
            if abs(a) > tol:
                out[format(idx, f"0{self.n}b") if self.n else ""] = complex(a)
        return out

    def allclose(self, other: "Register", tol: float = 1e-9) -> bool:
        return self.n == other.n and bool(np.max(np.abs(self.amplitudes - other.amplitudes)) <= tol)

    def __repr__(self):
        return f"Register({self.n}, {format_register(self)!r})"


@dataclass(frozen=True, eq=False)
class GateDef:
    name: str
    arity: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        dim = 1 << self.arity
        if self.arity < 1 or m.shape != (dim, dim):
            raise BadDimension(f"gate {self.name}: arity {self.arity} needs a {dim}x{dim} matrix, got {m.shape}")
        dev = unitarity_deviation(m)
        if dev > UNITARY_TOL:
            raise NonUnitaryMatrix(self.name, dev)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def unitarity_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


_S2 = 1 / math.sqrt(2)

BUILTIN_MATRICES = {
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
    "H": [[_S2, _S2], [_S2, -_S2]],
    "S": [[1, 0], [0, 1j]],
    "T": [[1, 0], [0, np.exp(1j * math.pi / 4)]],
    "CNOT": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    "CZ": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]],
    "SWAP": [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
}


class GateLibrary(Mapping):
    """Immutable name -> GateDef table."""

    def __init__(self, gates):
        self._gates = MappingProxyType({g.name: g for g in gates})

    def __getitem__(self, name):
        return self._gates[name]

    def __iter__(self):
        return iter(self._gates)

    def __len__(self):
        return len(self._gates)

    def arities(self) -> dict[str, int]:
        return {name: g.arity for name, g in self._gates.items()}

    def merged(self, extra) -> "GateLibrary":
        gates = dict(self._gates)
        for g in extra:
            if g.name in gates:
                raise NameClash(f"gate {g.name} is already defined")
            gates[g.name] = g
        return GateLibrary(gates.values())


BUILTINS = GateLibrary(
    GateDef(name, int(math.log2(len(m))), np.array(m)) for name, m in BUILTIN_MATRICES.items()
)

_GATE_NAME = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


def load_gate_library(text: str, base: GateLibrary = BUILTINS) -> GateLibrary:
    """Parse a JSON gate library and merge it over ``base`` (the built-ins by default).

    Format: ``{"gates": [{"name": "G", "arity": m, "matrix": [[[re, im], ...], ...]}]}``.
    Plain numbers are accepted as real entries.
    """
    try:
        doc = json.loads(text)
        entries = doc["gates"]
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedGateLibrary(f"not a gate library: {exc}") from exc
    gates = []
    seen = set()
    for entry in entries:
        try:
            name = entry["name"]
            arity = int(entry["arity"])
            rows = entry["matrix"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedGateLibrary(f"bad gate entry {entry!r}") from exc
        if not isinstance(name, str) or not _GATE_NAME.match(name):
            raise MalformedGateLibrary(f"gate name {name!r} must be a capitalized identifier")
        if name in seen:
            raise NameClash(f"gate {name} defined twice")
        seen.add(name)
        try:
            matrix = np.array([[_complex_entry(x) for x in row] for row in rows], dtype=np.complex128)
        except (TypeError, ValueError) as exc:
            raise BadDimension(f"gate {name}: malformed matrix") from exc
        gates.append(GateDef(name, arity, matrix))
    return base.merged(gates)


def _complex_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError("complex entries are [re, im] pairs")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def load_gate_file(path) -> GateLibrary:
    with open(path, encoding="utf-8") as fh:
        return load_gate_library(fh.read())


# ---------------------------------------------------------------------------
# operators


def _check_wires(arity: int, wires, n: int):
    wires = list(wires)
    if len(wires) != arity:
        raise ArityMismatch(f"gate of arity {arity} given {len(wires)} wire(s)")
    for w in wires:
        if not 1 <= w <= n:
            raise WireOutOfRange(f"wire {w} outside 1..{n}")
    if len(set(wires)) != len(wires):
        raise DuplicateWire(f"wires {wires} are not distinct")
    return wires


def apply_lifted(gate: GateDef, wires, r: Register) -> Register:
    """Apply ``gate`` with its k-th wire on register qubit ``wires[k]`` (1-based)."""
    wires = _check_wires(gate.arity, wires, r.n)
    m = gate.arity
    axes = [w - 1 for w in wires]
    state = r.amplitudes.reshape((2,) * r.n)
    op = gate.matrix.reshape((2,) * (2 * m))
    # contract the gate's input indices with the chosen register axes; the
    # gate's output indices land in front and are moved back into place
    out = np.tensordot(op, state, axes=(list(range(m, 2 * m)), axes))
    out = np.moveaxis(out, list(range(m)), axes)
    return Register(r.n, out.reshape(-1))


def apply_permutation(perm, r: Register) -> Register:
    """Send ``|b1...bn>`` to ``|b_p(1) ... b_p(n)>``; ``perm`` lists p(1)..p(n), 1-based."""
    perm = tuple(perm)
    if len(perm) != r.n:
        raise SizeMismatch(f"permutation on {len(perm)} elements applied to {r.n} qubits")
    if sorted(perm) != list(range(1, r.n + 1)):
        raise SizeMismatch(f"{perm} is not a permutation of 1..{r.n}")
    if r.n == 0:
        return r
    state = r.amplitudes.reshape((2,) * r.n)
    return Register(r.n, np.transpose(state, [p - 1 for p in perm]).reshape(-1))


def invert_permutation(perm) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm, start=1):
        inv[p - 1] = i
    return tuple(inv)


def compose_permutations(p, q) -> tuple[int, ...]:
    """``(p o q)(i) = p(q(i))``."""
    return tuple(p[qi - 1] for qi in q)


def tensor(r1: Register, r2: Register) -> Register:
    return Register(r1.n + r2.n, np.kron(r1.amplitudes, r2.amplitudes))


# ---------------------------------------------------------------------------
# text format

_COEFF = r"""
    (?P<paren>\((?P<cre>[^()|]*?)\))
  | (?P<isqrt>(?P<isnum>\d+(?:\.\d*)?)?\s*/\s*sqrt\(\s*(?P<isk>\d+(?:\.\d*)?)\s*\))
  | (?P<sqrt>sqrt\(\s*(?P<sk>\d+(?:\.\d*)?)\s*\)(?:\s*/\s*(?P<sden>\d+(?:\.\d*)?))?)
  | (?P<frac>(?P<fnum>\d+(?:\.\d*)?)\s*/\s*(?P<fden>\d+(?:\.\d*)?))
  | (?P<dec>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)
"""
_TERM_RE = re.compile(
    rf"\s*(?P<sign>[-+])?\s*(?:{_COEFF})?\s*(?P<imag>i)?\s*\|(?P<bits>[01]*)>\s*",
    re.VERBOSE,
)


def _real_coeff(m) -> complex:
    if m.group("paren") is not None:
        body = m.group("cre").replace(" ", "").replace("i", "j")
        try:
            return complex(body)
        except ValueError as exc:
            raise MalformedAmplitude(f"bad complex coefficient ({m.group('cre')})") from exc
    if m.group("isqrt") is not None:
        num = float(m.group("isnum") or 1)
        return num / math.sqrt(float(m.group("isk")))
    if m.group("sqrt") is not None:
        return math.sqrt(float(m.group("sk"))) / float(m.group("sden") or 1)
    if m.group("frac") is not None:
        den = float(m.group("fden"))
        if den == 0:
            raise MalformedAmplitude("division by zero in coefficient")
        return float(m.group("fnum")) / den
    if m.group("dec") is not None:
        return float(m.group("dec"))
    return 1.0


def parse_register(text: str, normalize: bool = True) -> Register:
    """Parse ``coeff? i? |bits>`` terms joined by ``+``/``-``.

    Coefficients: decimals, ``a/b``, ``1/sqrt(k)``, ``sqrt(k)/d`` and
    parenthesized complex numbers like ``(0.5-0.5i)``.  Repeated basis states
    add up.  Norms within 1e-6 of 1 are renormalized; anything further off is
    rejected.
    """
    pos = 0
    terms: dict[str, complex] = {}
    width = None
    first = True
    text = text.strip()
    if not text:
        raise MalformedAmplitude("empty register")
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedAmplitude(f"cannot read amplitude at position {pos}: {text[pos:pos + 12]!r}")
        if m.group("sign") is None and not first:
            raise MalformedAmplitude(f"missing '+' or '-' before position {m.start()}")
        first = False
        coeff = _real_coeff(m)
        if m.group("imag"):
            coeff *= 1j
        if m.group("sign") == "-":
            coeff = -coeff
        bits = m.group("bits")
        if width is None:
            width = len(bits)
        elif len(bits) != width:
            raise InconsistentBitWidth(f"|{bits}> has {len(bits)} bits, expected {width}")
        terms[bits] = terms.get(bits, 0) + coeff
        pos = m.end()
    amps = np.zeros(1 << width, dtype=np.complex128)
    for bits, c in terms.items():
        amps[int(bits, 2) if bits else 0] += c
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1) > PARSE_NORM_TOL:
        raise NotNormalized(norm)
    if normalize:
        amps = amps / norm
    return Register(width, amps)


def _format_real(x: float, precision: int) -> str:
    for k in range(1, 17):
        if abs(x - 1 / math.sqrt(k)) <= 1e-9:
            return "" if k == 1 else f"1/sqrt({k})"
    text = f"{x:.{precision}f}".rstrip("0").rstrip(".")
    return text or "0"


def format_register(r: Register, precision: int = 6) -> str:
    """Render a register; ``1/sqrt(k)`` forms are used for k <= 16."""
    cutoff = 0.5 * 10 ** (-precision)
    parts = []
    for idx, a in enumerate(r.amplitudes):
        if abs(a) <= cutoff:
            continue
        ket = f"|{format(idx, f'0{r.n}b') if r.n else ''}>"
        re_, im = float(a.real), float(a.imag)
        if abs(im) <= cutoff:
            sign = "-" if re_ < 0 else "+"
            body = _format_real(abs(re_), precision)
        elif abs(re_) <= cutoff:
            sign = "-" if im < 0 else "+"
            body = _format_real(abs(im), precision) + "i"
        else:
            sign = "+"
            im_text = f"{abs(im):.{precision}f}".rstrip("0").rstrip(".")
            re_text = f"{re_:.{precision}f}".rstrip("0").rstrip(".")
            body = f"({re_text}{'-' if im < 0 else '+'}{im_text}i)"
        parts.append((sign, body + ket))
    if not parts:
        return "0"
    sign, first = parts[0]
    out = ("-" if sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
