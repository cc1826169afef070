import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CNOT, H, SQ, X, basis_vector, lifted_matrix, qubit_permutation_matrix, random_state
from qlam.errors import (
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
from qlam.quantum import (
    BUILTINS,
    GateDef,
    Register,
    apply_lifted,
    apply_permutation,
    compose_permutations,
    format_register,
    invert_permutation,
    load_gate_library,
    parse_register,
    tensor,
)


def reg(vec):
    vec = np.asarray(vec, dtype=complex)
    return Register(int(np.log2(vec.size)), vec)


def test_builtin_gates_are_unitary_with_expected_arity():
    expected = {"X": 1, "Y": 1, "Z": 1, "H": 1, "S": 1, "T": 1, "CNOT": 2, "CZ": 2, "SWAP": 2}
    assert BUILTINS.arities() == expected
    for g in BUILTINS.values():
        m = g.matrix
        assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12)


def test_hadamard_and_cnot_match_textbook_matrices():
    assert np.allclose(BUILTINS["H"].matrix, H)
    assert np.allclose(BUILTINS["CNOT"].matrix, CNOT)


def test_gate_validation():
    with pytest.raises(NonUnitaryMatrix):
        GateDef("Bad", 1, [[1, 1], [0, 1]])
    with pytest.raises(BadDimension):
        GateDef("Bad", 2, np.eye(2))


def test_cnot_on_wires_three_one():
    out = apply_lifted(BUILTINS["CNOT"], (3, 1), Register.basis("001"))
    assert out.as_dict() == {"101": 1}


def test_x_on_second_wire():
    assert apply_lifted(BUILTINS["X"], (2,), Register.basis("00")).as_dict() == {"01": 1}


def test_lift_errors():
    r = Register.basis("00")
    with pytest.raises(ArityMismatch):
        apply_lifted(BUILTINS["CNOT"], (1,), r)
    with pytest.raises(WireOutOfRange):
        apply_lifted(BUILTINS["X"], (3,), r)
    with pytest.raises(DuplicateWire):
        apply_lifted(BUILTINS["CNOT"], (1, 1), r)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_lift_matches_kronecker_oracle(name):
    gate = BUILTINS[name]
    rng = np.random.default_rng(7)
    for n in range(gate.arity, 5):
        for wires in itertools.permutations(range(1, n + 1), gate.arity):
            m = lifted_matrix(gate.matrix, wires, n)
            v = random_state(rng, n)
            got = apply_lifted(gate, wires, Register(n, v)).amplitudes
            assert np.max(np.abs(got - m @ v)) <= 1e-12


def test_permutation_oracle_agreement():
    rng = np.random.default_rng(3)
    for perm in itertools.permutations(range(1, 4)):
        v = random_state(rng, 3)
        got = apply_permutation(perm, Register(3, v)).amplitudes
        assert np.allclose(got, qubit_permutation_matrix(perm) @ v, atol=1e-12)


def test_swap_permutation_on_basis():
    assert apply_permutation((2, 1), Register.basis("10")).as_dict() == {"01": 1}
    with pytest.raises(SizeMismatch):
        apply_permutation((1, 2), Register.basis("1"))


perms = st.integers(1, 5).flatmap(lambda n: st.permutations(list(range(1, n + 1))))


@given(perms, st.randoms())
@settings(max_examples=60, deadline=None)
def test_permutation_action_is_contravariant(p, rnd):
    q = list(p)
    rnd.shuffle(q)
    n = len(p)
    v = random_state(np.random.default_rng(rnd.randint(0, 10**6)), n)
    r = Register(n, v)
    pq = compose_permutations(p, q)
    # acting by p o q is acting by p first, then by q
    lhs = apply_permutation(pq, r)
    rhs = apply_permutation(q, apply_permutation(p, r))
    assert lhs.allclose(rhs, 1e-12)
    back = apply_permutation(invert_permutation(p), apply_permutation(p, r))
    assert back.allclose(r, 1e-12)


@given(st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_lifting_preserves_norm(n, seed):
    rng = np.random.default_rng(seed)
    r = Register(n, random_state(rng, n))
    for name in ("H", "T", "CNOT", "SWAP"):
        g = BUILTINS[name]
        if g.arity > n:
            continue
        wires = tuple(rng.permutation(np.arange(1, n + 1))[: g.arity])
        r = apply_lifted(g, wires, r)
    assert abs(r.norm() - 1) <= 1e-9


def test_tensor_is_kron():
    a = reg([SQ, SQ])
    b = Register.basis("1")
    assert np.allclose(tensor(a, b).amplitudes, np.kron(a.amplitudes, b.amplitudes))


# -- text format -------------------------------------------------------------


def test_parse_bell_state():
    r = parse_register("1/sqrt(2)|01> + 1/sqrt(2)|10>")
    assert np.allclose(r.amplitudes, [0, SQ, SQ, 0])


@pytest.mark.parametrize(
    "text, expected",
    [
        ("|0>", {"0": 1}),
        ("|>", {"": 1}),
        ("0.6|0> + 0.8|1>", {"0": 0.6, "1": 0.8}),
        ("3/5|0> - 4/5i|1>", {"0": 0.6, "1": -0.8j}),
        ("(0.6+0.8i)|1>", {"1": 0.6 + 0.8j}),
        ("sqrt(3)/2|0> + 1/2|1>", {"0": np.sqrt(3) / 2, "1": 0.5}),
    ],
)
def test_parse_register_forms(text, expected):
    got = parse_register(text).as_dict()
    assert got.keys() == expected.keys()
    for k in expected:
        assert abs(got[k] - expected[k]) < 1e-12


def test_parse_register_errors():
    with pytest.raises(NotNormalized):
        parse_register("|0> + |1>")
    with pytest.raises(InconsistentBitWidth):
        parse_register("1/sqrt(2)|0> + 1/sqrt(2)|11>")
    with pytest.raises(MalformedAmplitude):
        parse_register("hello|0>")


def test_slightly_off_norm_is_renormalized():
    r = parse_register("0.7071068|0> + 0.7071068|1>")
    assert abs(r.norm() - 1) < 1e-12


def test_format_register():
    assert format_register(reg([0, SQ, SQ, 0])) == "1/sqrt(2)|01> + 1/sqrt(2)|10>"
    assert format_register(reg([0, SQ, -SQ, 0])) == "1/sqrt(2)|01> - 1/sqrt(2)|10>"
    assert format_register(Register.basis("10")) == "|10>"
    assert format_register(reg([0.6, 0.8j])) == "0.6|0> + 0.8i|1>"


@given(st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_format_parse_round_trip(n, seed):
    r = Register(n, random_state(np.random.default_rng(seed), n))
    back = parse_register(format_register(r, precision=12))
    assert back.allclose(r, 1e-9)


def test_gate_library_json():
    text = '{"gates": [{"name": "V", "arity": 1, "matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]}]}'
    lib = load_gate_library(text)
    assert lib["V"].arity == 1 and "H" in lib
    assert np.allclose(lib["V"].matrix, X)
    with pytest.raises(NameClash):
        load_gate_library('{"gates": [{"name": "H", "arity": 1, "matrix": [[1,0],[0,1]]}]}')
    with pytest.raises(MalformedGateLibrary):
        load_gate_library('{"gates": [{"name": "lower", "arity": 1, "matrix": [[1,0],[0,1]]}]}')
    with pytest.raises(MalformedGateLibrary):
        load_gate_library("not json")


def test_bad_register_size():
    with pytest.raises(SizeMismatch):
        Register(2, np.ones(3))


def test_basis_vector_oracle_consistency():
    for bits in ("0", "10", "011"):
        assert np.allclose(Register.basis(bits).amplitudes, basis_vector(bits))
