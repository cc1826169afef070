import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlam.errors import DuplicateBitLabel, ParseError
from qlam.generate import generate_term
from qlam.syntax import (
    QUBIT,
    App,
    Bit,
    Gate,
    LamPair,
    LamVar,
    Lolli,
    Tensor,
    TensorT,
    Var,
    bits_of,
    free_vars,
    gates_of,
    parse,
    parse_type,
    pretty,
    qubits,
)

EPR = LamPair("x", "y", App(Gate("CNOT"), Tensor(App(Gate("H"), Var("x")), Var("y"))))


def test_parse_epr():
    assert parse(r"\<x,y>. CNOT ((H x) * y)") == EPR
    assert parse(r"λ<x,y>. CNOT ((H x) ⊗ y)") == EPR


def test_pretty_epr():
    assert pretty(EPR) == r"\<x,y>. CNOT ((H x) * y)"


def test_bits_are_labelled_left_to_right():
    assert parse("|0> * |1>") == Tensor(Bit(0, 1), Bit(1, 2))
    assert pretty(Tensor(Bit(0, 1), Bit(1, 2))) == "|0>_1 * |1>_2"


def test_auto_labels_skip_explicit_ones():
    t = parse("|0> * |1>_1")
    assert [b.label for b in bits_of(t)] == [2, 1]


def test_duplicate_label_rejected():
    with pytest.raises(DuplicateBitLabel):
        parse("|0>_1 * |1>_1")


@pytest.mark.parametrize("text", ["\\x.", "(x", "x )", "|2>", "\\<x,x>. x", "x * "])
def test_syntax_errors(text):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.code == "SyntaxError"


def test_precedence_and_associativity():
    assert parse("f x y") == App(App(Var("f"), Var("x")), Var("y"))
    assert parse("a * b * c") == Tensor(Var("a"), Tensor(Var("b"), Var("c")))
    assert parse("f x * y") == Tensor(App(Var("f"), Var("x")), Var("y"))
    assert parse("\\x. x * y") == LamVar("x", Tensor(Var("x"), Var("y")))
    assert parse("f \\x. x") == App(Var("f"), LamVar("x", Var("x")))


def test_comments_ignored():
    assert parse("-- a comment\n|0> -- trailing\n") == Bit(0, 1)


def test_free_vars_and_gates():
    t = parse("\\x. CNOT (x * y)")
    assert dict(free_vars(t)) == {"y": 1}
    assert gates_of(EPR) == ["CNOT", "H"]


def test_types():
    assert qubits(3) == TensorT(QUBIT, TensorT(QUBIT, QUBIT))
    assert parse_type("B * B -o B * B") == Lolli(qubits(2), qubits(2))
    assert str(Lolli(Lolli(QUBIT, QUBIT), QUBIT)) == "(B -o B) -o B"
    assert parse_type(str(Lolli(qubits(2), qubits(2)))) == Lolli(qubits(2), qubits(2))


@given(st.integers(0, 10**6), st.booleans())
@settings(max_examples=150, deadline=None)
def test_round_trip_generated(seed, ground):
    t = generate_term(seed, 6, 4, ground=ground)
    assert parse(pretty(t)) == t
    labels = [b.label for b in bits_of(t)]
    assert len(labels) == len(set(labels))
