import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlam.generate import generate_term
from qlam.syntax import QUBIT, bits_of, free_vars, is_ground, parse, pretty
from qlam.typecheck import noccs, poccs, typecheck


def test_smallest_case_is_a_bit():
    for seed in range(20):
        t = generate_term(seed, 1, 1)
        assert typecheck((), t).type == QUBIT
        assert len(bits_of(t)) == 1


def test_deterministic_in_seed():
    assert generate_term(42, 8, 6) == generate_term(42, 8, 6)
    assert any(generate_term(s, 8, 6) != generate_term(42, 8, 6) for s in range(5))


def test_rejects_bad_bounds():
    with pytest.raises(ValueError):
        generate_term(0, 0, 3)


@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 6))
@settings(max_examples=200, deadline=None)
def test_ground_terms_are_closed_and_bounded(seed, depth, width):
    t = generate_term(seed, depth, width)
    d = typecheck((), t)
    assert not free_vars(t)
    assert is_ground(d.type)
    # linearity conserves qubits: the register is exactly the output width
    assert len(bits_of(t)) == len(poccs(d.type)) <= width
    assert parse(pretty(t)) == t


@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 6))
@settings(max_examples=100, deadline=None)
def test_function_terms_are_bounded(seed, depth, width):
    d = typecheck((), generate_term(seed, depth, width, ground=False))
    assert len(noccs(d.type)) + len(bits_of(d.term)) == len(poccs(d.type)) <= width


def test_corpus_has_variety():
    kinds = set()
    for seed in range(200):
        text = pretty(generate_term(seed, 8, 6))
        for marker in ("\\<", "\\f", "CNOT", "SWAP", "H ", "*"):
            if marker in text:
                kinds.add(marker)
    assert kinds == {"\\<", "\\f", "CNOT", "SWAP", "H ", "*"}
