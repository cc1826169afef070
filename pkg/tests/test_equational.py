import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SQ
from qlam.equational import (
    NORMAL_FORM,
    SuperposedTerm,
    find_redex,
    normalize,
    reduce_once,
    shape_key,
    substitute,
    to_amplitude_vector,
)
from qlam.errors import NotGroundNormalForm, StepLimitExceeded
from qlam.generate import generate_term
from qlam.syntax import App, LamVar, Var, free_vars, parse, pretty
from qlam.typecheck import typecheck


def nf(text, **kw):
    return normalize(SuperposedTerm.of(parse(text)), **kw)


def amps(text, **kw):
    return to_amplitude_vector(nf(text, **kw)).coefficients


def test_epr_applied_normal_form():
    got = amps(r"(\<x,y>. CNOT ((H x) * y)) (|0> * |1>)")
    assert got.keys() == {"01", "10"}
    assert all(abs(v - SQ) < 1e-12 for v in got.values())


def test_pair_beta_swap():
    assert amps(r"(\<x,y>. y * x) (|0> * |1>)") == {"10": 1}


def test_single_bit():
    assert amps("|0>") == {"0": 1}


def test_hadamard_twice_cancels():
    s = nf(r"H (H |0>)")
    assert len(s) == 1
    assert to_amplitude_vector(s).coefficients == pytest.approx({"0": 1})


def test_lambda_is_not_ground():
    with pytest.raises(NotGroundNormalForm):
        to_amplitude_vector(nf(r"\x. x"))


def test_normal_form_detection():
    s = SuperposedTerm.of(parse("|0> * |1>"))
    assert reduce_once(s) is NORMAL_FORM


def test_step_limit():
    with pytest.raises(StepLimitExceeded):
        nf(r"(\<x,y>. CNOT ((H x) * y)) (|0> * |1>)", max_steps=1)


def test_capture_avoiding_substitution():
    body = parse(r"\y. x * y")
    out = substitute(body, {"x": Var("y")})
    assert isinstance(out, LamVar) and out.var != "y"
    assert dict(free_vars(out)) == {"y": 1}


def test_substitution_under_shadowing_binder():
    t = parse(r"\x. x")
    assert substitute(t, {"x": Var("z")}) == t


def test_shape_key_ignores_labels_and_binder_names():
    assert shape_key(parse("|0>_1 * |1>_2")) == shape_key(parse("|0>_7 * |1>_3"))
    assert shape_key(parse(r"\a. a")) == shape_key(parse(r"\b. b"))
    assert shape_key(parse("|0> * |1>")) != shape_key(parse("|1> * |0>"))


def test_innermost_redex_positions():
    t = parse(r"(\x. x) ((\y. y) |0>)")
    assert find_redex(t, "leftmost") == (1,)
    t2 = parse(r"((\x. x) |0>) * ((\y. y) |1>)")
    assert find_redex(t2, "leftmost") == (0,)
    assert find_redex(t2, "rightmost") == (1,)


def test_show_steps_callback_sees_every_round():
    seen = []
    nf(r"(\<x,y>. CNOT ((H x) * y)) (|0> * |1>)", on_step=seen.append)
    assert len(seen) == 3
    assert len(seen[1]) == 2


def ground_terms():
    return st.integers(0, 10**6).map(lambda s: generate_term(s, 6, 4))


@given(ground_terms())
@settings(max_examples=60, deadline=None)
def test_norm_is_conserved_by_each_round(t):
    s = SuperposedTerm.of(t)
    while True:
        assert abs(s.squared_norm() - 1) <= 1e-9
        nxt = reduce_once(s)
        if nxt is NORMAL_FORM:
            break
        s = nxt


@given(ground_terms())
@settings(max_examples=60, deadline=None)
def test_strategy_irrelevance(t):
    left = to_amplitude_vector(normalize(SuperposedTerm.of(t), strategy="leftmost")).to_register()
    right = to_amplitude_vector(normalize(SuperposedTerm.of(t), strategy="rightmost")).to_register()
    assert left.allclose(right, 1e-9)


@given(ground_terms())
@settings(max_examples=40, deadline=None)
def test_every_reduct_keeps_its_type(t):
    s = SuperposedTerm.of(t)
    while (nxt := reduce_once(s)) is not NORMAL_FORM:
        for summand in nxt:
            assert typecheck((), summand.term).type == s.type
        s = nxt


def test_summand_derivation_is_lazy_and_cached():
    s = reduce_once(SuperposedTerm.of(parse(r"(\x. H x) |0>")))
    (summand,) = s.summands
    assert "derivation" not in summand.__dict__
    d = summand.derivation
    assert summand.derivation is d
    assert pretty(d.term) == "H |0>_1"


def test_opaque_non_ground_printing():
    out = str(nf(r"\x. (\y. y) x"))
    assert out == r"\x. x"


def test_gate_on_open_argument_is_stuck():
    s = normalize(SuperposedTerm.of(parse(r"\x. H x")))
    assert isinstance(s.summands[0].term, LamVar)
    assert isinstance(s.summands[0].term.body, App)
