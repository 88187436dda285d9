import dataclasses

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given
from hypothesis import strategies as st

from annulus_nev import ExprSyntaxError, PoleSignal, differentiate, evaluate, is_identically_equal, parse, to_text
from annulus_nev.errors import NotRationalError
from annulus_nev.expr import (
    Const,
    Exp,
    Rational,
    Z,
    evaluate_array,
    fold_rational,
    log_derivative,
    sample_points,
    sampled_identity,
    simplify_rational,
)

X = sp.Symbol("z")

# -- strategies: expression text readable by both our parser and sympy -------------

coef = st.integers(-3, 3).filter(lambda c: c != 0)
laurent_text = st.lists(st.tuples(coef, st.integers(-2, 2)), min_size=1, max_size=3).map(
    lambda ts: " + ".join(f"({c})*z^({k})" for c, k in ts)
)
leaf = st.one_of(
    st.just("z"),
    st.integers(1, 5).map(str),
    st.tuples(st.integers(-3, 3), st.integers(1, 3)).map(lambda t: f"(z - ({t[0]}))^{t[1]}"),
    laurent_text.map(lambda s: f"exp({s})"),
)


def _combine(children):
    return st.tuples(children, st.sampled_from(["+", "-", "*", "/"]), children).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})")


expr_text = st.recursive(leaf, _combine, max_leaves=5)


def sym(text):
    return sp.sympify(text.replace("^", "**"), locals={"z": X, "exp": sp.exp})


def parse_or_skip(text):
    try:
        return parse(text)
    except ExprSyntaxError:
        assume(False)


ZS = sample_points(8, seed=3, r_min=0.6, r_max=1.6)


def agree(ours, theirs_fn, zs=ZS, rtol=1e-7):
    v, p = evaluate_array(ours, zs, check_overflow=False)
    for z, a, is_pole in zip(zs, v, p):
        b = complex(theirs_fn(z))
        if is_pole or not np.isfinite(b) or abs(b) > 1e12:
            continue
        assert abs(a - b) <= rtol * (1 + abs(b)), (z, a, b)


# -- evaluation ---------------------------------------------------------------------


def test_evaluate_simple_values_and_pole_signal():
    e = parse("(z-2)^2/(z-3)")
    assert abs(evaluate(e, 1) - (1 / -2)) < 1e-15
    assert isinstance(evaluate(e, 3), PoleSignal)
    assert abs(evaluate(parse("exp(z)"), 1j * np.pi) + 1) < 1e-15
    with pytest.raises(ValueError):
        evaluate(parse("exp(z)"), 0)


def test_exp_overflow_raises():
    with pytest.raises(OverflowError):
        evaluate_array(parse("exp(z)"), np.array([800.0 + 0j]))


@given(expr_text)
def test_evaluation_matches_sympy(text):
    e = parse_or_skip(text)
    agree(e, sp.lambdify(X, sym(text), "numpy"))


# -- derivatives ----------------------------------------------------------------------


@given(expr_text)
def test_derivative_matches_sympy(text):
    e = parse_or_skip(text)
    d = differentiate(e)
    agree(d, sp.lambdify(X, sp.diff(sym(text), X), "numpy"), rtol=1e-6)


def test_derivative_examples():
    assert is_identically_equal(differentiate(parse("exp(z + 1/z)")), parse("(1 - 1/z^2)*exp(z + 1/z)"))
    assert is_identically_equal(differentiate(parse("1/(z-1)")), parse("-1/(z-1)^2"))


@given(expr_text)
def test_log_derivative_is_derivative_over_function(text):
    e = parse_or_skip(text)
    v, p = evaluate_array(e, ZS, check_overflow=False)
    assume(not np.any(p) and np.all(np.abs(v) > 1e-6))
    ld = log_derivative(e)
    ref = differentiate(e, check=False) / e
    a, pa = evaluate_array(ld, ZS, check_overflow=False)
    b, pb = evaluate_array(ref, ZS, check_overflow=False)
    ok = ~(pa | pb)
    assert np.all(np.abs(a[ok] - b[ok]) <= 1e-7 * (1 + np.abs(b[ok])))


# -- identity ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "a, b, same",
    [
        ("exp(z)*exp(-z)", "1", True),
        ("(z^2-1)/(z-1)", "z+1", True),
        ("exp(2*z)", "exp(z)^2", True),
        ("exp(z) + exp(1/z)", "exp(1/z) + exp(z)", True),
        ("exp(z)", "exp(z) + 1e-30*z", False),
        ("exp(z)", "exp(z+1e-20)", True),
        ("z", "z + 1e-3", False),
        ("exp(z)/(exp(z)+1)", "1 - 1/(exp(z)+1)", True),
    ],
)
def test_exact_identity(a, b, same):
    assert is_identically_equal(parse(a), parse(b)) is same
    assert is_identically_equal(parse(b), parse(a)) is same


def test_sampled_identity_cannot_see_tiny_perturbation():
    a, b = parse("exp(z)"), parse("exp(z) + 1e-30*z")
    assert sampled_identity(a, b)
    assert is_identically_equal(a, b, method="sampled")
    assert not is_identically_equal(a, b, method="exact")


@given(expr_text)
def test_identity_is_reflexive_and_symmetric_with_rewrites(text):
    e = parse_or_skip(text)
    assert is_identically_equal(e, e)
    rewritten = (e + Z) - Z
    assert is_identically_equal(e, rewritten) and is_identically_equal(rewritten, e)


# -- rational folding and structure -------------------------------------------------


def test_fold_and_simplify_rational():
    e = parse("(z^2 - 1)/(z - 1) + 1/z")
    r = fold_rational(e)
    assert r.num.degree == 2 and r.den.degree == 1
    s = simplify_rational(e)
    assert isinstance(s, Rational)
    with pytest.raises(NotRationalError):
        fold_rational(parse("exp(z)"))


def test_nodes_are_immutable_and_hashable():
    e = parse("exp(z) * (z-1)")
    with pytest.raises(dataclasses.FrozenInstanceError):
        e.a = Const(1)
    assert hash(e) == hash(parse("exp(z) * (z-1)"))
    assert e == parse("exp(z) * (z-1)")
    assert isinstance(parse("exp(z)"), Exp)


def test_to_text_is_parseable_and_stable():
    for text in ["z", "(z-2)^2/(z-3)", "exp(z + 1/z) * (z-1)", "-exp(-2*z^-3)", "(1.5, -2.25)*z"]:
        e = parse(text)
        assert parse(to_text(e)) == e
        assert to_text(parse(to_text(e))) == to_text(e)


@given(expr_text)
def test_round_trip_property(text):
    e = parse_or_skip(text)
    assert parse(to_text(e)) == e
