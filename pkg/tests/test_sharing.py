import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from annulus_nev import DegenerateTargetsError, parse
from annulus_nev.expr import evaluate_array, sample_points, wrap_rational
from annulus_nev.reports import FAIL, PASS, verdicts_by_id
from annulus_nev.sharing import (
    FiniteSet,
    bound_table,
    build_ps,
    build_theorem13_objects,
    check_auxiliary_bounds,
    evaluate_bound,
    minimal_q,
    shares_set,
    truncated_sum,
)
from helpers import random_rational

X = sp.Symbol("z")


def _sym_critical(values):
    P = sp.prod([X - sp.nsimplify(v) for v in values])
    return [complex(sp.N(r, 30)) for r in sp.roots(sp.Poly(sp.diff(P, X), X))]


@pytest.mark.parametrize(
    "values, k",
    [([0, 1], 1), ([0, 1, 2], 2), ([0, 1, 2, 3], 3), ([-1, 0, 0, 1], None), ([1, 1j, -1, -1j], 1)],
)
def test_build_ps_against_sympy(values, k):
    if k is None:
        with pytest.raises(DegenerateTargetsError):
            FiniteSet(values)
        return
    P, kk, crit = build_ps(FiniteSet(values))
    assert kk == k
    # z^4 - 1 has P' = 4 z^3: one distinct critical zero
    expected = {complex(round(c.real, 8), round(c.imag, 8)) for c in _sym_critical(values)}
    got = {complex(round(c.real, 8), round(c.imag, 8)) for c in crit}
    assert got == expected
    assert P.lead == 1 and P.degree == len(values)


def test_finite_set_errors():
    with pytest.raises(DegenerateTargetsError):
        FiniteSet([])
    with pytest.raises(DegenerateTargetsError):
        FiniteSet([2, 2 + 1e-12])
    with pytest.raises(ValueError):
        build_ps(FiniteSet([3]))
    assert FiniteSet([1, 2, 3]).q == 3


def test_truncated_sum_levels():
    # f - 2 = (z-2)^3 has a triple zero; f - 0 has three simple zeros
    f = parse("(z-2)^3 + 2")
    assert truncated_sum(f, FiniteSet([2]), math.inf).degree == 3
    assert truncated_sum(f, FiniteSet([2]), 2).degree == 2
    assert truncated_sum(f, FiniteSet([2]), 1).degree == 1
    assert truncated_sum(f, FiniteSet([0]), 1).degree == 3
    assert truncated_sum(f, FiniteSet([0, 2]), 1).degree == 4


def test_shares_examples():
    assert shares_set(parse("z^2"), parse("z^2"), FiniteSet([1.5])).shares
    # z = 2 vs 1/z = 2 happen at different points
    assert not shares_set(parse("z"), parse("1/z"), FiniteSet([2])).shares
    # the reflection z -> 3 - z swaps the preimages of 0 and 3
    assert shares_set(parse("3-z"), parse("z"), FiniteSet([0, 3])).shares
    # multiplicities matter at level inf but not at level 1
    f = parse("(z-3)^2")
    assert not shares_set(f, parse("z-3"), FiniteSet([0]), math.inf).shares
    assert shares_set(f, parse("z-3"), FiniteSet([0]), 1).shares


@settings(max_examples=20)
@given(seed=st.integers(0, 10_000))
def test_sharing_reflexive_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    f = wrap_rational(random_rational(rng, max_deg=4, allow_multiple=True)[0])
    g = wrap_rational(random_rational(rng, max_deg=4, allow_multiple=True)[0])
    S = FiniteSet([0.5 + 0.25j, -3.0])
    for level in (1, 2, math.inf):
        assert shares_set(f, f, S, level).shares
        assert shares_set(f, g, S, level).shares == shares_set(g, f, S, level).shares


def test_sharing_objects_mobius_pair():
    objs = build_theorem13_objects([parse("3-z")], parse("z"), FiniteSet([0, 3]))
    assert len(objs.fs) == 2
    zs = sample_points(8, seed=3)
    for psi in objs.Psi:
        v, p = evaluate_array(psi, zs)
        assert not p.any() and np.allclose(v, 1, atol=1e-12)
    for a in objs.alphas:
        v, _ = evaluate_array(a, zs)
        assert np.allclose(v, 0, atol=1e-12)
    assert max(objs.identity_error) < 1e-10


def test_sharing_objects_identity_transcendental():
    objs = build_theorem13_objects([parse("1-exp(z)"), parse("2*exp(z)")], parse("exp(z)"), FiniteSet([0, 1, 3]))
    assert objs.k == 2
    assert len(objs.fs) == 3
    assert max(objs.identity_error) < 1e-8


def _oracle_threshold(k, l):
    if l == math.inf:
        return sp.Rational(5 * k + 3, 2)
    return sp.Rational((5 * k + 3) * l, 2 * l - 175)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("l", [88, 100, math.inf])
def test_bound_threshold_exact(k, l):
    want = _oracle_threshold(k, l)
    b = evaluate_bound(minimal_q(k, l), k, l)
    assert b.exact == Fraction(int(want.p), int(want.q))
    assert b.satisfied and not b.vacuous
    # the least satisfying q really is least
    assert not evaluate_bound(minimal_q(k, l) - 1, k, l).satisfied if minimal_q(k, l) > 2 else True


def test_bound_known_values():
    assert evaluate_bound(704, 1, 88).exact == Fraction(704)
    assert not evaluate_bound(704, 1, 88).satisfied
    assert evaluate_bound(705, 1, 88).satisfied
    b = evaluate_bound(7, 2, math.inf)
    assert b.exact == Fraction(13, 2) and b.satisfied
    assert b.to_row()["threshold"] == "13/2"


@pytest.mark.parametrize("l", [1, 50, 87])
def test_bound_vacuous(l):
    b = evaluate_bound(100, 1, l)
    assert b.vacuous and not b.satisfied and math.isinf(b.threshold)
    assert minimal_q(1, l) is None


def test_bound_table_shape():
    rows = bound_table([1, 2, 3], [88, 100, math.inf])
    assert len(rows) == 9
    assert all(r.satisfied for r in rows)
    assert bound_table([1], [87])[0].vacuous


def test_bound_rejects_bad_input():
    with pytest.raises(ValueError):
        evaluate_bound(1, 1)
    with pytest.raises(ValueError):
        evaluate_bound(5, 0)


def test_auxiliary_bounds_exp():
    S = FiniteSet([0, 1, 3, -2, 5])
    reps = check_auxiliary_bounds([parse("1-exp(z)")], parse("exp(z)"), S, math.inf, [2, 4, 8, 16])
    v = verdicts_by_id(reps)
    assert set(v) == {"phi-lower[1]", "phi-lower[2]", "phi-upper", "chain"}
    assert FAIL not in v.values()
    assert v["chain"] == PASS
