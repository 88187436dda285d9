import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from annulus_nev import IllConditionedError, parse
from annulus_nev.divisors import Divisor, cluster_roots, divisor_of, locate_zeros, rational_divisors
from annulus_nev.errors import IdenticallyZeroError
from annulus_nev.expr import fold_rational
from annulus_nev.polynomials import Polynomial, RationalFn

from helpers import multiset, random_rational

point = st.tuples(st.floats(-5, 5), st.floats(-5, 5)).map(lambda t: complex(round(t[0], 3), round(t[1], 3))).filter(
    lambda z: abs(z) > 0.2
)
divisor = st.lists(st.tuples(point, st.integers(-3, 4).filter(bool)), max_size=6).map(Divisor.build)


def test_build_merges_and_sorts():
    d = Divisor.build([(2, 1), (1j, 2), (2 + 1e-9, 1), (-3, -1), (5, 1), (5, -1)])
    assert d.points == ((1j, 2), (2, 2), (-3, -1))
    assert d.degree == 3
    assert d.multiplicity_at(2.0) == 2


def test_truncation_and_filters():
    d = Divisor.build([(2, 3), (3, 1), (4, -2)])
    assert d.truncate(1).points == ((2, 1), (3, 1), (4, -2))
    assert d.truncate(math.inf) == d
    assert d.filter_at_least(2).points == ((2, 3),)
    assert d.positive_part().degree == 4
    assert d.restrict(3.5).points == ((2, 3), (3, 1))
    with pytest.raises(ValueError):
        d.truncate(0)


@given(divisor, divisor)
def test_group_laws(a, b):
    assert (a + b).same_as(b + a)
    assert (a - a).degree == 0 and len(a - a) == 0
    assert (a + b).degree == a.degree + b.degree
    assert (a - b + b).same_as(a)


@given(divisor, st.integers(1, 4))
def test_truncation_is_monotone(d, M):
    lo, hi = d.truncate(M), d.truncate(M + 1)
    for z, m in d.positive_part():
        assert lo.multiplicity_at(z) <= hi.multiplicity_at(z) <= m


@given(divisor)
def test_json_round_trip(d):
    back = Divisor.from_json(d.to_json(), d.valid_outer)
    assert back == d
    assert Divisor.from_json(__import__("json").loads(d.dumps())) == d


@pytest.mark.parametrize(
    "roots",
    [[1, 1, 1, 2], [0.5j] * 5 + [3], [2] * 6 + [-1] * 2, [1, 2, 3, 4, 5], [1 + 1j, 1 - 1j, 1 + 1j]],
)
def test_cluster_roots_against_sympy(roots):
    p = Polynomial.from_roots(roots)
    w = sp.Symbol("w")
    expr = sp.prod([(w - sp.nsimplify(r)) for r in roots])
    expect = sp.roots(sp.Poly(sp.expand(expr), w))
    got = cluster_roots(p)
    assert len(got) == len(expect)
    for z, m in got:
        match = [k for k in expect if abs(complex(k) - z) < 1e-6]
        assert len(match) == 1 and expect[match[0]] == m


def test_wilkinson_is_ill_conditioned():
    with pytest.raises(IllConditionedError):
        cluster_roots(Polynomial.from_roots(range(1, 21)))


def test_critical_points_of_symmetric_set_are_not_merged():
    got = cluster_roots(Polynomial.from_roots([0, 1, 2, 3]).derivative())
    assert sorted(round(z.real, 9) for z, _ in got) == [round(1.5 - math.sqrt(5) / 2, 9), 1.5, round(1.5 + math.sqrt(5) / 2, 9)]
    got = cluster_roots(Polynomial((1, 0, 0, 0, 1)))
    assert [m for _, m in got] == [1, 1, 1, 1]


@pytest.mark.parametrize("seed", range(15))
def test_rational_divisors_recover_construction(seed):
    rng = np.random.default_rng(seed)
    fn, zeros, poles = random_rational(rng)
    Z, P = rational_divisors(fn, 10.0)
    assert Z.same_as(Divisor.build(multiset(zeros))) and P.same_as(Divisor.build(multiset(poles)))


@pytest.mark.parametrize("seed", range(15))
def test_contour_route_matches_rational_route(seed):
    rng = np.random.default_rng(100 + seed)
    fn, _, _ = random_rational(rng)
    from annulus_nev.expr import wrap_rational

    e = wrap_rational(fn)
    for target in (0, None):
        a = divisor_of(e, target, 10.0, method="rational")
        b = divisor_of(e, target, 10.0, method="contour")
        R = min(a.valid_outer, b.valid_outer)
        assert a.restrict(R).same_as(b.restrict(R))


def test_rational_divisors_net_common_factors():
    f = RationalFn(Polynomial.from_roots([2, 3]), Polynomial.from_roots([2]))
    Z, P = rational_divisors(f, 10)
    assert Z.points == ((3, 1),) and len(P) == 0


def test_zero_function():
    with pytest.raises(IdenticallyZeroError):
        rational_divisors(RationalFn.constant(0))
    assert len(divisor_of(parse("0"), None, 5.0)) == 0


def test_exp_minus_one_zero_set():
    d = locate_zeros(parse("exp(z) - 1"), 0, 20.0)
    expect = sorted((2j * math.pi * k for k in (-3, -2, -1, 1, 2, 3)), key=lambda z: (abs(z), np.angle(z) % (2 * math.pi)))
    assert len(d) == 6
    for (z, m), e in zip(d, expect):
        assert m == 1 and abs(z - e) < 1e-8


def test_multiple_zero_of_transcendental():
    d = locate_zeros(parse("(z-2)^3*exp(z) + 0*z"), 0, 5.0)
    assert d.points[0][1] == 3 and abs(d.points[0][0] - 2) < 1e-6
    d = locate_zeros(parse("exp(z)*(z-1.5i)^2*(z+3)"), 0, 5.0)
    assert sorted(m for _, m in d) == [1, 2]


def test_target_and_pole_divisors_of_transcendental():
    e = parse("exp(z)/(z-2)")
    assert divisor_of(e, None, 5.0).points == ((2, 1),)
    ones = divisor_of(parse("exp(z)"), 1, 7.0)
    assert len(ones) == 2  # +-2 pi i


def test_module_level_truncate_and_filter():
    from annulus_nev.divisors import filter_at_least, truncate

    d = Divisor.build([(2.0, 3), (3.0, 1), (-4.0, 2)], 10.0)
    assert sorted(m for _, m in truncate(d, 2)) == [1, 2, 2]
    assert sorted(m for _, m in filter_at_least(d, 2)) == [2, 3]
