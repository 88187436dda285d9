"""Symbolic meromorphic test functions on the annulus.

The class is closed under field operations and differentiation: rational
functions, ``exp`` of a Laurent polynomial, and sums/products/quotients of
those.  Expressions are immutable trees.  The module-level builders
(:func:`add`, :func:`mul`, ...) fold every subtree that is purely rational
into a single reduced :class:`Rational` node, so structurally equal trees
describe equal functions far more often than raw trees would.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from .errors import NotRationalError
from .polynomials import LaurentPolynomial, Polynomial, RationalFn

POLE_THRESHOLD = 1e-12
OVERFLOW_CAP = 1e300
DEFAULT_SEED = 20240607

Number = Union[int, float, complex]


class PoleSignal:
    """Returned by :func:`evaluate` in place of a value at a pole."""

    __slots__ = ("z",)

    def __init__(self, z: complex):
        self.z = z

    def __repr__(self):
        return f"PoleSignal({self.z!r})"

    def __eq__(self, other):
        return isinstance(other, PoleSignal) and other.z == self.z

    def __hash__(self):
        return hash(("pole", self.z))


class MeroExpr:
    """Base class of expression nodes.

    Equality is structural; the hash is computed once and cached because
    trees are used as memo keys all over the package.
    """

    __slots__ = ()

    def _fields(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return self._fields() == other._fields()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__, self._fields()))
            self.__dict__["_hash"] = h
        return h

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return power(self, n)

    def __repr__(self):
        return f"{type(self).__name__}<{to_text(self)}>"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=False, repr=False)
class Const(MeroExpr):
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError("constants must be finite")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True, eq=False, repr=False)
class Var(MeroExpr):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Rational(MeroExpr):
    fn: RationalFn


@dataclass(frozen=True, eq=False, repr=False)
class Exp(MeroExpr):
    arg: LaurentPolynomial


@dataclass(frozen=True, eq=False, repr=False)
class Add(MeroExpr):
    a: MeroExpr
    b: MeroExpr


@dataclass(frozen=True, eq=False, repr=False)
class Sub(MeroExpr):
    a: MeroExpr
    b: MeroExpr


@dataclass(frozen=True, eq=False, repr=False)
class Mul(MeroExpr):
    a: MeroExpr
    b: MeroExpr


@dataclass(frozen=True, eq=False, repr=False)
class Div(MeroExpr):
    a: MeroExpr
    b: MeroExpr


@dataclass(frozen=True, eq=False, repr=False)
class Neg(MeroExpr):
    a: MeroExpr


Z = Var()
ZERO = Const(0)
ONE = Const(1)
_Z_FN = RationalFn(Polynomial.z())


def as_expr(x) -> MeroExpr:
    if isinstance(x, MeroExpr):
        return x
    if isinstance(x, RationalFn):
        return wrap_rational(x)
    if isinstance(x, (int, float, complex, np.number)):
        return Const(complex(x))
    raise TypeError(f"cannot use {type(x).__name__} as an expression")


def wrap_rational(r: RationalFn) -> MeroExpr:
    """Canonical node for a reduced rational function."""
    if r.is_constant:
        return Const(r.constant_value())
    if r == _Z_FN:
        return Z
    return Rational(r)


def as_rational(e: MeroExpr) -> RationalFn | None:
    """The rational function of a *leaf* node, or None for other nodes."""
    if isinstance(e, Rational):
        return e.fn
    if isinstance(e, Const):
        return RationalFn.constant(e.value)
    if isinstance(e, Var):
        return _Z_FN
    return None


def _is_const(e: MeroExpr, value: complex) -> bool:
    return isinstance(e, Const) and e.value == value


def exp_of(arg: LaurentPolynomial) -> MeroExpr:
    if arg.is_constant:
        return Const(cmath.exp(arg.constant_term()))
    return Exp(arg)


def add(a: MeroExpr, b: MeroExpr) -> MeroExpr:
    ra, rb = as_rational(a), as_rational(b)
    if ra is not None and rb is not None:
        return wrap_rational(ra + rb)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def sub(a: MeroExpr, b: MeroExpr) -> MeroExpr:
    ra, rb = as_rational(a), as_rational(b)
    if ra is not None and rb is not None:
        return wrap_rational(ra - rb)
    if a == b:
        return ZERO
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    return Sub(a, b)


def neg(a: MeroExpr) -> MeroExpr:
    ra = as_rational(a)
    if ra is not None:
        return wrap_rational(-ra)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a: MeroExpr, b: MeroExpr) -> MeroExpr:
    ra, rb = as_rational(a), as_rational(b)
    if ra is not None and rb is not None:
        return wrap_rational(ra * rb)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if isinstance(a, Exp) and isinstance(b, Exp):
        return exp_of(a.arg + b.arg)
    if ra is not None and isinstance(b, Mul):
        inner = as_rational(b.a)
        if inner is not None:
            return mul(wrap_rational(ra * inner), b.b)
    if rb is not None and ra is None:
        # keep the rational factor on the left
        return mul(b, a)
    return Mul(a, b)


def div(a: MeroExpr, b: MeroExpr) -> MeroExpr:
    ra, rb = as_rational(a), as_rational(b)
    if rb is not None and rb.is_zero:
        raise ZeroDivisionError("division by the zero function")
    if ra is not None and rb is not None:
        return wrap_rational(ra / rb)
    if _is_const(b, 1):
        return a
    if _is_const(a, 0):
        return ZERO
    if a == b:
        return ONE
    if isinstance(a, Exp) and isinstance(b, Exp):
        return exp_of(a.arg - b.arg)
    if rb is None:
        _check_nonzero_denominator(b)
    return Div(a, b)


def power(a: MeroExpr, n: int) -> MeroExpr:
    n = int(n)
    ra = as_rational(a)
    if ra is not None:
        return wrap_rational(ra**n)
    if isinstance(a, Exp):
        return exp_of(a.arg.scale(n))
    if n < 0:
        return div(ONE, power(a, -n))
    if n == 0:
        return ONE
    out = a
    for _ in range(n - 1):
        out = mul(out, a)
    return out


def compose_polynomial(p: Polynomial, e: MeroExpr) -> MeroExpr:
    """``p(e)`` by Horner's scheme in expression arithmetic."""
    if p.is_zero:
        return ZERO
    acc: MeroExpr = Const(p.coeffs[-1])
    for c in reversed(p.coeffs[:-1]):
        acc = add(mul(acc, e), Const(c))
    return acc


def sample_points(n: int, seed: int = DEFAULT_SEED, r_min: float = 0.5, r_max: float = 2.0) -> np.ndarray:
    """Deterministic pseudo-random points with ``r_min <= |z| <= r_max``."""
    rng = np.random.default_rng(seed)
    rad = np.exp(rng.uniform(math.log(r_min), math.log(r_max), n))
    ang = rng.uniform(0.0, 2 * math.pi, n)
    return rad * np.exp(1j * ang)


def _check_nonzero_denominator(b: MeroExpr) -> None:
    zs = sample_points(16, seed=DEFAULT_SEED + 1)
    vals, poles = evaluate_array(b, zs, check_overflow=False)
    ok = ~poles & np.isfinite(vals)
    if not np.any(np.abs(vals[ok]) > 1e-14):
        if np.all(~poles):
            raise ZeroDivisionError("denominator vanishes at every sampled point")


# -- evaluation -------------------------------------------------------------


def _majorant(p: Polynomial, az: np.ndarray) -> np.ndarray:
    acc = np.zeros(az.shape)
    for c in reversed(p.coeffs):
        acc = acc * az + abs(c)
    return acc


def _is_pole(v: np.ndarray, mag: np.ndarray) -> np.ndarray:
    # zero up to the cancellation among the terms that produced it
    return np.abs(v) <= POLE_THRESHOLD * mag


def _ev(e: MeroExpr, z: np.ndarray, memo: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(values, pole mask, magnitude majorant) at ``z``."""
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = (np.full(z.shape, e.value, dtype=complex), np.zeros(z.shape, bool), np.full(z.shape, abs(e.value)))
    elif isinstance(e, Var):
        out = (z.copy(), np.zeros(z.shape, bool), np.abs(z))
    elif isinstance(e, Rational):
        az = np.abs(z)
        num = e.fn.num(z)
        den = e.fn.den(z)
        pole = _is_pole(den, _majorant(e.fn.den, az))
        with np.errstate(all="ignore"):
            safe = np.where(pole, 1, den)
            val = np.where(pole, 0, num / safe)
            mag = np.where(pole, 0, _majorant(e.fn.num, az) / np.abs(safe))
        out = (val, pole, mag)
    elif isinstance(e, Exp):
        w = e.arg(z)
        if np.any(w.real > 690.0):
            raise OverflowError("exp argument exceeds the overflow cap")
        v = np.exp(w)
        # exp has no zeros; only an underflow to 0 is treated as a pole of 1/exp
        out = (v, np.zeros(z.shape, bool), np.abs(v))
    elif isinstance(e, Neg):
        v, p, m = _ev(e.a, z, memo)
        out = (-v, p, m)
    elif isinstance(e, (Add, Sub, Mul)):
        va, pa, ma = _ev(e.a, z, memo)
        vb, pb, mb = _ev(e.b, z, memo)
        with np.errstate(all="ignore"):
            if isinstance(e, Add):
                v, m = va + vb, ma + mb
            elif isinstance(e, Sub):
                v, m = va - vb, ma + mb
            else:
                v, m = va * vb, ma * mb
        pole = pa | pb
        out = (np.where(pole, 0, v), pole, np.where(pole, 0, m))
    elif isinstance(e, Div):
        va, pa, ma = _ev(e.a, z, memo)
        vb, pb, mb = _ev(e.b, z, memo)
        small = _is_pole(vb, mb) & ~pb
        pole = pa | small
        with np.errstate(all="ignore"):
            safe = np.where(small | pb, 1, vb)
            v = va / safe
            m = ma / np.abs(safe)
        # a pole in the denominator alone gives a zero of the quotient
        v = np.where(pb & ~pa, 0, v)
        m = np.where(pb & ~pa, 0, m)
        pole = pole | (pa & pb)
        out = (np.where(pole, 0, v), pole, np.where(pole, 0, m))
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[key] = out
    return out


def evaluate_array(e: MeroExpr, z, check_overflow: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised evaluation returning ``(values, pole_mask)``.

    Values at masked positions are set to 0 and carry no meaning.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    vals, poles, _ = _ev(e, z, {})
    if check_overflow:
        bad = ~poles & ~(np.abs(vals) <= OVERFLOW_CAP)
        if np.any(bad):
            raise OverflowError("intermediate magnitude exceeds the overflow cap")
    return vals, poles


def evaluate(e: MeroExpr, z: Number) -> complex | PoleSignal:
    z = complex(z)
    if z == 0:
        raise ValueError("z = 0 is outside every annulus")
    vals, poles = evaluate_array(e, np.array([z]))
    if poles[0]:
        return PoleSignal(z)
    return complex(vals[0])


# -- structure queries --------------------------------------------------------


def children(e: MeroExpr) -> tuple[MeroExpr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.a, e.b)
    if isinstance(e, Neg):
        return (e.a,)
    return ()


def is_rational_expr(e: MeroExpr) -> bool:
    seen = {}

    def walk(x):
        k = id(x)
        if k in seen:
            return seen[k]
        r = not isinstance(x, Exp) and all(walk(c) for c in children(x))
        seen[k] = r
        return r

    return walk(e)


def fold_rational(e: MeroExpr) -> RationalFn:
    """Collapse a rational expression tree into one reduced RationalFn."""
    memo: dict[int, RationalFn] = {}

    def go(x: MeroExpr) -> RationalFn:
        k = id(x)
        if k in memo:
            return memo[k]
        leaf = as_rational(x)
        if leaf is not None:
            r = leaf
        elif isinstance(x, Exp):
            raise NotRationalError("expression contains an exp node")
        elif isinstance(x, Neg):
            r = -go(x.a)
        elif isinstance(x, Add):
            r = go(x.a) + go(x.b)
        elif isinstance(x, Sub):
            r = go(x.a) - go(x.b)
        elif isinstance(x, Mul):
            r = go(x.a) * go(x.b)
        elif isinstance(x, Div):
            r = go(x.a) / go(x.b)
        else:
            raise TypeError(type(x).__name__)
        memo[k] = r
        return r

    return go(e)


def simplify_rational(e: MeroExpr) -> Rational:
    """Single reduced ``Rational`` node equal to ``e``.

    Raises NotRationalError when ``e`` contains an exp node.
    """
    return Rational(fold_rational(e))


# -- differentiation ----------------------------------------------------------


def _d(e: MeroExpr) -> MeroExpr:
    cached = e.__dict__.get("_deriv")
    if cached is not None:
        return cached
    if isinstance(e, Const):
        out = ZERO
    elif isinstance(e, Var):
        out = ONE
    elif isinstance(e, Rational):
        out = wrap_rational(e.fn.derivative())
    elif isinstance(e, Exp):
        q = e.arg.derivative().to_rational()
        out = mul(wrap_rational(RationalFn.reduced(q.num, q.den)), e)
    elif isinstance(e, Neg):
        out = neg(_d(e.a))
    elif isinstance(e, Add):
        out = add(_d(e.a), _d(e.b))
    elif isinstance(e, Sub):
        out = sub(_d(e.a), _d(e.b))
    elif isinstance(e, Mul):
        out = add(mul(_d(e.a), e.b), mul(e.a, _d(e.b)))
    elif isinstance(e, Div):
        out = div(sub(mul(_d(e.a), e.b), mul(e.a, _d(e.b))), mul(e.b, e.b))
    else:
        raise TypeError(type(e).__name__)
    e.__dict__.setdefault("_deriv", out)
    return e.__dict__["_deriv"]


class DerivativeCheckError(AssertionError):
    pass


def derivative_mismatch(e: MeroExpr, de: MeroExpr, zs: np.ndarray) -> np.ndarray:
    """Per-point ``|de - central difference| / (1 + |de|)``; NaN near poles."""
    h = 1e-6 * np.abs(zs)
    fp, pp = evaluate_array(e, zs + h, check_overflow=False)
    fm, pm = evaluate_array(e, zs - h, check_overflow=False)
    d, pd = evaluate_array(de, zs, check_overflow=False)
    fd = (fp - fm) / (2 * h)
    err = np.abs(d - fd) / (1 + np.abs(d))
    err[pp | pm | pd] = np.nan
    return err


def differentiate(e: MeroExpr, check: bool = True) -> MeroExpr:
    """Exact symbolic derivative.

    With ``check`` the result is compared against central differences at 8
    seeded points; the allowed error widens by the rounding floor
    ``eps*|e|/h`` so that large-magnitude functions do not trip it.
    """
    de = _d(e)
    if check:
        zs = sample_points(8, seed=DEFAULT_SEED + 2)
        err = derivative_mismatch(e, de, zs)
        fv, _ = evaluate_array(e, zs, check_overflow=False)
        dv, _ = evaluate_array(de, zs, check_overflow=False)
        floor = 50 * np.finfo(float).eps * np.abs(fv) / (1e-6 * np.abs(zs)) / (1 + np.abs(dv))
        bad = np.isfinite(err) & (err > 1e-6 + floor)
        if np.any(bad):
            raise DerivativeCheckError(f"derivative of {to_text(e)} failed the finite-difference check")
    return de


def log_derivative(e: MeroExpr) -> MeroExpr:
    """``e'/e`` built factor by factor.

    Products, quotients and exp atoms are split (``(ab)'/(ab) = a'/a + b'/b``,
    ``exp(Q)'/exp(Q) = Q'``) so the result never divides by a value that
    merely underflows, as ``differentiate(e)/e`` would where ``|exp|`` is tiny.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Exp):
        q = e.arg.derivative().to_rational()
        return wrap_rational(RationalFn.reduced(q.num, q.den))
    if isinstance(e, Neg):
        return log_derivative(e.a)
    if isinstance(e, Mul):
        return add(log_derivative(e.a), log_derivative(e.b))
    if isinstance(e, Div):
        return sub(log_derivative(e.a), log_derivative(e.b))
    r = as_rational(e)
    if r is not None:
        return wrap_rational(r.derivative() / r)
    return div(_d(e), e)


# -- identity testing -----------------------------------------------------------


def is_identically_equal(
    e1: MeroExpr,
    e2: MeroExpr,
    tol: float = 1e-9,
    method: str = "exact",
    seed: int = DEFAULT_SEED,
) -> bool:
    """Decide ``e1 == e2`` as functions.

    ``method="exact"`` compares normal forms: both sides are written as
    quotients of exponential polynomials and the cross-multiplied
    difference must cancel coefficient by coefficient to within ``tol``
    of the magnitudes that produced it.  ``method="sampled"`` instead
    requires ``|e1 - e2| <= tol*(1 + |e1| + |e2|)`` at 64 seeded points.
    """
    if e1 == e2:
        return True
    if method == "sampled":
        return sampled_identity(e1, e2, tol=tol, seed=seed)
    from .normal_form import normal_form

    n1, d1 = normal_form(e1)
    n2, d2 = normal_form(e2)
    return (n1 * d2).sub_is_zero(n2 * d1, tol)


def sampled_identity(e1: MeroExpr, e2: MeroExpr, tol: float = 1e-9, seed: int = DEFAULT_SEED, n: int = 64) -> bool:
    zs = sample_points(n, seed=seed)
    v1, p1 = evaluate_array(e1, zs, check_overflow=False)
    v2, p2 = evaluate_array(e2, zs, check_overflow=False)
    ok = ~(p1 | p2)
    if np.any(p1 != p2):
        return False
    return bool(np.all(np.abs(v1[ok] - v2[ok]) <= tol * (1 + np.abs(v1[ok]) + np.abs(v2[ok]))))


# -- printing -------------------------------------------------------------------


def _lit(c: complex) -> str:
    return f"({c.real!r}, {c.imag!r})"


def _monomial_terms(items) -> str:
    parts = []
    for k, c in items:
        if k == 0:
            parts.append(_lit(c))
        elif k == 1:
            parts.append(f"{_lit(c)}*z")
        else:
            parts.append(f"{_lit(c)}*z^{k}")
    return " + ".join(parts) if parts else _lit(0j)


def to_text(e: MeroExpr) -> str:
    """Fully parenthesised text that :func:`annulus_nev.parser.parse` reads back."""
    if isinstance(e, Const):
        return _lit(e.value)
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Rational):
        num = _monomial_terms((k, c) for k, c in enumerate(e.fn.num.coeffs) if c != 0)
        if e.fn.den.degree == 0 and e.fn.den.lead == 1:
            return f"({num})"
        den = _monomial_terms((k, c) for k, c in enumerate(e.fn.den.coeffs) if c != 0)
        return f"(({num})/({den}))"
    if isinstance(e, Exp):
        return f"exp({_monomial_terms(e.arg.terms)})"
    if isinstance(e, Neg):
        return f"(-{to_text(e.a)})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    return f"({to_text(e.a)} {op} {to_text(e.b)})"


def node_count(e: MeroExpr) -> int:
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        stack.extend(children(x))
    return len(seen)
