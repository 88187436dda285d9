"""Exponential-polynomial normal form.

Every expression is a quotient ``N/D`` where ``N`` and ``D`` are finite sums
``sum_k L_k(z) exp(Q_k(z))`` with Laurent coefficients ``L_k`` and Laurent
exponents ``Q_k`` without constant term.  Such sums are holomorphic on the
punctured plane, which is what the argument-principle zero finder needs,
and two of them are equal exactly when their coefficients agree term by
term.  Each coefficient carries a majorant (the same computation done on
absolute values) so that cancellation noise can be told apart from a
genuinely small coefficient.
"""

from __future__ import annotations

import cmath

import numpy as np

from .expr import (
    Add,
    Const,
    Div,
    Exp,
    MeroExpr,
    Mul,
    Neg,
    Rational,
    Sub,
    Var,
)
from .polynomials import FLUSH_TOL, LaurentPolynomial

_KEY_DIGITS = 12


def _key_of(q: LaurentPolynomial) -> tuple:
    return tuple(
        (k, float(f"{c.real:.{_KEY_DIGITS}g}"), float(f"{c.imag:.{_KEY_DIGITS}g}")) for k, c in q.terms
    )


class ExpPoly:
    """``sum_k L_k exp(Q_k)`` with coefficient majorants.

    ``terms`` maps a rounded key of ``Q_k`` to ``(Q_k, coef, mag)`` where
    ``coef`` and ``mag`` are dicts from exponent to complex coefficient and
    to its nonnegative majorant.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict = terms or {}

    # -- constructors
    @classmethod
    def constant(cls, c: complex) -> "ExpPoly":
        c = complex(c)
        if c == 0:
            return cls()
        return cls({(): (LaurentPolynomial(), {0: c}, {0: abs(c)})})

    @classmethod
    def laurent(cls, lp: LaurentPolynomial, mag: float = 0.0) -> "ExpPoly":
        if lp.is_zero:
            return cls()
        coef = dict(lp.terms)
        return cls({(): (LaurentPolynomial(), coef, {k: max(abs(c), mag) for k, c in coef.items()})})

    @classmethod
    def exp(cls, arg: LaurentPolynomial) -> "ExpPoly":
        q = arg.nonconstant_part()
        c = cmath.exp(arg.constant_term())
        return cls({_key_of(q): (q, {0: c}, {0: abs(c)})})

    # -- queries
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def term_count(self) -> int:
        return len(self.terms)

    def is_zero_free(self) -> bool:
        """True for a single ``c z^k exp(Q)``, which never vanishes off 0."""
        return len(self.terms) == 1 and len(next(iter(self.terms.values()))[1]) == 1

    def is_laurent(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def as_laurent(self) -> LaurentPolynomial:
        if not self.is_laurent():
            raise ValueError("not a Laurent polynomial")
        if not self.terms:
            return LaurentPolynomial()
        return LaurentPolynomial.from_dict(self.terms[()][1])

    def exponent_range(self) -> tuple[int, int]:
        ks = [k for _, coef, _ in self.terms.values() for k in coef]
        return (min(ks), max(ks)) if ks else (0, 0)

    # -- arithmetic
    @staticmethod
    def _accumulate(out: dict, q, key, coef: dict, mag: dict, sign: complex = 1):
        slot = out.get(key)
        if slot is None:
            slot = (q, {}, {})
            out[key] = slot
        _, c_acc, m_acc = slot
        for k, c in coef.items():
            c_acc[k] = c_acc.get(k, 0j) + sign * c
            m_acc[k] = m_acc.get(k, 0.0) + mag[k]

    @staticmethod
    def _flushed(out: dict, tol: float = FLUSH_TOL) -> "ExpPoly":
        clean = {}
        for key, (q, coef, mag) in out.items():
            c2 = {k: c for k, c in coef.items() if abs(c) > tol * mag[k]}
            if c2:
                clean[key] = (q, c2, {k: mag[k] for k in c2})
        return ExpPoly(clean)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        out: dict = {}
        for key, (q, c, m) in self.terms.items():
            self._accumulate(out, q, key, c, m)
        for key, (q, c, m) in other.terms.items():
            self._accumulate(out, q, key, c, m)
        return self._flushed(out)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({key: (q, {k: -v for k, v in c.items()}, dict(m)) for key, (q, c, m) in self.terms.items()})

    def _raw_sub(self, other: "ExpPoly") -> dict:
        out: dict = {}
        for key, (q, c, m) in self.terms.items():
            self._accumulate(out, q, key, c, m)
        for key, (q, c, m) in other.terms.items():
            self._accumulate(out, q, key, c, m, sign=-1)
        return out

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self._flushed(self._raw_sub(other))

    def sub_is_zero(self, other: "ExpPoly", tol: float) -> bool:
        """Whether ``self - other`` cancels to within ``tol`` of its majorant."""
        return self._flushed(self._raw_sub(other), tol=tol).is_zero

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out: dict = {}
        for _, (q1, c1, m1) in self.terms.items():
            for _, (q2, c2, m2) in other.terms.items():
                q = q1 + q2
                key = _key_of(q)
                coef: dict = {}
                mag: dict = {}
                for k1, a in c1.items():
                    for k2, b in c2.items():
                        coef[k1 + k2] = coef.get(k1 + k2, 0j) + a * b
                        mag[k1 + k2] = mag.get(k1 + k2, 0.0) + m1[k1] * m2[k2]
                self._accumulate(out, q, key, coef, mag)
        return self._flushed(out)

    def derivative(self) -> "ExpPoly":
        # (L e^Q)' = (L' + L Q') e^Q
        out: dict = {}
        for key, (q, coef, mag) in self.terms.items():
            dq = q.derivative().as_dict
            c_new: dict = {}
            m_new: dict = {}
            for k, c in coef.items():
                if k != 0:
                    c_new[k - 1] = c_new.get(k - 1, 0j) + k * c
                    m_new[k - 1] = m_new.get(k - 1, 0.0) + abs(k) * mag[k]
                for j, d in dq.items():
                    c_new[k + j] = c_new.get(k + j, 0j) + c * d
                    m_new[k + j] = m_new.get(k + j, 0.0) + mag[k] * abs(d)
            self._accumulate(out, q, key, c_new, m_new)
        return self._flushed(out)

    # -- evaluation
    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        inv = 1.0 / z
        for q, coef, _ in self.terms.values():
            poly = np.zeros_like(z)
            for k, c in coef.items():
                poly = poly + c * (z**k if k >= 0 else inv ** (-k))
            if q.is_zero:
                acc = acc + poly
            else:
                acc = acc + poly * np.exp(q(z))
        return acc

    def majorant(self, z) -> np.ndarray:
        """Sum of the absolute values of all terms, from the tracked majorants."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        acc = np.zeros(z.shape)
        for q, _, mag in self.terms.values():
            poly = np.zeros(z.shape)
            for k, m in mag.items():
                poly = poly + m * r**k
            acc = acc + (poly if q.is_zero else poly * np.exp(q(z).real))
        return acc

    def __repr__(self):
        parts = []
        for q, coef, _ in self.terms.values():
            parts.append(f"{dict(sorted(coef.items()))}*exp({dict(q.terms)})")
        return "ExpPoly(" + " + ".join(parts) + ")"


_ONE = ExpPoly.constant(1)


def normal_form(e: MeroExpr, memo: dict | None = None) -> tuple[ExpPoly, ExpPoly]:
    """Holomorphic pair ``(N, D)`` with ``e == N/D`` off the origin."""
    if memo is None:
        memo = {}
    key = id(e)
    if key in memo:
        return memo[key][1]
    if isinstance(e, Const):
        out = (ExpPoly.constant(e.value), _ONE)
    elif isinstance(e, Var):
        out = (ExpPoly.laurent(LaurentPolynomial.monomial(1)), _ONE)
    elif isinstance(e, Rational):
        out = (
            ExpPoly.laurent(LaurentPolynomial(tuple(enumerate(e.fn.num.coeffs))), e.fn.mag),
            ExpPoly.laurent(LaurentPolynomial(tuple(enumerate(e.fn.den.coeffs)))),
        )
    elif isinstance(e, Exp):
        out = (ExpPoly.exp(e.arg), _ONE)
    elif isinstance(e, Neg):
        n, d = normal_form(e.a, memo)
        out = (-n, d)
    elif isinstance(e, (Add, Sub)):
        na, da = normal_form(e.a, memo)
        nb, db = normal_form(e.b, memo)
        if da is db:
            out = (na + nb if isinstance(e, Add) else na - nb, da)
        else:
            x, y = na * db, nb * da
            out = (x + y if isinstance(e, Add) else x - y, da * db)
    elif isinstance(e, Mul):
        na, da = normal_form(e.a, memo)
        nb, db = normal_form(e.b, memo)
        out = (na * nb, da if db is _ONE else (db if da is _ONE else da * db))
    elif isinstance(e, Div):
        na, da = normal_form(e.a, memo)
        nb, db = normal_form(e.b, memo)
        out = (na * db, da * nb)
    else:
        raise TypeError(type(e).__name__)
    # keep e alive so its id cannot be reused while the memo lives
    memo[key] = (e, out)
    return out
