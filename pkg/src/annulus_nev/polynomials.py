"""Polynomial, Laurent polynomial and rational-function arithmetic.

Coefficients are stored lowest degree first as tuples of Python complex
numbers so that the objects are hashable and compare exactly.  Arithmetic
goes through numpy and flushes coefficients that are pure cancellation
noise: a result coefficient whose magnitude is below ``FLUSH_TOL`` times the
sum of the magnitudes that produced it is set to exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

FLUSH_TOL = 1e-10
GCD_TOL = 1e-10
# gcd candidates whose roots leave a larger relative residual are rejected
_GCD_ROOT_CHECK = 1e-6


def _flush(values: np.ndarray, magnitudes: np.ndarray, tol: float = FLUSH_TOL) -> np.ndarray:
    values = np.array(values, dtype=complex)
    values[np.abs(values) <= tol * magnitudes] = 0
    return values


def _trim(arr: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return arr[:0]
    return arr[: nz[-1] + 1]


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial, ``coeffs[k]`` multiplies ``z**k``.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("polynomial coefficients must be finite")
        arr = _trim(arr)
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in arr))

    @classmethod
    def from_array(cls, arr) -> "Polynomial":
        return cls(tuple(np.asarray(arr, dtype=complex)))

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((complex(c),))

    @classmethod
    def z(cls) -> "Polynomial":
        return cls((0j, 1 + 0j))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        roots = list(roots)
        if not roots:
            return cls.constant(lead)
        # np.poly is highest-first
        return cls.from_array(np.asarray(np.poly(roots), dtype=complex)[::-1] * lead)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.coeffs, dtype=complex)
        arr.setflags(write=False)
        return arr

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array)) if self.coeffs else 0.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def _binary(self, other: "Polynomial", sign: int) -> "Polynomial":
        a, b = self.array, other.array
        n = max(a.size, b.size)
        pa = np.zeros(n, complex)
        pb = np.zeros(n, complex)
        pa[: a.size] = a
        pb[: b.size] = b
        return Polynomial.from_array(_flush(pa + sign * pb, np.abs(pa) + np.abs(pb)))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return self._binary(other, 1)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self._binary(other, -1)

    def __neg__(self) -> "Polynomial":
        return Polynomial.from_array(-self.array)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial()
        prod = np.convolve(self.array, other.array)
        mags = np.convolve(np.abs(self.array), np.abs(other.array))
        return Polynomial.from_array(_flush(prod, mags))

    def scale(self, c: complex) -> "Polynomial":
        return Polynomial.from_array(self.array * complex(c))

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial()
        return Polynomial.from_array(self.array[1:] * np.arange(1, len(self.coeffs)))

    def monic(self) -> "Polynomial":
        if self.is_zero or self.lead == 1:
            return self
        arr = self.array / self.lead
        arr[-1] = 1
        return Polynomial.from_array(arr)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        a = np.array(self.array, dtype=complex)
        b = other.array
        db = other.degree
        da = self.degree
        if da < db:
            return Polynomial(), self
        q = np.zeros(da - db + 1, dtype=complex)
        lead = b[-1]
        for k in range(da - db, -1, -1):
            c = a[k + db] / lead
            q[k] = c
            a[k : k + db + 1] -= c * b
        return Polynomial.from_array(q), Polynomial.from_array(a[:db])

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(self.array[::-1]).astype(complex)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


def poly_gcd(a: Polynomial, b: Polynomial, tol: float = GCD_TOL) -> Polynomial:
    """Monic gcd by the Euclidean algorithm on norm-scaled remainders.

    A remainder counts as zero when its norm is at most ``tol`` times the
    larger of the dividend norm and ``|quotient|*|divisor|``.  A candidate
    of positive degree is accepted only if each of its roots is a
    near-root of both inputs and it divides both with a small remainder;
    otherwise the inputs are declared coprime.
    """
    if a.is_zero and b.is_zero:
        return Polynomial.constant(1)
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    u, v = a.scale(1 / a.norm), b.scale(1 / b.norm)
    if u.degree < v.degree:
        u, v = v, u
    while v.degree > 0:
        q, r = u.divmod(v)
        bound = tol * max(u.norm, q.norm * v.norm)
        if r.norm <= bound:
            break
        u, v = v, r.scale(1 / r.norm)
    if v.degree <= 0:
        return Polynomial.constant(1)
    g = v.monic()
    for rho in g.roots():
        for p in (a, b):
            scale = float(np.sum(np.abs(p.array) * np.abs(rho) ** np.arange(len(p.coeffs))))
            if abs(p(rho)) > _GCD_ROOT_CHECK * scale:
                return Polynomial.constant(1)
    # the root test is blind to overstated multiplicity; g must also divide both inputs
    for p in (a, b):
        q, r = p.divmod(g)
        if r.norm > _GCD_ROOT_CHECK * max(p.norm, q.norm * g.norm):
            return Polynomial.constant(1)
    return g


def _exact_quotient(p: Polynomial, g: Polynomial) -> Polynomial:
    if g.degree <= 0:
        return p.scale(1 / g.lead) if g.lead != 1 else p
    q, _ = p.divmod(g)
    return q


def _maxabs(p: Polynomial) -> float:
    return float(np.max(np.abs(p.array))) if p.coeffs else 0.0


def _l1(p: Polynomial) -> float:
    return float(np.sum(np.abs(p.array))) if p.coeffs else 0.0


@dataclass(frozen=True)
class RationalFn:
    """Quotient ``num/den`` of polynomials.

    Build values through :meth:`reduced` (or the arithmetic operators) to
    get the canonical form: common factors cancelled and a monic
    denominator.  The bare constructor only checks that ``den`` is nonzero.

    ``mag`` bounds the size of the terms that were summed to produce the
    numerator coefficients.  A numerator lying entirely below
    ``FLUSH_TOL * mag`` is cancellation noise and is reduced to zero.
    """

    num: Polynomial
    den: Polynomial = Polynomial((1 + 0j,))
    mag: float = field(default=-1.0, compare=False, repr=False)

    def __post_init__(self):
        if self.den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if self.mag < 0:
            object.__setattr__(self, "mag", _maxabs(self.num))

    @classmethod
    def reduced(cls, num: Polynomial, den: Polynomial, tol: float = GCD_TOL, mag: float | None = None) -> "RationalFn":
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        top = _maxabs(num)
        mag = top if mag is None else max(mag, top)
        if num.is_zero or top <= FLUSH_TOL * mag:
            return cls(Polynomial(), Polynomial.constant(1), 0.0)
        if den.degree > 0 and num.degree > 0:
            g = poly_gcd(num, den, tol)
            if g.degree > 0:
                num = _exact_quotient(num, g)
                den = _exact_quotient(den, g)
                # keep the relative noise level of the numerator
                mag *= _maxabs(num) / top
        lead = den.lead
        if lead != 1:
            num = num.scale(1 / lead)
            mag /= abs(lead)
            arr = den.array / lead
            arr[-1] = 1  # x * (1/x) is not always exactly 1
            den = Polynomial.from_array(arr)
        return cls(num, den, mag)

    @classmethod
    def constant(cls, c) -> "RationalFn":
        return cls.reduced(Polynomial.constant(c), Polynomial.constant(1))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFn":
        return cls(p, Polynomial.constant(1))

    @classmethod
    def from_roots(cls, zeros, poles, lead: complex = 1.0) -> "RationalFn":
        return cls.reduced(Polynomial.from_roots(zeros, lead), Polynomial.from_roots(poles))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    @property
    def is_constant(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def constant_value(self) -> complex:
        if not self.is_constant:
            raise ValueError("not a constant")
        return (self.num.lead if not self.num.is_zero else 0j) / self.den.lead

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def _num_times(self, p: Polynomial) -> tuple[Polynomial, float]:
        # coefficient k of num*p sums |num_i||p_(k-i)| <= mag * l1(p)
        return self.num * p, self.mag * _l1(p)

    def __add__(self, other: "RationalFn") -> "RationalFn":
        if self.den == other.den:
            return RationalFn.reduced(self.num + other.num, self.den, mag=self.mag + other.mag)
        a, ma = self._num_times(other.den)
        b, mb = other._num_times(self.den)
        return RationalFn.reduced(a + b, self.den * other.den, mag=ma + mb)

    def __sub__(self, other: "RationalFn") -> "RationalFn":
        return self + (-other)

    def __neg__(self) -> "RationalFn":
        return RationalFn(-self.num, self.den, self.mag)

    def __mul__(self, other: "RationalFn") -> "RationalFn":
        width = min(len(self.num.coeffs), len(other.num.coeffs))
        return RationalFn.reduced(
            self.num * other.num, self.den * other.den, mag=self.mag * other.mag * max(width, 1)
        )

    def __truediv__(self, other: "RationalFn") -> "RationalFn":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        num, mag = self._num_times(other.den)
        return RationalFn.reduced(num, self.den * other.num, mag=mag)

    def __pow__(self, n: int) -> "RationalFn":
        if n < 0:
            return RationalFn.constant(1) / (self ** (-n))
        out = RationalFn.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self) -> "RationalFn":
        n, d = self.num, self.den
        dn = n.derivative()
        dmag = self.mag * max(n.degree, 0)
        if d.degree <= 0:
            return RationalFn.reduced(dn, d, mag=dmag)
        dp = d.derivative()
        g = poly_gcd(d, dp)
        d_red = _exact_quotient(d, g)
        dp_red = _exact_quotient(dp, g)
        # (n/d)' = (n' d/g - n d'/g) / (d * d/g)
        mag = dmag * _l1(d_red) + self.mag * _l1(dp_red)
        return RationalFn.reduced(dn * d_red - n * dp_red, d * d_red, mag=mag)


@dataclass(frozen=True)
class LaurentPolynomial:
    """Finite sum of ``c_k z**k`` over integer ``k`` (negative allowed).

    ``terms`` is a tuple of ``(k, c_k)`` sorted by exponent with no zero
    coefficients.
    """

    terms: tuple = ()

    def __post_init__(self):
        raw = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        acc: dict[int, complex] = {}
        for k, c in raw:
            c = complex(c)
            if not np.isfinite(c.real) or not np.isfinite(c.imag):
                raise ValueError("Laurent coefficients must be finite")
            acc[int(k)] = acc.get(int(k), 0j) + c
        object.__setattr__(self, "terms", tuple(sorted((k, c) for k, c in acc.items() if c != 0)))

    @classmethod
    def from_dict(cls, d: Mapping[int, complex]) -> "LaurentPolynomial":
        return cls(tuple(d.items()))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "LaurentPolynomial":
        return cls(tuple(enumerate(p.coeffs)))

    @classmethod
    def constant(cls, c) -> "LaurentPolynomial":
        return cls(((0, complex(c)),))

    @classmethod
    def monomial(cls, k: int, c=1.0) -> "LaurentPolynomial":
        return cls(((k, complex(c)),))

    @cached_property
    def as_dict(self) -> dict[int, complex]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def min_exp(self) -> int:
        return self.terms[0][0] if self.terms else 0

    @property
    def max_exp(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    @property
    def is_constant(self) -> bool:
        return all(k == 0 for k, _ in self.terms)

    def constant_term(self) -> complex:
        return self.as_dict.get(0, 0j)

    def nonconstant_part(self) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((k, c) for k, c in self.terms if k != 0))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for k, c in self.terms:
            acc = acc + c * (z**k if k >= 0 else 1.0 / z ** (-k))
        return acc

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        a, b = self.as_dict, other.as_dict
        out = {}
        for k in set(a) | set(b):
            x, y = a.get(k, 0j), b.get(k, 0j)
            s = x + y
            if abs(s) > FLUSH_TOL * (abs(x) + abs(y)):
                out[k] = s
        return LaurentPolynomial.from_dict(out)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        if self.is_zero or other.is_zero:
            return LaurentPolynomial()
        sums: dict[int, complex] = {}
        mags: dict[int, float] = {}
        for k1, c1 in self.terms:
            for k2, c2 in other.terms:
                p = c1 * c2
                sums[k1 + k2] = sums.get(k1 + k2, 0j) + p
                mags[k1 + k2] = mags.get(k1 + k2, 0.0) + abs(p)
        return LaurentPolynomial.from_dict(
            {k: s for k, s in sums.items() if abs(s) > FLUSH_TOL * mags[k]}
        )

    def scale(self, c) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((k, v * complex(c)) for k, v in self.terms))

    def derivative(self) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((k - 1, k * c) for k, c in self.terms if k != 0))

    def to_rational(self) -> RationalFn:
        """``z**m * L / z**m`` with ``m`` clearing the negative powers."""
        m = max(0, -self.min_exp)
        width = self.max_exp + m + 1 if self.terms else 1
        num = np.zeros(width, dtype=complex)
        for k, c in self.terms:
            num[k + m] = c
        den = np.zeros(m + 1, dtype=complex)
        den[m] = 1
        return RationalFn(Polynomial.from_array(num), Polynomial.from_array(den))

    def __repr__(self):
        return f"LaurentPolynomial({dict(self.terms)})"


def laurent_from_rational(r: RationalFn) -> LaurentPolynomial | None:
    """Laurent form of ``r`` when its denominator is ``c*z**m``, else None."""
    den = r.den
    if any(c != 0 for c in den.coeffs[:-1]):
        return None
    m = den.degree
    lead = den.lead
    return LaurentPolynomial(tuple((k - m, c / lead) for k, c in enumerate(r.num.coeffs)))
