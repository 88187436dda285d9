"""Divisors: finite point sets with integer multiplicities.

Two independent routes produce the zero and pole divisors of an
expression.  Rational expressions go through polynomial root finding with
multiplicity-aware clustering; everything else (and the cross-check) goes
through the argument-principle search in :mod:`annulus_nev.contour`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .contour import CLEARANCE, find_zeros
from .errors import IdenticallyZeroError, IllConditionedError
from .expr import Const, MeroExpr, as_expr, fold_rational, is_rational_expr, sub
from .normal_form import normal_form
from .polynomials import Polynomial, RationalFn

MATCH_REL = 1e-6
COND_LIMIT = 1e12
CLUSTER_FLOOR = 1e-7
MAX_CLUSTER_SPREAD = 0.05  # relative; wider merged groups mean the roots are not separable
# safety factor on the rounding-level scatter of a multiple root
_SCATTER_SAFETY = 1e3

Target = Union[complex, MeroExpr, None]  # None stands for infinity
INF = None


def _sort_key(z: complex):
    return (abs(z), math.atan2(z.imag, z.real) % (2 * math.pi))


def points_match(a: complex, b: complex, rel: float = MATCH_REL) -> bool:
    return abs(a - b) <= rel * (1 + max(abs(a), abs(b)))


def check_level(M) -> float:
    """Validate a truncation level: an integer >= 1 or infinity."""
    if M is None or (isinstance(M, float) and math.isinf(M)):
        return math.inf
    if isinstance(M, str) and M.lower() in ("inf", "infinity"):
        return math.inf
    if int(M) != M or M < 1:
        raise ValueError(f"truncation level must be an integer >= 1 or inf, got {M!r}")
    return int(M)


@dataclass(frozen=True)
class Divisor:
    """Points with nonzero integer multiplicities, sorted by modulus then argument.

    ``valid_outer`` is the ``R`` for which the divisor is complete on
    ``{1/R <= |z| <= R}``.
    """

    points: tuple = ()
    valid_outer: float = math.inf

    @classmethod
    def build(cls, items: Iterable[tuple[complex, int]], valid_outer: float = math.inf) -> "Divisor":
        merged: list[list] = []
        for z, m in items:
            z = complex(z)
            for slot in merged:
                if points_match(slot[0], z):
                    slot[1] += int(m)
                    break
            else:
                merged.append([z, int(m)])
        pts = tuple(sorted(((z, m) for z, m in merged if m != 0), key=lambda p: _sort_key(p[0])))
        return cls(pts, float(valid_outer))

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.points)

    def multiplicity_at(self, z: complex, rel: float = MATCH_REL) -> int:
        return sum(m for p, m in self.points if points_match(p, z, rel))

    def truncate(self, M) -> "Divisor":
        M = check_level(M)
        return Divisor(tuple((z, int(min(m, M)) if m > 0 else m) for z, m in self.points), self.valid_outer)

    def filter_at_least(self, k: int) -> "Divisor":
        """Keep points of multiplicity ``>= k`` (unchanged multiplicity)."""
        return Divisor(tuple((z, m) for z, m in self.points if m >= k), self.valid_outer)

    def restrict(self, R: float) -> "Divisor":
        return Divisor(tuple((z, m) for z, m in self.points if 1 / R <= abs(z) <= R), min(self.valid_outer, R))

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.build(list(self.points) + list(other.points), min(self.valid_outer, other.valid_outer))

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((z, -m) for z, m in self.points), self.valid_outer)

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def positive_part(self) -> "Divisor":
        return Divisor(tuple(p for p in self.points if p[1] > 0), self.valid_outer)

    def same_as(self, other: "Divisor", rel: float = MATCH_REL) -> bool:
        """Equal point sets with equal multiplicities, locations within ``rel``."""
        if len(self) != len(other):
            return False
        used = [False] * len(other)
        for z, m in self.points:
            for j, (w, n) in enumerate(other.points):
                if not used[j] and n == m and points_match(z, w, rel):
                    used[j] = True
                    break
            else:
                return False
        return True

    def max_distance(self, other: "Divisor") -> float:
        """Largest distance from a point of one divisor to the nearest of the other."""
        if not self.points and not other.points:
            return 0.0
        if not self.points or not other.points:
            return math.inf
        a = np.array([z for z, _ in self.points])
        b = np.array([z for z, _ in other.points])
        d = np.abs(a[:, None] - b[None, :])
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))

    def to_json(self) -> list[dict]:
        return [{"re": float(f"{z.real:.17g}"), "im": float(f"{z.imag:.17g}"), "mult": m} for z, m in self.points]

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data, valid_outer: float = math.inf) -> "Divisor":
        return cls.build([(complex(d["re"], d["im"]), int(d["mult"])) for d in data], valid_outer)


# -- rational route -------------------------------------------------------------


def _abs_eval(p: Polynomial, z: complex) -> float:
    r = abs(z)
    return float(sum(abs(c) * r**k for k, c in enumerate(p.coeffs)))


def _taylor_coeff(p: Polynomial, z: complex, m: int) -> complex:
    d = p
    for _ in range(m):
        d = d.derivative()
    return complex(d(z)) / math.factorial(m)


def _scatter_radius(p: Polynomial, c: complex, m: int) -> float:
    """How far rounding scatters the ``m`` computed roots of an m-fold root at ``c``."""
    t = abs(_taylor_coeff(p, c, m))
    eps = np.finfo(float).eps
    if t == 0:
        return 0.0  # not an m-fold root at c
    return (_SCATTER_SAFETY * eps * _abs_eval(p, c) / t) ** (1.0 / m)


def _lower_terms_small(p: Polynomial, c: complex, m: int, spread: float) -> bool:
    """Taylor terms of order < m at ``c`` are at rounding level over the group's spread."""
    if spread <= CLUSTER_FLOOR * (1 + abs(c)):
        return True
    bound = _SCATTER_SAFETY * np.finfo(float).eps * _abs_eval(p, c)
    return all(abs(_taylor_coeff(p, c, j)) * spread**j <= bound for j in range(m))


def cluster_roots(p: Polynomial, check_condition: bool = True) -> list[tuple[complex, int]]:
    """Roots of ``p`` grouped into (location, multiplicity).

    Computed roots are merged greedily, nearest pair first, while the
    merged group stays within the scatter radius expected from rounding for
    a root of that multiplicity (and never less than ``CLUSTER_FLOOR``
    relative).  The location is the group centroid, which is far more
    accurate than any single computed root of a multiple root.
    """
    roots = [complex(r) for r in p.roots()]
    groups = [[r] for r in roots]
    while len(groups) > 1:
        cents = [sum(g) / len(g) for g in groups]
        best = None
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                d = abs(cents[i] - cents[j]) / (1 + abs(cents[i]))
                if best is None or d < best[0]:
                    cand = groups[i] + groups[j]
                    c = sum(cand) / len(cand)
                    spread = max(abs(x - c) for x in cand)
                    allowed = max(CLUSTER_FLOOR * (1 + abs(c)), _scatter_radius(p, c, len(cand)))
                    if spread <= allowed and _lower_terms_small(p, c, len(cand), spread):
                        best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        groups[i] = groups[i] + groups[j]
        del groups[j]
    out = []
    for g in groups:
        c = sum(g) / len(g)
        m = len(g)
        if check_condition and m > 1 and max(abs(x - c) for x in g) > MAX_CLUSTER_SPREAD * (1 + abs(c)):
            raise IllConditionedError(f"{m} roots near {c} cannot be told apart from a multiple root")
        if m == 1:
            # two Newton steps tidy up a simple root
            dp = p.derivative()
            for _ in range(2):
                dv = complex(dp(c))
                if dv != 0:
                    c = c - complex(p(c)) / dv
        if check_condition and c != 0:
            t = abs(_taylor_coeff(p, c, m))
            kappa = _abs_eval(p, c) / (t * max(abs(c), 1.0) ** m) if t else math.inf
            if kappa > COND_LIMIT:
                raise IllConditionedError(f"root near {c} has condition number {kappa:.3g}")
        out.append((c, m))
    return out


def rational_divisors(f: RationalFn, outer: float = math.inf) -> tuple[Divisor, Divisor]:
    """(zeros, poles) of a rational function on ``{1/outer <= |z| <= outer}``."""
    if f.is_zero:
        raise IdenticallyZeroError("the zero function has no zero divisor")
    zeros = Divisor.build(cluster_roots(f.num), math.inf)
    poles = Divisor.build(cluster_roots(f.den), math.inf)
    # anything common to both (a near-miss of the gcd) cancels
    net = zeros - poles
    z = net.positive_part()
    p = (-net).positive_part()
    if math.isfinite(outer):
        z, p = z.restrict(outer), p.restrict(outer)
    return z, p


# -- argument-principle route ---------------------------------------------------------------


def _target_key(target: Target):
    if target is None:
        return ("inf",)
    if isinstance(target, MeroExpr):
        if isinstance(target, Const):
            return ("c", target.value)
        return ("e", target)
    return ("c", complex(target))


def _shifted(e: MeroExpr, target: Target) -> MeroExpr:
    if isinstance(target, MeroExpr):
        return sub(e, target)
    return sub(e, Const(complex(target)))


def _holo_zeros(N, outer: float):
    if N.is_zero_free():
        return (), outer
    res = find_zeros(N, N.derivative(), outer, majorant=N.majorant)
    return res.zeros, res.outer


def locate_divisors(e: MeroExpr, outer: float, tol: float = 1e-9) -> tuple[Divisor, Divisor]:
    """(zeros, poles) of ``e`` by the argument principle on its normal form."""
    N, D = normal_form(e)
    if N.is_zero or N.sub_is_zero(type(N)(), tol):
        raise IdenticallyZeroError("function vanishes identically")
    zn, rn = _holo_zeros(N, outer)
    zd, rd = _holo_zeros(D, outer)
    R = min(rn, rd)
    net = Divisor.build(list(zn) + [(z, -m) for z, m in zd], R)
    return net.positive_part().restrict(R), (-net).positive_part().restrict(R)


def locate_zeros(e: MeroExpr, target: Target = 0, outer: float = 10.0) -> Divisor:
    """Zeros of ``e - target`` (poles of ``e`` for ``target=None``) by the argument principle."""
    if target is None:
        return locate_divisors(e, outer)[1]
    return locate_divisors(_shifted(e, target), outer)[0]


@lru_cache(maxsize=4096)
def _cached(e: MeroExpr, key: tuple, outer: float, method: str) -> Divisor:
    kind = key[0]
    if kind == "inf":
        h = e
    elif kind == "c":
        h = _shifted(e, key[1])
    else:
        h = _shifted(e, key[1])
    if method == "auto":
        method = "rational" if is_rational_expr(h) else "contour"
    if method == "rational":
        fn = fold_rational(h)
        if kind == "inf" and fn.is_zero:
            return Divisor.build([], outer)
        z, p = rational_divisors(fn, outer)
    else:
        z, p = locate_divisors(h, outer)
    return p if kind == "inf" else z


def divisor_of(e, target: Target = 0, outer: float = 10.0, method: str = "auto") -> Divisor:
    """Zero divisor of ``e - target`` (pole divisor for ``target=None``) on A(outer).

    ``method`` is "rational", "contour" or "auto" (rational whenever the
    expression has no exp node).
    """
    e = as_expr(e)
    return _cached(e, _target_key(target), float(outer), method)


def zero_divisor(e, outer: float = 10.0, method: str = "auto") -> Divisor:
    return divisor_of(e, 0, outer, method)


def pole_divisor(e, outer: float = 10.0, method: str = "auto") -> Divisor:
    return divisor_of(e, None, outer, method)


def truncate(d: Divisor, M) -> Divisor:
    """Multiplicities capped at ``M``."""
    return d.truncate(M)


def filter_at_least(d: Divisor, k: int) -> Divisor:
    """Points of multiplicity at least ``k``, kept at full multiplicity."""
    return d.filter_at_least(k)


__all__ = [
    "CLEARANCE",
    "Divisor",
    "INF",
    "check_level",
    "cluster_roots",
    "divisor_of",
    "filter_at_least",
    "locate_divisors",
    "locate_zeros",
    "pole_divisor",
    "rational_divisors",
    "truncate",
    "zero_divisor",
]
