"""Truncated sharing of a finite set, P_S machinery and the finiteness bound.

Two functions share S = {a_1..a_q} at level l when the summed truncated
divisors sum_i min(l, nu(f - a_i)) and sum_i min(l, nu(g - a_i)) agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .divisors import Divisor, check_level, cluster_roots, divisor_of
from .errors import DegenerateTargetsError
from .expr import (
    MeroExpr,
    as_expr,
    compose_polynomial,
    differentiate,
    evaluate_array,
    is_identically_equal,
    log_derivative,
    sample_points,
    simplify_rational,
    is_rational_expr,
)
from .inequalities import SweepContext, regressor
from .polynomials import Polynomial
from .reports import FAIL, PASS, SMALL_TERM_LIMIT, MarginReport, Row, assemble

MIN_SEPARATION = 1e-9
IDENTITY_TOL = 1e-8


@dataclass(frozen=True)
class FiniteSet:
    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if not vals:
            raise DegenerateTargetsError("the set S must be nonempty")
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                if abs(vals[i] - vals[j]) <= MIN_SEPARATION:
                    raise DegenerateTargetsError(f"S has coincident values {vals[i]} and {vals[j]}")
        object.__setattr__(self, "values", vals)

    @property
    def q(self) -> int:
        return len(self.values)


def build_ps(S: FiniteSet) -> tuple[Polynomial, int, list[complex]]:
    """Monic P_S, the number k of distinct zeros of P_S' and those zeros."""
    if S.q < 2:
        raise ValueError("P_S machinery needs q >= 2")
    P = Polynomial.from_roots(S.values)
    crit = cluster_roots(P.derivative())
    return P, len(crit), [z for z, _ in crit]


@dataclass(frozen=True)
class SharingInstance:
    f: MeroExpr
    g: MeroExpr
    S: FiniteSet
    level: float
    f_sum: Divisor
    g_sum: Divisor
    shares: bool


def truncated_sum(f, S: FiniteSet, level, outer: float = 10.0) -> Divisor:
    """sum_i min(level, nu(f - a_i)) as one divisor."""
    M = check_level(level)
    total = Divisor.build([], outer)
    for a in S.values:
        d = divisor_of(f, a, outer)
        total = total + d.truncate(M)
        outer = min(outer, d.valid_outer)
    return total.restrict(outer)


def shares_set(f, g, S: FiniteSet, level=math.inf, outer: float = 10.0) -> SharingInstance:
    f, g = as_expr(f), as_expr(g)
    fs = truncated_sum(f, S, level, outer)
    gs = truncated_sum(g, S, level, outer)
    R = min(fs.valid_outer, gs.valid_outer)
    fs, gs = fs.restrict(R), gs.restrict(R)
    return SharingInstance(f, g, S, check_level(level), fs, gs, fs.same_as(gs))


@dataclass
class SharingObjects:
    P: Polynomial
    k: int
    critical_zeros: list
    g: MeroExpr
    fs: list  # f_1 = g first
    Psi: list
    phis: list
    alphas: list
    phi: MeroExpr
    identity_error: list = field(default_factory=list)


def _maybe_simplify(e: MeroExpr) -> MeroExpr:
    return simplify_rational(e) if is_rational_expr(e) else e


def build_theorem13_objects(f_list: Sequence, g, S: FiniteSet, n_samples: int = 16) -> SharingObjects:
    """Psi_j = P_S(f_j)/P_S(g), phi_j = P_S'(f_j) f_j'/P_S(f_j), alpha_j = -Psi_j'/Psi_j, phi = phi_1.

    ``g`` is placed first (f_1 = g) unless the list already starts with it.
    The identity phi = alpha_j + phi_j is checked at sample points.
    """
    g = as_expr(g)
    fs = [as_expr(f) for f in f_list]
    if not fs or not is_identically_equal(fs[0], g):
        fs.insert(0, g)
    P, k, crit = build_ps(S)
    dP = P.derivative()
    Pg = compose_polynomial(P, g)
    Psi, phis, alphas = [], [], []
    for f in fs:
        Pf = compose_polynomial(P, f)
        Psi.append(_maybe_simplify(Pf / Pg))
        phis.append(_maybe_simplify(compose_polynomial(dP, f) * differentiate(f, check=False) / Pf))
    for psi in Psi:
        # log derivative of P_S(g)/P_S(f_j); the orientation that makes phi = alpha_j + phi_j hold
        alphas.append(_maybe_simplify(-log_derivative(psi)))
    phi = phis[0]
    zs = sample_points(n_samples, seed=11)
    errs = []
    pv, pp = evaluate_array(phi, zs, check_overflow=False)
    for a, ph in zip(alphas, phis):
        av, ap = evaluate_array(a, zs, check_overflow=False)
        hv, hp = evaluate_array(ph, zs, check_overflow=False)
        ok = ~(pp | ap | hp)
        rel = np.abs(pv[ok] - av[ok] - hv[ok]) / np.maximum(1.0, np.abs(pv[ok]))
        err = float(rel.max()) if rel.size else 0.0
        if err > IDENTITY_TOL:
            raise AssertionError(f"phi = alpha_j + phi_j fails at samples (rel err {err:.3g})")
        errs.append(err)
    return SharingObjects(P, k, crit, g, fs, Psi, phis, alphas, phi, errs)


# -- finiteness bound -------------------------------------------------------------------

VACUOUS_LEVEL = 87  # 2l - 175 <= 0


@dataclass(frozen=True)
class FinitenessBound:
    q: int
    k: int
    level: float
    threshold: float
    satisfied: bool
    vacuous: bool = False
    exact: Fraction | None = None
    chain_threshold: float = math.inf  # what 2(q-1) <= 5(k+1+35q/l) rearranges to
    fujimoto: int = 0  # q > k + 2, the constant-free analogue

    def to_row(self) -> dict:
        return {
            "q": self.q,
            "k": self.k,
            "l": "inf" if math.isinf(self.level) else int(self.level),
            "threshold": "inf" if math.isinf(self.threshold) else str(self.exact),
            "threshold_float": self.threshold,
            "satisfied": self.satisfied,
            "vacuous": self.vacuous,
            "chain_threshold": self.chain_threshold,
            "fujimoto_threshold": self.fujimoto,
        }


def _threshold(c: int, l) -> Fraction | None:
    if math.isinf(l):
        return Fraction(c, 2)
    den = 2 * int(l) - 175
    return None if den <= 0 else Fraction(c * int(l), den)


def evaluate_bound(q: int, k: int, level=math.inf) -> FinitenessBound:
    """Threshold (5k+3) l / (2l - 175); (5k+3)/2 for l = inf; vacuous for l <= 87."""
    if q < 2 or k < 1:
        raise ValueError("need q >= 2 and k >= 1")
    l = check_level(level)
    if not math.isinf(l) and l != int(l):
        raise ValueError("truncation level must be an integer or inf")
    t = _threshold(5 * k + 3, l)
    chain = _threshold(5 * k + 7, l)
    chain_f = math.inf if chain is None else float(chain)
    if t is None:
        return FinitenessBound(q, k, l, math.inf, False, True, None, chain_f, k + 2)
    return FinitenessBound(q, k, l, float(t), q > t, False, t, chain_f, k + 2)


def minimal_q(k: int, level=math.inf) -> int | None:
    t = _threshold(5 * k + 3, check_level(level))
    return None if t is None else math.floor(t) + 1


def bound_table(ks: Sequence[int], levels: Sequence, q: int | None = None) -> list[FinitenessBound]:
    """One row per (k, l); with ``q=None`` each row uses the least q satisfying the bound."""
    rows = []
    for k in ks:
        for l in levels:
            qq = q if q is not None else (minimal_q(k, l) or max(2, k + 1))
            rows.append(evaluate_bound(max(qq, 2), k, l))
    return rows


# -- sweep checks ------------------------------------------------------------------------


def check_auxiliary_bounds(
    f_list: Sequence,
    g,
    S: FiniteSet,
    level,
    radii: Sequence[float],
    r0: float = math.inf,
    limit: float = SMALL_TERM_LIMIT,
    ctx: SweepContext | None = None,
) -> list[MarginReport]:
    """Sweep both auxiliary bounds of the finiteness argument.

    ``phi-lower[j]``: (q-1) T0(f_j) <= T0(phi).
    ``phi-upper``:    sum_j Nbar0(phi_j = 0) <= (k + 1 + 35q/l) sum_j T0(f_j).
    ``chain``:        the arithmetic 2(q-1) <= 5(k + 1 + 35q/l), one row.
    """
    objs = build_theorem13_objects(f_list, g, S)
    l = check_level(level)
    q, k = S.q, objs.k
    factor = k + 1 + (0.0 if math.isinf(l) else 35 * q / l)
    ctx = ctx or SweepContext(radii, r0)
    Tphi = ctx.T_values(objs.phi)
    Tg = ctx.T_values(objs.g)
    Tf = [ctx.T_values(f) for f in objs.fs]
    reports: list[MarginReport] = []
    for j, f in enumerate(objs.fs, start=1):
        adj = ctx.adjusted(f)
        rows = [
            Row(r, adj[i], (q - 1) * Tf[j - 1][i], [("T(phi)", Tphi[i])], regressor(r, Tg[i], r0))
            for i, r in enumerate(ctx.radii)
        ]
        reports += assemble(f"phi-lower[{j}]", rows, "small_term", limit)
    adj = ctx.adjusted(objs.g)
    nb = [ctx.N(ph, 0j, 1, adj) for ph in objs.phis]
    rows = []
    for i, r in enumerate(ctx.radii):
        lhs = math.fsum(n[i] for n in nb)
        rhs = factor * math.fsum(t[i] for t in Tf)
        rows.append(Row(r, adj[i], lhs, [(f"{factor:.6g}*sum T(f_j)", rhs)], regressor(r, Tg[i], r0)))
    reports += assemble("phi-upper", rows, "small_term", limit)
    lhs, rhs = 2 * (q - 1), 5 * factor
    res = rhs - lhs
    reports.append(
        MarginReport("chain", ctx.radii[-1], float(lhs), (("5*(k+1+35q/l)", rhs),), res, PASS if res >= 0 else FAIL)
    )
    return reports
