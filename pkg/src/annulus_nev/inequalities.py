"""Radius sweeps for the second-main-theorem family and the admissibility test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .divisors import divisor_of
from .errors import DegenerateFitError, NonDistinctTargetsError
from .expr import Const, MeroExpr, as_expr, is_identically_equal, is_rational_expr, fold_rational
from .functionals import (
    DIVISOR_MARGIN,
    RTOL,
    FunctionalValue,
    GrowthFit,
    characteristic_sweep,
    counting_value,
    fit_growth,
)
from .reports import SMALL_TERM_LIMIT, MarginReport, Row, assemble

INF = None  # target marker for infinity


def target_label(a) -> str:
    if a is None:
        return "inf"
    if isinstance(a, MeroExpr) and not isinstance(a, Const):
        return str(a)
    c = complex(a.value if isinstance(a, Const) else a)
    if c.imag == 0:
        return format(c.real, "g")
    return format(c, "g")


def _normalize_target(a):
    if a is None:
        return None
    if isinstance(a, str) and a.strip().lower() in ("inf", "infinity", "∞"):
        return None
    if isinstance(a, MeroExpr):
        return a.value if isinstance(a, Const) else a
    return complex(a)


def regressor(r: float, T: float, r0: float = math.inf) -> float:
    """Small-term regressor log(r T) (or log(T/(R0 - r))), floored at 1 by the verdict rule."""
    if T <= 0:
        return 1.0
    return math.log(r * T) if math.isinf(r0) else math.log(T / (r0 - r))


class SweepContext:
    """Caches characteristic sweeps and divisors over one list of radii."""

    def __init__(self, radii: Sequence[float], r0: float = math.inf, rtol: float = RTOL):
        radii = [float(r) for r in radii]
        if not radii:
            raise ValueError("empty radius list")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly increasing")
        if radii[0] <= 1 or radii[-1] >= r0:
            raise ValueError("radii must lie in (1, R0)")
        self.radii = radii
        self.r0 = r0
        self.rtol = rtol
        self.outer = radii[-1] * (1 + DIVISOR_MARGIN)
        self._T: dict = {}
        self._div: dict = {}

    def T(self, e) -> list[FunctionalValue]:
        e = as_expr(e)
        if e not in self._T:
            self._T[e] = characteristic_sweep(e, self.radii, self.rtol)
        return self._T[e]

    def T_values(self, e) -> list[float]:
        return [v.value for v in self.T(e)]

    def adjusted(self, e) -> list[float]:
        return [v.adjusted_radius for v in self.T(e)]

    def divisor(self, e, target):
        e = as_expr(e)
        key = (e, target if not isinstance(target, complex) else ("c", target))
        if key not in self._div:
            self._div[key] = divisor_of(e, target, self.outer)
        return self._div[key]

    def N(self, e, target, M=math.inf, radii=None) -> list[float]:
        d = self.divisor(e, target)
        return [counting_value(d, r, M) for r in (radii or self.radii)]


def _check_distinct_constants(targets) -> None:
    seen = []
    for a in targets:
        for b in seen:
            if (a is None and b is None) or (
                a is not None and b is not None and not isinstance(a, MeroExpr) and not isinstance(b, MeroExpr)
                and abs(a - b) <= 1e-12 * (1 + abs(a))
            ):
                raise NonDistinctTargetsError(f"targets {target_label(a)} and {target_label(b)} coincide")
        seen.append(a)


def check_smt_constants(
    f,
    targets,
    radii: Sequence[float],
    r0: float = math.inf,
    limit: float = SMALL_TERM_LIMIT,
    ctx: SweepContext | None = None,
) -> list[MarginReport]:
    """(q-2) T0(r,f) <= sum_i N0(r, zeros of f - a_i) + S(r), constants a_i (None is infinity)."""
    f = as_expr(f)
    targets = [_normalize_target(a) for a in targets]
    if any(isinstance(a, MeroExpr) for a in targets):
        raise ValueError("check_smt_constants takes constant targets; use check_smt_moving")
    q = len(targets)
    if q < 3:
        raise ValueError(f"need at least 3 distinct targets, got {q}")
    _check_distinct_constants(targets)
    ctx = ctx or SweepContext(radii, r0)
    T = ctx.T_values(f)
    adj = ctx.adjusted(f)
    Ns = [(f"N({target_label(a)})", ctx.N(f, a, math.inf, adj)) for a in targets]
    rows = []
    for i, r in enumerate(ctx.radii):
        terms = [(name, vals[i]) for name, vals in Ns]
        rows.append(Row(r, adj[i], (q - 2) * T[i], terms, regressor(r, T[i], r0)))
    return assemble("SMT-constants", rows, "small_term", limit, "log_r" if math.isinf(r0) else "log_T_over_gap")


def _check_distinct_moving(targets) -> None:
    if sum(a is None for a in targets) > 1:
        raise NonDistinctTargetsError("at most one target may be infinity")
    exprs = [(i, as_expr(a)) for i, a in enumerate(targets) if a is not None]
    for x in range(len(exprs)):
        for y in range(x + 1, len(exprs)):
            if is_identically_equal(exprs[x][1], exprs[y][1]):
                raise NonDistinctTargetsError(
                    f"targets {exprs[x][0]} and {exprs[y][0]} are identically equal"
                )


def check_smt_moving(
    g,
    targets,
    radii: Sequence[float],
    r0: float = math.inf,
    limit: float = SMALL_TERM_LIMIT,
    ctx: SweepContext | None = None,
    inequality_id: str = "SMT-moving",
) -> list[MarginReport]:
    """(2q/5) T0(r,g) <= sum_i Nbar0(r, zeros of g - a_i) + 35 sum_i T0(r, a_i) + S(r).

    Targets may be moving (expressions); at most one may be infinity.
    """
    g = as_expr(g)
    targets = [_normalize_target(a) for a in targets]
    q = len(targets)
    if q < 5:
        raise ValueError(f"need at least 5 targets, got {q}")
    _check_distinct_moving(targets)
    ctx = ctx or SweepContext(radii, r0)
    T = ctx.T_values(g)
    adj = ctx.adjusted(g)
    nbar = [(f"Nbar({target_label(a)})", ctx.N(g, a, 1, adj)) for a in targets]
    ta = []
    for a in targets:
        if a is None:
            continue
        if isinstance(a, MeroExpr):
            ta.append((f"35*T({target_label(a)})", [35 * v for v in ctx.T_values(a)]))
        else:
            ta.append((f"35*T({target_label(a)})", [0.0] * len(ctx.radii)))
    rows = []
    for i, r in enumerate(ctx.radii):
        terms = [(n, v[i]) for n, v in nbar] + [(n, v[i]) for n, v in ta]
        t_sum = T[i] + sum(v[i] for _, v in ta) / 35
        rows.append(Row(r, adj[i], (2 * q / 5) * T[i], terms, regressor(r, t_sum, r0)))
    return assemble(inequality_id, rows, "small_term", limit, "log_r" if math.isinf(r0) else "log_T_over_gap")


ADMISSIBLE = "admissible_evidence"
NOT_ADMISSIBLE = "not_admissible_evidence"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AdmissibilityResult:
    verdict: str
    fit: GrowthFit
    ratio_growth: float
    slopes: tuple


def admissibility_scale(r: float, r0: float = math.inf) -> float:
    """log r for R0 = inf, else log(R0/(R0 - r)) (= -log(R0 - r) up to a constant)."""
    return math.log(r) if math.isinf(r0) else math.log(r0 / (r0 - r))


def classify_admissible(e, radii: Sequence[float], r0: float = math.inf, rtol: float = RTOL) -> AdmissibilityResult:
    """Evidence for or against ``limsup T0 / log r = inf`` from a finite sweep.

    * admissible_evidence: T0/scale grows more than tenfold across the sweep
      and the local slopes dT0/dscale keep increasing over its upper half;
    * not_admissible_evidence: those upper-half slopes stay within 20% of
      their mean (T0 is asymptotically linear in the scale);
    * inconclusive otherwise.
    """
    e = as_expr(e)
    radii = [float(r) for r in radii]
    if len(radii) < 8:
        raise DegenerateFitError("admissibility needs at least 8 radii")
    x = np.array([admissibility_scale(r, r0) for r in radii])
    if is_rational_expr(e) and fold_rational(e).is_constant:
        return AdmissibilityResult(NOT_ADMISSIBLE, GrowthFit("log_r", 0.0, 1.0, tuple(radii), 0.0), 1.0, ())
    ctx = SweepContext(radii, r0, rtol)
    T = np.array(ctx.T_values(e))
    fit = fit_growth(radii, T, "log_r", r0)
    ratio = T / x
    growth = float(ratio[-1] / ratio[0]) if ratio[0] > 0 else math.inf
    slopes = np.diff(T) / np.diff(x)
    upper = slopes[len(slopes) // 2 :]
    mean = float(np.mean(upper))
    flat = mean > 0 and bool(np.all(np.abs(upper - mean) <= 0.2 * mean))
    increasing = bool(np.all(np.diff(upper) > 0))
    if growth > 10 and increasing:
        verdict = ADMISSIBLE
    elif flat:
        verdict = NOT_ADMISSIBLE
    else:
        verdict = INCONCLUSIVE
    return AdmissibilityResult(verdict, fit, growth, tuple(float(s) for s in slopes))


def log_derivative_ratios(f, radii: Sequence[float], rtol: float = RTOL) -> list[tuple[float, float, float]]:
    """(r, m0(r, f'/f), m0(r, f'/f) / T0(r, f)) along a sweep."""
    from .expr import log_derivative
    from .functionals import proximity

    f = as_expr(f)
    ld = log_derivative(f)
    ctx = SweepContext(radii, rtol=rtol)
    T = ctx.T_values(f)
    out = []
    for r, t in zip(ctx.radii, T):
        m = proximity(ld, r, rtol).value
        out.append((r, m, m / t))
    return out
