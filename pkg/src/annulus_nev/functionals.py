"""Counting, proximity and characteristic functions on the annulus.

Notation: for ``r > 1`` the annulus functionals look at the two circles
``|z| = r`` and ``|z| = 1/r`` and subtract twice the unit circle.

* ``counting``      N0^[M](r, d), closed form from the divisor points
* ``proximity``     m0(r, f), trapezoidal circle means of log+|f|
* ``characteristic`` T0(r, f) = m0(r, f) + N0(r, poles of f)
* ``jensen_check``  N0(r, zeros) - N0(r, poles) against circle means of log|f|
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .contour import JITTER_STEP
from .divisors import Divisor, check_level, pole_divisor, rational_divisors
from .errors import (
    BoundaryZeroError,
    DegenerateFitError,
    QuadratureFailure,
    RadiusOutOfRangeError,
)
from .expr import MeroExpr, as_expr, evaluate_array, fold_rational, is_rational_expr
from .polynomials import RationalFn
from .quadrature import RTOL, ContourHit, circle_mean

# outward radius jitters, in clearance units; the unit circle is never moved
JITTER = (0.0, 1.0, 0.5, 0.25, 0.75)
# sweeps fetch divisors slightly beyond the largest jittered radius
DIVISOR_MARGIN = 4 * JITTER_STEP


@dataclass(frozen=True)
class FunctionalValue:
    kind: str  # "N", "Nbar", "m" or "T"
    radius: float
    truncation: float
    value: float
    quad_error: float = 0.0
    adjusted_radius: float | None = None
    cartan_drift: float | None = None

    def __post_init__(self):
        if self.adjusted_radius is None:
            object.__setattr__(self, "adjusted_radius", self.radius)


@dataclass(frozen=True)
class GrowthFit:
    model: str  # "log_r", "r_power" or "log_T_over_gap"
    coefficient: float
    exponent: float
    sample_radii: tuple
    residual_rms: float

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "sample_radii": list(self.sample_radii),
            "residual_rms": self.residual_rms,
        }


# -- counting ---------------------------------------------------------------------


def counting_value(d: Divisor, r: float, M=math.inf) -> float:
    M = check_level(M)
    logr = math.log(r)
    parts = []
    for a, nu in d.points:
        w = min(M, nu) if nu > 0 else nu
        if w == 0:
            continue
        la = math.log(abs(a))
        if 0.0 <= la <= logr:
            parts.append(w * (logr - la))
        elif -logr < la < 0.0:
            parts.append(w * (logr + la))
    return math.fsum(parts)


def counting(d: Divisor, r: float, M=math.inf) -> FunctionalValue:
    """N0^[M](r, d) in closed form.

    A point with ``1 <= |a| <= r`` contributes ``min(M, mult) log(r/|a|)`` and
    one with ``1/r < |a| < 1`` contributes ``min(M, mult) log(r |a|)``.
    """
    if not r > 1:
        raise RadiusOutOfRangeError(f"radius must exceed 1, got {r}")
    if r > d.valid_outer * (1 + 1e-12):
        raise RadiusOutOfRangeError(f"radius {r} beyond divisor validity {d.valid_outer}")
    M = check_level(M)
    return FunctionalValue("Nbar" if M == 1 else "N", r, M, counting_value(d, r, M))


# -- circle means -----------------------------------------------------------------


def _log_plus(e: MeroExpr):
    def f(z):
        v, poles = evaluate_array(e, z, check_overflow=False)
        if np.any(poles):
            raise ContourHit()
        with np.errstate(divide="ignore"):
            return np.maximum(0.0, np.log(np.abs(v)))

    return f


def _log_abs_rational(fn: RationalFn):
    def f(z):
        p = np.abs(fn.num(z))
        q = np.abs(fn.den(z))
        if np.any(p == 0) or np.any(q == 0):
            raise ContourHit()
        return np.log(p) - np.log(q)

    return f


_UNIT_CACHE: dict = {}
# poles closer than this fraction of the radius get their log singularity subtracted
NEAR_FRACTION = 0.05


def _subtracted(func, poles: Divisor | None, t: float):
    """Integrand plus ``m log|z - a|`` for poles near ``|z| = t``, and the exact mean added back.

    Near a pole of order m, ``log+|f| = -m log|z - a| + smooth``, so the sum
    is smooth there; the circle mean of ``log|z - a|`` is ``log max(t, |a|)``.
    """
    near = [(a, m) for a, m in (poles.points if poles else ()) if abs(abs(a) - t) < NEAR_FRACTION * t]
    if not near:
        return func, 0.0

    def g(z):
        v = func(z)
        for a, m in near:
            v = v + m * np.log(np.abs(z - a))
        return v

    return g, math.fsum(m * math.log(max(t, abs(a))) for a, m in near)


def _mean_on(func, poles, t: float, rtol: float):
    g, corr = _subtracted(func, poles, t)
    cm = circle_mean(g, t, rtol=rtol)
    return cm.value - corr, cm.error


def _unit_mean(key, func, rtol, poles=None):
    hit = _UNIT_CACHE.get((key, rtol))
    if hit is None:
        try:
            hit = _mean_on(func, poles, 1.0, rtol)
        except (ContourHit, QuadratureFailure) as exc:
            raise BoundaryZeroError("singularity on the unit circle; that contour is never moved") from exc
        _UNIT_CACHE[(key, rtol)] = hit
    return hit


def _two_circles(func, r: float, rtol: float, poles=None):
    """Means on |z| = r' and 1/r' for the first jitter r' that works."""
    last = None
    for s in JITTER:
        ra = r * (1 + s * JITTER_STEP)
        try:
            hi = _mean_on(func, poles, ra, rtol)
            lo = _mean_on(func, poles, 1 / ra, rtol)
            return ra, hi, lo
        except (ContourHit, QuadratureFailure) as exc:
            last = exc
    if isinstance(last, QuadratureFailure):
        raise last
    raise BoundaryZeroError(f"singularity within clearance of |z| = {r} or 1/{r} for every jitter")


def proximity(e, r: float, rtol: float = RTOL, poles: Divisor | None = None) -> FunctionalValue:
    """m0(r, e) with the quadrature error estimate and the radius actually used.

    ``poles`` (computed when omitted) lets log singularities of poles close
    to a circle be subtracted analytically before quadrature.
    """
    e = as_expr(e)
    if not r > 1:
        raise RadiusOutOfRangeError(f"radius must exceed 1, got {r}")
    if poles is None or poles.valid_outer < r * (1 + JITTER_STEP):
        poles = pole_divisor(e, outer=r * (1 + DIVISOR_MARGIN))
    func = _log_plus(e)
    unit, uerr = _unit_mean(("m", e), func, rtol, poles)
    ra, (hi, herr), (lo, lerr) = _two_circles(func, r, rtol, poles)
    return FunctionalValue("m", r, math.inf, hi + lo - 2 * unit, herr + lerr + 2 * uerr, ra)


def _cartan_mean(fn: RationalFn, r: float, rtol: float) -> float:
    def f(z):
        return 0.5 * np.log(np.abs(fn.num(z)) ** 2 + np.abs(fn.den(z)) ** 2)

    return (
        circle_mean(f, r, rtol=rtol).value
        + circle_mean(f, 1 / r, rtol=rtol).value
        - 2 * circle_mean(f, 1.0, rtol=rtol).value
    )


def characteristic(e, r: float, poles: Divisor | None = None, rtol: float = RTOL) -> FunctionalValue:
    """T0(r, e) = m0 + N0(poles).

    For rational inputs ``cartan_drift`` holds T0 minus the circle-mean form
    built on ``log sqrt(|num|^2 + |den|^2)``; it stays bounded in ``r``.
    """
    e = as_expr(e)
    if poles is None or poles.valid_outer < r * (1 + JITTER_STEP):
        poles = pole_divisor(e, outer=r * (1 + DIVISOR_MARGIN))
    m = proximity(e, r, rtol, poles)
    ra = m.adjusted_radius
    n = counting_value(poles, ra)
    total = m.value + n
    drift = None
    if is_rational_expr(e):
        drift = total - _cartan_mean(fold_rational(e), ra, rtol)
    return FunctionalValue("T", r, math.inf, total, m.quad_error, ra, drift)


def characteristic_sweep(e, radii: Sequence[float], rtol: float = RTOL) -> list[FunctionalValue]:
    e = as_expr(e)
    poles = pole_divisor(e, outer=max(radii) * (1 + DIVISOR_MARGIN))
    return [characteristic(e, r, poles, rtol) for r in radii]


def counting_sweep(d: Divisor, radii: Sequence[float], M=math.inf, adjusted: Sequence[float] | None = None) -> list[FunctionalValue]:
    adjusted = adjusted or radii
    out = []
    for r, ra in zip(radii, adjusted):
        v = counting(d, ra, M)
        out.append(FunctionalValue(v.kind, r, v.truncation, v.value, 0.0, ra))
    return out


# -- Jensen -----------------------------------------------------------------------


@dataclass(frozen=True)
class JensenCheck:
    radius: float
    adjusted_radius: float
    lhs: float  # closed-form counting side
    rhs: float  # quadrature side
    quad_error: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def jensen_check(f, r: float, rtol: float = RTOL) -> JensenCheck:
    if isinstance(f, RationalFn):
        fn = f
    else:
        fn = fold_rational(as_expr(f))
    if fn.is_zero:
        raise ValueError("Jensen's formula needs a nonzero function")
    func = _log_abs_rational(fn)
    unit, uerr = _unit_mean(("j", fn), func, rtol)
    ra, (hi, herr), (lo, lerr) = _two_circles(func, r, rtol)
    zeros, poles = rational_divisors(fn, ra * (1 + DIVISOR_MARGIN))
    lhs = counting_value(zeros, ra) - counting_value(poles, ra)
    rhs = hi + lo - 2 * unit
    return JensenCheck(r, ra, lhs, rhs, herr + lerr + 2 * uerr)


def jensen_residual(f, r: float, rtol: float = RTOL) -> float:
    """|N0(zeros) - N0(poles) - (circle means of log|f|)| at radius r."""
    return jensen_check(f, r, rtol).residual


# -- growth fitting -------------------------------------------------------------------


def _as_pairs(samples):
    return [(float(r), float(v)) for r, v in samples]


def small_term_regressor(r: float, T: float, r0: float = math.inf) -> float:
    if math.isinf(r0):
        return math.log(r * T)
    return math.log(T / (r0 - r))


def fit_small_term(samples, T_samples, r0: float = math.inf) -> GrowthFit:
    """Least-squares ``c`` in ``value ~ c * log(r T)`` (``c * log(T/(R0 - r))`` for finite R0)."""
    s = _as_pairs(samples)
    t = _as_pairs(T_samples)
    if len(s) < 6 or len(s) != len(t):
        raise DegenerateFitError("need at least 6 radii with matching T samples")
    radii = [r for r, _ in s]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DegenerateFitError("radii must be strictly increasing")
    Ts = np.array([v for _, v in t])
    if np.any(Ts <= 0):
        raise DegenerateFitError("T must be positive for the log regressor")
    if np.ptp(Ts) <= 1e-12 * max(1.0, float(np.max(np.abs(Ts)))):
        raise DegenerateFitError("T is constant across the samples")
    x = np.array([small_term_regressor(r, T, r0) for r, T in zip(radii, Ts)])
    y = np.array([v for _, v in s])
    den = float(x @ x)
    if den == 0:
        raise DegenerateFitError("regressor vanishes at every radius")
    c = float(x @ y) / den
    rms = float(np.sqrt(np.mean((y - c * x) ** 2)))
    return GrowthFit("log_T_over_gap" if math.isfinite(r0) else "log_r", c, 0.0, tuple(radii), rms)


def fit_growth(radii: Sequence[float], values: Sequence[float], model: str = "log_r", r0: float = math.inf) -> GrowthFit:
    """Fit ``value ~ c log r`` (or ``-c log(R0 - r)``) or ``value ~ c r^p``."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 2:
        raise DegenerateFitError("need at least two radii")
    if model == "r_power":
        if np.any(v <= 0):
            raise DegenerateFitError("power fit needs positive values")
        A = np.vstack([np.ones_like(r), np.log(r)]).T
        (lc, p), *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
        pred = math.exp(lc) * r**p
        return GrowthFit("r_power", math.exp(lc), float(p), tuple(radii), float(np.sqrt(np.mean((v - pred) ** 2))))
    x = np.log(r) if math.isinf(r0) else -np.log(r0 - r)
    c = float(x @ v / (x @ x))
    return GrowthFit(model, c, 1.0, tuple(radii), float(np.sqrt(np.mean((v - c * x) ** 2))))


# -- radius schedules and CSV -------------------------------------------------------------


def geometric_radii(r_min: float, r_max: float, n: int) -> list[float]:
    if n < 2:
        raise ValueError("schedule needs at least two radii")
    return [float(x) for x in np.geomspace(r_min, r_max, n)]


def finite_r0_radii(r0: float, n: int, start: int = 1) -> list[float]:
    """``R0 - (R0 - 1) 2^-j`` for ``j = start, ..., start + n - 1``."""
    return [r0 - (r0 - 1) * 2.0 ** (-j) for j in range(start, start + n)]


def fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


SWEEP_COLUMNS = ("r", "adjusted_r", "kind", "truncation", "value", "quad_error")


def sweep_csv(values: Sequence[FunctionalValue]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for v in values:
        w.writerow([fmt(v.radius), fmt(v.adjusted_radius), v.kind, fmt(float(v.truncation)), fmt(v.value), fmt(v.quad_error)])
    return buf.getvalue()


__all__ = [
    "FunctionalValue",
    "GrowthFit",
    "JensenCheck",
    "characteristic",
    "characteristic_sweep",
    "counting",
    "counting_sweep",
    "counting_value",
    "finite_r0_radii",
    "fit_growth",
    "fit_small_term",
    "geometric_radii",
    "jensen_check",
    "jensen_residual",
    "proximity",
    "sweep_csv",
]
