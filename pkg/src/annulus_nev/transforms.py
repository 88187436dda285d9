"""Moebius transforms of a function against targets, and the determinant F.

``build_l31`` / ``build_l32`` form the cross-ratio transforms

    L31:  f2 = (f1 - a1)/(f1 - a2),                 b = (a3 - a1)/(a3 - a2)
    L32:  f2 = (f1 - a1)/(f1 - a2) * (a3 - a2)/(a3 - a1),
          b  = (a4 - a1)/(a4 - a2) * (a3 - a2)/(a3 - a1)

and the bound checkers compare both sides of the three associated
inequalities over a sweep, with the bounded-violation verdict rule.

``build_determinant_f`` expands

        | f f'    f'   f^2 - f   |
    F = | b1 b1'  b1'  b1^2 - b1 |
        | b2 b2'  b2'  b2^2 - b2 |

whose vanishing splits into the four degenerate subcases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .divisors import rational_divisors
from .errors import DegenerateTargetsError
from .expr import (
    ONE,
    ZERO,
    Const,
    MeroExpr,
    as_expr,
    differentiate,
    evaluate_array,
    fold_rational,
    is_identically_equal,
    is_rational_expr,
    log_derivative,
    sample_points,
)
from .inequalities import SweepContext, regressor
from .reports import SMALL_TERM_LIMIT, MarginReport, Row, assemble


@dataclass(frozen=True)
class TransformInstance:
    kind: str  # "L31" or "L32"
    f1: MeroExpr
    targets: tuple
    f2: MeroExpr
    b: MeroExpr


def _targets(raw) -> tuple:
    out = []
    for a in raw:
        if a is None or (isinstance(a, str) and a.strip().lower() in ("inf", "infinity", "∞")):
            raise DegenerateTargetsError("targets of the transform lemmas must not be identically infinity")
        out.append(as_expr(a))
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if is_identically_equal(out[i], out[j]):
                raise DegenerateTargetsError(f"targets a{i + 1} and a{j + 1} are identically equal")
    return tuple(out)


def _matches(built: MeroExpr, direct, n: int = 16) -> bool:
    zs = sample_points(n, seed=7)
    v, p = evaluate_array(built, zs, check_overflow=False)
    w = direct(zs)
    ok = ~p & np.isfinite(w)
    return bool(np.all(np.abs(v[ok] - w[ok]) <= 1e-8 * (1 + np.abs(w[ok]))))


def _vals(e: MeroExpr, zs):
    v, p = evaluate_array(e, zs, check_overflow=False)
    return np.where(p, np.nan, v)


def build_l31(f1, a1, a2, a3) -> TransformInstance:
    f1 = as_expr(f1)
    A = _targets((a1, a2, a3))
    try:
        f2 = (f1 - A[0]) / (f1 - A[1])
    except ZeroDivisionError as exc:
        raise DegenerateTargetsError("f1 coincides with a2") from exc
    b = (A[2] - A[0]) / (A[2] - A[1])

    def direct(zs):
        f, x, y = _vals(f1, zs), _vals(A[0], zs), _vals(A[1], zs)
        with np.errstate(all="ignore"):
            return (f - x) / (f - y)

    if not _matches(f2, direct):
        raise AssertionError("constructed f2 disagrees with its defining formula")
    return TransformInstance("L31", f1, A, f2, b)


def build_l32(f1, a1, a2, a3, a4) -> TransformInstance:
    f1 = as_expr(f1)
    A = _targets((a1, a2, a3, a4))
    k = (A[2] - A[1]) / (A[2] - A[0])
    try:
        f2 = (f1 - A[0]) / (f1 - A[1]) * k
    except ZeroDivisionError as exc:
        raise DegenerateTargetsError("f1 coincides with a2") from exc
    b = (A[3] - A[0]) / (A[3] - A[1]) * k

    def direct(zs):
        f, x, y, w = (_vals(e, zs) for e in (f1, A[0], A[1], A[2]))
        with np.errstate(all="ignore"):
            return (f - x) / (f - y) * (w - y) / (w - x)

    if not _matches(f2, direct):
        raise AssertionError("constructed f2 disagrees with its defining formula")
    return TransformInstance("L32", f1, A, f2, b)


def _bound_rows(t: TransformInstance, ctx: SweepContext):
    """Per-inequality (lhs, terms) lists for the three bounds of an instance."""
    f1, f2, A, b = t.f1, t.f2, t.targets, t.b
    radii = ctx.radii
    T = {i: ctx.T_values(a) for i, a in enumerate(A)}
    adj = ctx.adjusted(f1)
    T1 = ctx.T_values(f1)
    T2 = ctx.T_values(f2)

    def nbar(e, target):
        return ctx.N(e, target, 1, adj)

    def lbl(i):
        return f"a{i + 1}"

    out = {}
    n = len(radii)
    if t.kind == "L31":
        coef_b = [2, 2]
        coef_c = [1, 2, 1]
        n_b = 2
        last = 2
    else:
        coef_b = [3, 3, 3]
        coef_c = [2, 3, 2, 1]
        n_b = 3
        last = 3
    # (a) T(f1) <= T(f2) + sum T(a_i)
    k_a = 2 if t.kind == "L31" else 3
    out["a"] = [
        (T1[j], [("T(f2)", T2[j])] + [(f"T({lbl(i)})", T[i][j]) for i in range(k_a)]) for j in range(n)
    ]
    # (b) Nbar(f2=0) + Nbar(f2=1) + Nbar(f2=inf) <= [Nbar(f1=inf)] + sum (Nbar(f1=a_i) + c T(a_i))
    lhs_b = [x + y + z for x, y, z in zip(nbar(f2, 0), nbar(f2, 1), nbar(f2, None))]
    terms_b = []
    if t.kind == "L31":
        terms_b.append(("Nbar(f1=inf)", nbar(f1, None)))
    for i in range(n_b):
        terms_b.append((f"Nbar(f1={lbl(i)})", nbar(f1, A[i] if not isinstance(A[i], Const) else A[i].value)))
        terms_b.append((f"{coef_b[i]}*T({lbl(i)})", [coef_b[i] * v for v in T[i]]))
    out["b"] = [(lhs_b[j], [(nm, v[j]) for nm, v in terms_b]) for j in range(n)]
    # (c) Nbar(f2=b) <= Nbar(f1=a_last) + sum c_i T(a_i)
    bt = b.value if isinstance(b, Const) else b
    lhs_c = nbar(f2, bt)
    a_last = A[last].value if isinstance(A[last], Const) else A[last]
    terms_c = [(f"Nbar(f1={lbl(last)})", nbar(f1, a_last))]
    for i, c in enumerate(coef_c):
        terms_c.append((f"{c}*T({lbl(i)})", [c * v for v in T[i]]))
    out["c"] = [(lhs_c[j], [(nm, v[j]) for nm, v in terms_c]) for j in range(n)]
    return out, adj


def check_bounds(
    t: TransformInstance, radii: Sequence[float], r0: float = math.inf, ctx: SweepContext | None = None
) -> list[MarginReport]:
    """Bounds (a), (b), (c) of the instance over the sweep, bounded-violation rule."""
    ctx = ctx or SweepContext(radii, r0)
    parts, adj = _bound_rows(t, ctx)
    reports = []
    for key in ("a", "b", "c"):
        rows = [Row(r, adj[j], lhs, terms) for j, (r, (lhs, terms)) in enumerate(zip(ctx.radii, parts[key]))]
        reports += assemble(f"{t.kind}({key})", rows, "bounded")
    return reports


def check_l31_bounds(t: TransformInstance, radii, r0: float = math.inf, ctx=None) -> list[MarginReport]:
    if t.kind != "L31":
        raise ValueError("not an L31 instance")
    return check_bounds(t, radii, r0, ctx)


def check_l32_bounds(t: TransformInstance, radii, r0: float = math.inf, ctx=None) -> list[MarginReport]:
    if t.kind != "L32":
        raise ValueError("not an L32 instance")
    return check_bounds(t, radii, r0, ctx)


# -- determinant F --------------------------------------------------------------------


@dataclass(frozen=True)
class DeterminantF:
    f: MeroExpr
    b1: MeroExpr
    b2: MeroExpr
    F: MeroExpr
    is_degenerate: bool


def _det3(m) -> MeroExpr:
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _row(x: MeroExpr) -> list:
    dx = differentiate(x, check=False)
    return [x * dx, dx, x * x - x]


def build_determinant_f(f, b1, b2) -> DeterminantF:
    f, b1, b2 = as_expr(f), as_expr(b1), as_expr(b2)
    F = _det3([_row(f), _row(b1), _row(b2)])
    return DeterminantF(f, b1, b2, F, is_identically_equal(F, ZERO))


def determinant_f_row_form(f, b1, b2) -> MeroExpr:
    """F with its first row rewritten around ``f - b1``.

    Row one becomes ``(phi, f' - b1', psi)`` with
    ``phi = (f-b1)(f'-b1') + b1'(f-b1) + b1(f'-b1')`` and
    ``psi = (f-b1)^2 + (2 b1 - 1)(f-b1)``; the other rows are unchanged
    (third column ``b^2 - b``).
    """
    f, b1, b2 = as_expr(f), as_expr(b1), as_expr(b2)
    df = differentiate(f, check=False)
    db1 = differentiate(b1, check=False)
    u = f - b1
    du = df - db1
    phi = u * du + db1 * u + b1 * du
    psi = u * u + (2 * b1 - 1) * u
    return _det3([[phi, du, psi], _row(b1), _row(b2)])


SUBCASES = ("Sub1", "Sub2", "Sub3", "Sub4", "NotDegenerate")


def classify_degenerate_case(d: DeterminantF) -> str:
    """First matching subcase when F vanishes identically, else NotDegenerate."""
    if not d.is_degenerate:
        return "NotDegenerate"
    l1, l2 = log_derivative(d.b1), log_derivative(d.b2)
    m1, m2 = log_derivative(d.b1 - ONE), log_derivative(d.b2 - ONE)
    if is_identically_equal(l1, l2):
        return "Sub1"
    if is_identically_equal(m1, m2):
        return "Sub2"
    if is_identically_equal(l1 - l2, m1 - m2):
        return "Sub3"
    return "Sub4"


def claim38_objects(g, a1, a2, a3, a4, a5):
    """(f, b1, b2) of the five-target reduction, with b3 = 0 and b4 = 1."""
    g = as_expr(g)
    A = _targets((a1, a2, a3, a4, a5))
    k = (A[2] - A[0]) / (A[2] - A[1])
    f = (g - A[1]) / (g - A[0]) * k
    b1 = (A[3] - A[1]) / (A[3] - A[0]) * k
    b2 = (A[4] - A[1]) / (A[4] - A[0]) * k
    return f, b1, b2


def check_claim38(
    f, b1, b2, radii: Sequence[float], r0: float = math.inf, limit: float = SMALL_TERM_LIMIT, ctx: SweepContext | None = None
) -> list[MarginReport]:
    """2 T0(f) <= Nbar(f=inf) + sum_{b in b1,b2,0,1} Nbar(f=b) + 18 (T0(b1) + T0(b2)) + S(r)."""
    f, b1, b2 = as_expr(f), as_expr(b1), as_expr(b2)
    ctx = ctx or SweepContext(radii, r0)
    Tf = ctx.T_values(f)
    adj = ctx.adjusted(f)
    Tb1, Tb2 = ctx.T_values(b1), ctx.T_values(b2)

    def tgt(b):
        return b.value if isinstance(b, Const) else b

    series = [
        ("Nbar(f=inf)", ctx.N(f, None, 1, adj)),
        ("Nbar(f=b1)", ctx.N(f, tgt(b1), 1, adj)),
        ("Nbar(f=b2)", ctx.N(f, tgt(b2), 1, adj)),
        ("Nbar(f=0)", ctx.N(f, 0j, 1, adj)),
        ("Nbar(f=1)", ctx.N(f, 1 + 0j, 1, adj)),
        ("18*T(b1)", [18 * v for v in Tb1]),
        ("18*T(b2)", [18 * v for v in Tb2]),
    ]
    rows = []
    for j, r in enumerate(ctx.radii):
        rows.append(
            Row(r, adj[j], 2 * Tf[j], [(n, v[j]) for n, v in series], regressor(r, Tf[j] + Tb1[j] + Tb2[j], r0))
        )
    return assemble("Claim38", rows, "small_term", limit)


@dataclass(frozen=True)
class TransferRecord:
    target: str  # b1, b2, 0 or 1
    point: complex
    multiplicity: int
    f_zero_order: int  # order of F at the point
    holds: bool


def multiple_zero_transfer(f, b1, b2, outer: float = 10.0) -> list[TransferRecord]:
    """Multiple zeros of f - b_i (b3 = 0, b4 = 1) against the zero order of F.

    Rational inputs only; every zero of multiplicity p > 1 away from the
    poles of b1 and b2 must be a zero of F of order at least p - 1.
    """
    f, b1, b2 = as_expr(f), as_expr(b1), as_expr(b2)
    for e in (f, b1, b2):
        if not is_rational_expr(e):
            raise ValueError("multiple_zero_transfer needs rational inputs")
    d = build_determinant_f(f, b1, b2)
    Ffn = fold_rational(d.F)
    F_zeros = None if Ffn.is_zero else rational_divisors(Ffn, outer)[0]
    bad = rational_divisors(fold_rational(b1), outer)[1] + rational_divisors(fold_rational(b2), outer)[1]
    out = []
    for name, b in (("b1", b1), ("b2", b2), ("0", ZERO), ("1", ONE)):
        h = fold_rational(f - b)
        if h.is_zero:
            continue
        zeros, _ = rational_divisors(h, outer)
        for z, p in zeros:
            if p <= 1 or bad.multiplicity_at(z) != 0:
                continue
            order = math.inf if F_zeros is None else F_zeros.multiplicity_at(z)
            out.append(TransferRecord(name, z, p, order if order != math.inf else -1, F_zeros is None or order >= p - 1))
    return out
