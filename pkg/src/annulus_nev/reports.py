"""Margin reports and the verdict rules applied to radius sweeps.

Two rules turn a residual sequence (RHS - LHS at each radius) into verdicts.

``small_term``
    Negative residuals must be dominated by ``c * x(r)`` where ``x`` is the
    small-term regressor (``log(r T)`` for R0 = inf, ``log(T/(R0 - r))``
    otherwise), floored at 1.  ``c`` is the smallest constant that
    dominates every deficit in the sweep; the sweep passes with a small
    term when ``c < limit``.

``bounded``
    For inequalities that hold up to O(1): the violation ``max(0, -res)``
    must satisfy ``sup < 10 * v(r_min) + 1``.

A row with nonnegative residual is ``pass``; other rows get the sweep
outcome (``pass_with_small_term`` or ``fail``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functionals import GrowthFit, fmt

PASS = "pass"
PASS_SMALL = "pass_with_small_term"
FAIL = "fail"
_RANK = {PASS: 0, PASS_SMALL: 1, FAIL: 2}
SMALL_TERM_LIMIT = 100.0


@dataclass(frozen=True)
class MarginReport:
    inequality_id: str
    radius: float
    lhs: float
    rhs_terms: tuple  # ((name, value), ...)
    residual: float
    verdict: str
    adjusted_radius: float | None = None
    fit: GrowthFit | None = None
    regressor: float | None = None

    @property
    def rhs(self) -> float:
        return math.fsum(v for _, v in self.rhs_terms)

    def recomputed_residual(self) -> float:
        return residual_of(self.lhs, self.rhs_terms)

    def to_json(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "radius": self.radius,
            "adjusted_radius": self.adjusted_radius,
            "lhs": self.lhs,
            "rhs_terms": [{"name": n, "value": v} for n, v in self.rhs_terms],
            "residual": self.residual,
            "fit": self.fit.to_json() if self.fit else None,
            "verdict": self.verdict,
        }


def residual_of(lhs: float, terms) -> float:
    return math.fsum(v for _, v in terms) - lhs


@dataclass
class Row:
    radius: float
    adjusted_radius: float
    lhs: float
    terms: list
    regressor: float = 1.0


def _envelope(deficits: np.ndarray, x: np.ndarray) -> float:
    return float(np.max(deficits / x)) if deficits.size else 0.0


def assemble(
    inequality_id: str,
    rows: Sequence[Row],
    rule: str = "small_term",
    limit: float = SMALL_TERM_LIMIT,
    model: str = "log_r",
) -> list[MarginReport]:
    rows = sorted(rows, key=lambda r: r.radius)
    res = np.array([residual_of(r.lhs, r.terms) for r in rows])
    radii = tuple(r.radius for r in rows)
    viol = np.maximum(0.0, -res)
    if rule == "small_term":
        x = np.array([max(1.0, r.regressor) for r in rows])
        c = _envelope(viol, x)
        rms = float(np.sqrt(np.mean((viol - c * x) ** 2))) if rows else 0.0
        fit = GrowthFit(model, c, 0.0, radii, rms)
        sweep_ok = c < limit
    elif rule == "bounded":
        sweep_ok = bool(viol.size == 0 or viol.max() < 10 * viol[0] + 1)
        lr = np.log(np.array(radii)) if rows else np.zeros(0)
        c = float(lr @ viol / (lr @ lr)) if rows and lr @ lr > 0 else 0.0
        rms = float(np.sqrt(np.mean((viol - c * lr) ** 2))) if rows else 0.0
        fit = GrowthFit("log_r", c, 1.0, radii, rms)
    else:
        raise ValueError(f"unknown verdict rule {rule!r}")
    out = []
    for row, r_ in zip(rows, res):
        verdict = PASS if r_ >= 0 else (PASS_SMALL if sweep_ok else FAIL)
        out.append(
            MarginReport(
                inequality_id,
                row.radius,
                row.lhs,
                tuple(row.terms),
                float(r_),
                verdict,
                row.adjusted_radius,
                fit,
                row.regressor,
            )
        )
    return out


def overall_verdict(reports: Sequence[MarginReport]) -> str:
    if not reports:
        return PASS
    return max((r.verdict for r in reports), key=_RANK.__getitem__)


def verdicts_by_id(reports: Sequence[MarginReport]) -> dict[str, str]:
    ids = sorted({r.inequality_id for r in reports})
    return {i: overall_verdict([r for r in reports if r.inequality_id == i]) for i in ids}


def small_term_coefficient(reports: Sequence[MarginReport]) -> float:
    cs = [r.fit.coefficient for r in reports if r.fit is not None]
    return max(cs) if cs else 0.0


def reports_csv(reports: Sequence[MarginReport]) -> str:
    names: list[str] = []
    for r in reports:
        for n, _ in r.rhs_terms:
            if n not in names:
                names.append(n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["inequality_id", "r", "adjusted_r", "lhs", *names, "residual", "verdict"])
    for r in sorted(reports, key=lambda x: (x.inequality_id, x.radius)):
        d = dict(r.rhs_terms)
        w.writerow(
            [
                r.inequality_id,
                fmt(r.radius),
                fmt(r.adjusted_radius if r.adjusted_radius is not None else r.radius),
                fmt(r.lhs),
                *[fmt(d[n]) if n in d else "" for n in names],
                fmt(r.residual),
                r.verdict,
            ]
        )
    return buf.getvalue()


def reports_json(reports: Sequence[MarginReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True)
