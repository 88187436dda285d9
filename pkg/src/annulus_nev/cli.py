"""Command-line front end.

    annulus-nev smt-const --f "exp(z)" --targets 0,inf,1,-1 --radii 2:50:12 --out run1

Each run writes its CSV output(s), a deterministic ``manifest.json`` and a
separate ``timings.json``.  Exit status: 0 when every verdict passes (with
or without a small term), 2 when any verdict fails, 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time

from . import __version__
from .config import COMMANDS, JobConfig, from_mapping, load_config, parse_radii_spec, validate
from .errors import AnnulusError, ConfigError, ExprSyntaxError
from .expr import MeroExpr
from .functionals import (
    DIVISOR_MARGIN,
    characteristic_sweep,
    counting_value,
    fmt,
    jensen_check,
    proximity,
)
from .divisors import divisor_of
from .inequalities import SweepContext, check_smt_constants, check_smt_moving, classify_admissible
from .parser import parse, parse_target
from .reports import FAIL, PASS, overall_verdict, reports_csv, small_term_coefficient, verdicts_by_id

MANIFEST_SCHEMA = 1


def _expr(cfg: JobConfig, *names: str) -> MeroExpr:
    for name in names:
        if name in cfg.expressions:
            return _parse_field(cfg.expressions[name], f"expressions.{name}")
    raise ConfigError(f"expressions.{names[0]}", "missing")


def _parse_field(text: str, path: str):
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        exc.field = path
        raise


def _targets(cfg: JobConfig, n: int | None = None, at_least: int | None = None) -> list:
    if n is not None and len(cfg.targets) != n:
        raise ConfigError("targets", f"expected {n} targets, got {len(cfg.targets)}")
    if at_least is not None and len(cfg.targets) < at_least:
        raise ConfigError("targets", f"expected at least {at_least} targets, got {len(cfg.targets)}")
    out = []
    for i, t in enumerate(cfg.targets):
        try:
            out.append(parse_target(t))
        except ExprSyntaxError as exc:
            exc.field = f"targets[{i}]"
            raise
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


class _Run:
    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self.files: dict[str, str] = {}
        self.summary: dict = {}
        self.warnings: list[str] = []
        self.discrepancies: list[str] = []
        self.adjusted: dict[str, list] = {}
        self.verdict = PASS
        self.timings: dict[str, float] = {}

    def ctx(self) -> SweepContext:
        return SweepContext(self.cfg.radii, self.cfg.r0, self.cfg.tolerances.quad)

    def note_adjusted(self, name: str, radii, adjusted) -> None:
        self.adjusted[name] = list(adjusted)
        for r, a in zip(radii, adjusted):
            if a != r:
                self.warnings.append(f"jitter: circle |z|={fmt(r)} moved to {fmt(a)} for {name}")

    def add_reports(self, reports, name: str = "reports.csv") -> None:
        self.files[name] = reports_csv(reports)
        self.summary["verdicts"] = verdicts_by_id(reports)
        self.summary["small_term_coefficient"] = small_term_coefficient(reports)
        self.verdict = overall_verdict(reports)
        seen = {}
        for r in reports:
            if r.adjusted_radius is not None and r.adjusted_radius != r.radius:
                seen[r.radius] = r.adjusted_radius
        for r, a in sorted(seen.items()):
            self.warnings.append(f"jitter: circle |z|={fmt(r)} moved to {fmt(a)}")


# -- commands ------------------------------------------------------------------------------


def cmd_analyze(run: _Run) -> None:
    cfg = run.cfg
    f = _expr(cfg, "f")
    T = characteristic_sweep(f, cfg.radii, cfg.tolerances.quad)
    outer = cfg.radii[-1] * (1 + DIVISOR_MARGIN)
    zeros, poles = divisor_of(f, 0, outer), divisor_of(f, None, outer)
    rows = []
    for t in T:
        ra = t.adjusted_radius
        m = proximity(f, t.radius, cfg.tolerances.quad, poles)
        rows.append(
            (t.radius, ra, t.value, m.value, counting_value(zeros, ra), counting_value(poles, ra),
             counting_value(zeros, ra, 1), counting_value(poles, ra, 1), t.quad_error)
        )
    run.files["analyze.csv"] = _csv(
        ("r", "adjusted_r", "T", "m", "N_zeros", "N_poles", "Nbar_zeros", "Nbar_poles", "quad_error"), rows
    )
    run.note_adjusted("f", cfg.radii, [t.adjusted_radius for t in T])
    if len(cfg.radii) >= 8:
        adm = classify_admissible(f, cfg.radii, cfg.r0, cfg.tolerances.quad)
        run.summary["admissibility"] = {"verdict": adm.verdict, "ratio_growth": adm.ratio_growth, "fit": adm.fit.to_json()}
    else:
        run.warnings.append("admissibility: skipped, needs at least 8 radii")


def cmd_jensen(run: _Run) -> None:
    cfg = run.cfg
    f = _expr(cfg, "f")
    rows = []
    worst = 0.0
    for r in cfg.radii:
        j = jensen_check(f, r, cfg.tolerances.quad)
        ok = j.residual < cfg.tolerances.jensen
        worst = max(worst, j.residual)
        rows.append((r, j.adjusted_radius, j.lhs, j.rhs, j.residual, j.quad_error, PASS if ok else FAIL))
        if not ok:
            run.verdict = FAIL
    run.files["jensen.csv"] = _csv(("r", "adjusted_r", "counting_side", "quadrature_side", "residual", "quad_error", "verdict"), rows)
    run.summary["max_residual"] = worst
    run.note_adjusted("f", cfg.radii, [r[1] for r in rows])


def cmd_smt_const(run: _Run) -> None:
    cfg = run.cfg
    run.add_reports(
        check_smt_constants(_expr(cfg, "f"), _targets(cfg, at_least=3), cfg.radii, cfg.r0, cfg.tolerances.small_term_limit, run.ctx())
    )


def cmd_smt_moving(run: _Run) -> None:
    cfg = run.cfg
    run.add_reports(
        check_smt_moving(_expr(cfg, "g", "f"), _targets(cfg, at_least=5), cfg.radii, cfg.r0, cfg.tolerances.small_term_limit, run.ctx())
    )


def _lemma(run: _Run, n: int) -> None:
    from .transforms import build_l31, build_l32, check_bounds

    cfg = run.cfg
    f1 = _expr(cfg, "f1", "f")
    targets = _targets(cfg, n=n)
    if any(t is None for t in targets):
        raise ConfigError("targets", "transform targets must be finite")
    t = build_l31(f1, *targets) if n == 3 else build_l32(f1, *targets)
    run.add_reports(check_bounds(t, cfg.radii, cfg.r0, run.ctx()))
    run.summary["f2"] = str(t.f2)
    run.summary["b"] = str(t.b)


def cmd_lemma31(run: _Run) -> None:
    _lemma(run, 3)


def cmd_lemma32(run: _Run) -> None:
    _lemma(run, 4)


def cmd_claim38(run: _Run) -> None:
    from .transforms import build_determinant_f, check_claim38, claim38_objects, classify_degenerate_case

    cfg = run.cfg
    if "f" in cfg.expressions:
        f, b1, b2 = _expr(cfg, "f"), _expr(cfg, "b1"), _expr(cfg, "b2")
    else:
        targets = _targets(cfg, n=5)
        if any(t is None for t in targets):
            raise ConfigError("targets", "targets must be finite")
        f, b1, b2 = claim38_objects(_expr(cfg, "g"), *targets)
    d = build_determinant_f(f, b1, b2)
    run.summary["determinant_vanishes"] = d.is_degenerate
    run.summary["degenerate_case"] = classify_degenerate_case(d)
    run.add_reports(check_claim38(f, b1, b2, cfg.radii, cfg.r0, cfg.tolerances.small_term_limit, run.ctx()))


def cmd_sharing(run: _Run) -> None:
    from .sharing import FiniteSet, build_ps, check_auxiliary_bounds, evaluate_bound, shares_set

    cfg = run.cfg
    g = _expr(cfg, "g")
    if not cfg.set:
        raise ConfigError("set", "missing")
    S = FiniteSet(tuple(_set_value(x, i) for i, x in enumerate(cfg.set)))
    cands = [_parse_field(t, f"candidates[{i}]") for i, t in enumerate(cfg.candidates)]
    outer = cfg.radii[-1] * (1 + DIVISOR_MARGIN)
    rows = []
    for j, f in enumerate(cands, start=2):
        inst = shares_set(f, g, S, cfg.level, outer)
        rows.append((j, str(f), inst.shares, inst.f_sum.degree, inst.g_sum.degree))
        if not inst.shares:
            run.warnings.append(f"sharing: candidate {j} does not share S with g on A({fmt(outer)})")
    run.files["sharing.csv"] = _csv(("j", "candidate", "shares", "f_sum_degree", "g_sum_degree"), rows)
    _, k, _ = build_ps(S)
    run.add_reports(check_auxiliary_bounds(cands, g, S, cfg.level, cfg.radii, cfg.r0, cfg.tolerances.small_term_limit, run.ctx()))
    if S.q >= 2:
        run.summary["bound"] = evaluate_bound(S.q, k, cfg.level).to_row()
    run.summary["uniqueness_polynomial_assumed"] = True
    run.discrepancies += ["threshold-constant", "alpha-orientation", "function-count"]


def _set_value(text: str, i: int) -> complex:
    v = parse_target(text)
    if v is None or isinstance(v, MeroExpr):
        raise ConfigError(f"set[{i}]", "set values must be finite constants")
    return v


def cmd_bound_table(run: _Run) -> None:
    from .sharing import bound_table

    cfg = run.cfg
    rows = [b.to_row() for b in bound_table(cfg.ks, cfg.levels, cfg.q)]
    cols = list(rows[0]) if rows else ["q", "k", "l", "threshold", "satisfied"]
    run.files["bound_table.csv"] = _csv(cols, [[r[c] for c in cols] for r in rows])
    run.discrepancies.append("threshold-constant")


HANDLERS = {
    "analyze": cmd_analyze,
    "jensen": cmd_jensen,
    "smt-const": cmd_smt_const,
    "smt-moving": cmd_smt_moving,
    "lemma31": cmd_lemma31,
    "lemma32": cmd_lemma32,
    "claim38": cmd_claim38,
    "sharing": cmd_sharing,
    "bound-table": cmd_bound_table,
}


# -- output ---------------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def run(cfg: JobConfig) -> tuple[dict, int]:
    """Execute a validated job, write its files into ``cfg.out`` and return (manifest, exit code)."""
    job = _Run(cfg)
    t0 = time.perf_counter()
    HANDLERS[cfg.command](job)
    job.timings["compute"] = time.perf_counter() - t0
    os.makedirs(cfg.out, exist_ok=True)
    outputs = []
    t1 = time.perf_counter()
    for name in sorted(job.files):
        data = job.files[name].encode()
        with open(os.path.join(cfg.out, name), "wb") as fh:
            fh.write(data)
        outputs.append({"name": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
    echo = cfg.echo()
    echo.pop("out")
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "tool": "annulus-nev",
        "version": __version__,
        "config": echo,
        "outputs": outputs,
        "timings_file": "timings.json",
        "adjusted_radii": job.adjusted,
        "summary": job.summary,
        "warnings": job.warnings,
        "discrepancies": sorted(set(job.discrepancies)),
        "verdict": job.verdict,
    }
    with open(os.path.join(cfg.out, "manifest.json"), "w", newline="\n") as fh:
        fh.write(_dump(manifest))
    job.timings["write"] = time.perf_counter() - t1
    with open(os.path.join(cfg.out, "timings.json"), "w", newline="\n") as fh:
        fh.write(_dump(job.timings))
    return manifest, 2 if job.verdict == FAIL else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="annulus-nev", description="Nevanlinna functionals on annuli and inequality sweeps.")
    p.add_argument("command", nargs="?", choices=COMMANDS, help="job to run (may come from --config)")
    p.add_argument("--config", help="TOML job file; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--radii", help="a:b:n geometric schedule or comma-separated list")
    p.add_argument("--r0", help="outer radius R0 (number or inf)")
    p.add_argument("--tol-quad", type=float, dest="tol_quad", help="relative quadrature tolerance")
    p.add_argument("--level", help="truncation level l (integer or inf)")
    p.add_argument("--targets", help="comma-separated targets (constants, inf, or expressions)")
    p.add_argument("--set", dest="set_", help="comma-separated values of S")
    p.add_argument("--candidate", action="append", dest="candidates", help="candidate function for sharing (repeatable)")
    p.add_argument("--ks", help="comma-separated k values for bound-table")
    p.add_argument("--levels", help="comma-separated l values for bound-table")
    p.add_argument("--q", type=int, help="set size for bound-table (default: least q satisfying each row)")
    for name in ("f", "g", "f1", "b1", "b2"):
        p.add_argument(f"--{name}", help=f"expression {name}")
    return p


def _split(text: str) -> list[str]:
    """Split on commas outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur).strip())
    return out


def config_from_args(args) -> JobConfig:
    data = load_config(args.config) if args.config else {}
    if args.command:
        data["command"] = args.command
    if args.out:
        data["out"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.r0:
        data["r0"] = args.r0
    if args.radii:
        data["radii"] = parse_radii_spec(args.radii)
    if args.level:
        data["level"] = args.level
    if args.targets:
        data["targets"] = _split(args.targets)
    if args.set_:
        data["set"] = _split(args.set_)
    if args.candidates:
        data["candidates"] = list(args.candidates)
    if args.ks:
        data["ks"] = [int(x) for x in args.ks.split(",")]
    if args.levels:
        data["levels"] = args.levels.split(",")
    if args.q is not None:
        data["q"] = args.q
    exprs = dict(data.get("expressions", {}))
    for name in ("f", "g", "f1", "b1", "b2"):
        v = getattr(args, name)
        if v is not None:
            exprs[name] = v
    if exprs:
        data["expressions"] = exprs
    cfg = from_mapping(data)
    if args.tol_quad is not None:
        cfg.tolerances.quad = args.tol_quad
    return validate(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        manifest, code = run(cfg)
    except ExprSyntaxError as exc:
        where = getattr(exc, "field", "expression")
        print(f"error: {where}: {exc}", file=sys.stderr)
        return 1
    except (AnnulusError, ValueError, ZeroDivisionError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.command}: {manifest['verdict']} -> {cfg.out}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
