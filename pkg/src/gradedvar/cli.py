"""Command-line interface.

Exit codes: 0 when the computation succeeds or the checked property holds,
1 when a check fails (the report carries a witness), 2 on input errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .checks import CHECKS, run_checks
from .errors import BidegreeError, GradedVarError, ModelError, NotClosedError, TowerError, UnsupportedShapeError
from .forms import GradedForm, word_bidegree
from .homotopy import homotopy_contact, homotopy_density, homotopy_horizontal, homotopy_olver, homotopy_rho_kernel
from .model import Model
from .noether import (
    KoszulTateOperator,
    gauge_condition,
    gauge_symmetry,
    higher_gauge_symmetry,
    koszul_tate,
    kt_symmetry_certificate,
    reproduce_identities,
    verify_tower,
)
from .printer import format_symbol
from .report import FORMATS, Report
from .variational import (
    d,
    d_horizontal,
    delta,
    euler_lagrange,
    is_variational_symmetry,
    lepage_equivalent,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

HOMOTOPY_OPERATORS = {
    "horizontal": homotopy_horizontal,
    "density": homotopy_density,
    "olver": homotopy_olver,
    "contact": homotopy_contact,
    "rho-kernel": homotopy_rho_kernel,
}


class InputError(Exception):
    pass


def _name(model: Model, sym) -> str:
    return format_symbol(sym, model.coords)


def _header(report: Report, model: Model, path: str):
    report.add("model", path)
    report.add("base", " ".join(model.coords))
    report.add("fields", " ".join(
        f"{A.name}:{'odd' if A.odd else 'even'}" for A in model.fields
    ))


def _finish(report: Report, ok: bool) -> int:
    report.add("result", "holds" if ok else "fails")
    return EXIT_OK if ok else EXIT_FAIL


# -- commands


def cmd_euler_lagrange(model: Model, report: Report, args) -> int:
    L = model.lagrangian()
    report.expr("lagrangian", L.density)
    for A, E in euler_lagrange(L).components.items():
        report.expr(f"E[{_name(model, A)}]", E)
    report.add("result", "ok")
    return EXIT_OK


def cmd_lepage(model: Model, report: Report, args) -> int:
    L = model.lagrangian()
    xi = lepage_equivalent(L)
    report.expr("lagrangian", L.density)
    report.expr("lepage", xi)
    residual = d(L.form) - delta(L.form) + d_horizontal(xi)
    report.add("identity", "dL = deltaL - d_H(lepage)")
    report.add("identity.holds", not residual)
    if residual:
        report.expr("witness", residual)
    return _finish(report, not residual)


def cmd_check_symmetry(model: Model, report: Report, args) -> int:
    L = model.lagrangian()
    up = model.derivation()
    for slot, v in sorted(up.horizontal.items()):
        report.expr(f"vector[{model.coords[slot]}]", v)
    for A, v in sorted(up.vertical.items()):
        report.expr(f"vector[{_name(model, A)}]", v)
    report.add("vector.parity", "odd" if up.parity else "even")
    res = is_variational_symmetry(L, up)
    report.add("symmetry.holds", res.holds)
    if res.reason:
        report.add("reason", res.reason)
    if res.lie_derivative is not None:
        report.expr("lie_derivative", res.lie_derivative)
    if res.holds:
        report.expr("sigma", res.sigma)
        report.expr("current", res.current)
    elif res.witness is not None:
        report.expr("witness", res.witness)
    return _finish(report, res.holds)


def _report_tower(model: Model, report: Report, tower) -> tuple[bool, Optional[object]]:
    results = verify_tower(tower)
    checked = {r.name: r for r in results}
    witness = None
    for op in tower.all_operators():
        key = f"identity[{op.name}]"
        report.add(f"{key}.stage", op.stage)
        report.expr(f"{key}.expression", op.expression)
        r = checked.get(op.name)
        if r is None:
            report.add(f"{key}.status", "not checked")
            continue
        report.add(f"{key}.status", "holds" if r.holds else "fails")
        if not r.holds:
            report.expr(f"{key}.residual", r.residual)
            witness = witness if witness is not None else r.residual
    ok = len(results) == len(tower.all_operators()) and all(results)
    return ok, witness


def cmd_check_noether(model: Model, report: Report, args) -> int:
    tower = model.tower()
    report.add("regularity", tower.regularity_asserted)
    ok, witness = _report_tower(model, report, tower)
    if witness is not None:
        report.expr("witness", witness)
    return _finish(report, ok)


def cmd_build_kt(model: Model, report: Report, args) -> int:
    tower = model.tower()
    L = tower.lagrangian
    ok, witness = _report_tower(model, report, tower)
    if not ok:
        report.add("reason", "tower is not verified")
        report.expr("witness", witness)
        return _finish(report, False)
    try:
        kt = koszul_tate(L, tower)
    except UnsupportedShapeError as exc:
        report.add("reason", str(exc))
        residuals = KoszulTateOperator(tower).nilpotency_residuals()
        bad = next(sym for sym, r in residuals.items() if r)
        report.add("witness.generator", _name(model, bad))
        report.expr("witness", residuals[bad])
        return _finish(report, False)
    for g in kt.generators():
        (sym,) = g.symbols()
        report.expr(f"kt[{_name(model, sym)}]", kt(g))
    report.add("nilpotent", kt.is_nilpotent())
    cert = kt_symmetry_certificate(L, tower)
    report.expr("kt_of_extended_lagrangian", cert.kt_of_density)
    if cert.sigma is not None:
        report.expr("certificate.sigma", cert.sigma)
    report.add("certificate.holds", cert.holds)
    return _finish(report, kt.is_nilpotent() and cert.holds)


def cmd_gauge_symmetry(model: Model, report: Report, args) -> int:
    tower = model.tower()
    L = tower.lagrangian
    ok, witness = _report_tower(model, report, tower)
    if not ok:
        report.add("reason", "tower is not verified")
        report.expr("witness", witness)
        return _finish(report, False)
    u = gauge_symmetry(tower)
    for A, v in sorted(u.vertical.items()):
        report.expr(f"u[{_name(model, A)}]", v)
    sym = is_variational_symmetry(L, u)
    report.add("symmetry.holds", sym.holds)
    if sym.holds:
        report.expr("symmetry.current", sym.current)
    else:
        report.expr("witness", sym.witness)
    all_ok = sym.holds
    back = reproduce_identities(tower, 0)
    same = all(a.expression == b.expression for a, b in zip(back, tower.operators(0)))
    report.add("stage[0].reproduced", same)
    all_ok = all_ok and same
    for k in range(1, len(tower.stages)):
        comps = higher_gauge_symmetry(tower, k)
        for g, v in sorted(comps.items()):
            report.expr(f"u[{_name(model, g)}]", v)
        cond = gauge_condition(tower, k)
        for g, a in sorted(cond.alpha.items()):
            report.expr(f"alpha[{_name(model, g)}]", a)
        report.add(f"stage[{k}].gauge_condition", cond.holds)
        for g, r in sorted(cond.residuals.items()):
            if r:
                report.expr(f"stage[{k}].residual[{_name(model, g)}]", r)
        back = reproduce_identities(tower, k, comps)
        same = all(a.expression == b.expression for a, b in zip(back, tower.operators(k)))
        report.add(f"stage[{k}].reproduced", same)
        all_ok = all_ok and cond.holds and same
    return _finish(report, all_ok)


def _auto_operator(phi: GradedForm) -> str:
    bidegrees = {word_bidegree(w) for w in phi.terms}
    if len(bidegrees) != 1:
        raise InputError("homotopy input must have a single bidegree")
    (k, m), = bidegrees
    n = phi.n
    if k == 0:
        return "density" if m == n else "horizontal"
    if k == 1:
        return "rho-kernel" if m == n else "contact"
    raise InputError(f"no homotopy operator for bidegree ({k},{m})")


def cmd_homotopy(model: Model, report: Report, args) -> int:
    phi = model.form()
    report.expr("form", phi)
    if not phi:
        raise InputError("homotopy input is zero")
    name = args.operator if args.operator != "auto" else _auto_operator(phi)
    report.add("operator", name)
    try:
        xi = HOMOTOPY_OPERATORS[name](phi)
    except NotClosedError as exc:
        report.add("reason", str(exc))
        report.expr("witness", exc.witness)
        return _finish(report, False)
    except BidegreeError as exc:
        raise InputError(str(exc)) from None
    report.expr("xi", xi)
    ok = d_horizontal(xi) == phi
    report.add("d_H(xi) == form", ok)
    return _finish(report, ok)


def cmd_selftest(report: Report, args) -> int:
    report.add("seed", args.seed)
    report.add("count", args.count)
    summaries = run_checks(args.seed, args.count, args.check or None)
    ok = True
    for s in summaries:
        report.add(f"check[{s.name}]", f"{s.passed}/{s.total}")
        if s.failures:
            report.add(f"check[{s.name}].first_failure", s.failures[0].replace("\n", " "))
        ok = ok and s.ok
    return _finish(report, ok)


COMMANDS = {
    "euler-lagrange": (cmd_euler_lagrange, "compute Euler-Lagrange expressions"),
    "lepage": (cmd_lepage, "compute the Lepage equivalent and check its identity"),
    "check-symmetry": (cmd_check_symmetry, "decide whether the declared vector field is a variational symmetry"),
    "check-noether": (cmd_check_noether, "verify the declared Noether identities stage by stage"),
    "build-kt": (cmd_build_kt, "build the Koszul-Tate operator and check nilpotency"),
    "gauge-symmetry": (cmd_gauge_symmetry, "synthesize gauge symmetries from the identities"),
    "homotopy": (cmd_homotopy, "invert d_H on the declared form"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="text", help="report format (default: text)")
    common.add_argument("--max-jet-order", type=int, default=8, metavar="K",
                        help="reject models using jets above this order (default: 8)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default: 0)")

    parser = argparse.ArgumentParser(prog="gradedvar", description="Exact graded variational calculus.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("model", help="path to a .model file")
        if name == "homotopy":
            p.add_argument("--operator", choices=["auto", *HOMOTOPY_OPERATORS], default="auto")
    p = sub.add_parser("selftest", parents=[common], help="run randomized identity checks")
    p.add_argument("--count", type=int, default=25, help="instances per check (default: 25)")
    p.add_argument("--check", action="append", choices=list(CHECKS), help="restrict to one check (repeatable)")
    return parser


def _emit(report: Report, args) -> None:
    text = report.render(args.format)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_jet_order < 0:
        parser.error("--max-jet-order must be nonnegative")
    if args.command == "selftest":
        if args.count < 1:
            parser.error("--count must be positive")
        report = Report("selftest")
        code = cmd_selftest(report, args)
        _emit(report, args)
        return code
    try:
        model = Model.from_file(args.model, args.max_jet_order)
    except FileNotFoundError:
        print(f"error: {args.model}: no such file", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"error: {args.model}:{exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {args.model}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    report = Report(args.command, model.coords)
    _header(report, model, args.model)
    handler = COMMANDS[args.command][0]
    try:
        code = handler(model, report, args)
    except (ModelError, InputError, UnsupportedShapeError, BidegreeError) as exc:
        print(f"error: {args.model}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TowerError as exc:
        print(f"error: {args.model}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
