"""Command-line front end: ``lieconf <command> [flags]``.

Exit codes: 0 when the report carries no witnesses, 1 on findings (nonzero
residuals, survivors outside a family, unresolved branches), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import itertools
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import cder, classify, cmod, modes
from .errors import LieConfError, NotIndexAdditive, ParseError
from .exactpoly import MPoly, parse_poly, to_rational
from .lca import (
    GradedLCA,
    ParamMode,
    build_graded_lca,
    cw_polynomial,
    jacobi_residual,
    load_presentation,
    param_regime,
    parse_mode,
    skew_residual,
)
from .report import Report

COMMANDS = ("verify", "constraints", "classify", "modes", "derivations", "rank1", "virasoro-module")
WITNESS_GRID = range(-2, 3)


class UsageError(Exception):
    """Bad flag value; the message names the flag."""


# -- flag parsing ------------------------------------------------------------------
def rational_or_sym(text: str) -> str:
    if text.strip() != "sym":
        try:
            to_rational(text)
        except (ParseError, ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(f"expected a rational 'p/q' or 'sym', got {text!r}") from exc
    return text.strip()


def rational(text: str) -> Fraction:
    try:
        return to_rational(text)
    except (ParseError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected a rational 'p/q', got {text!r}") from exc


def int_range(text: str) -> list[int]:
    """``n`` or ``lo..hi`` (inclusive)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if lo_i > hi_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer or 'lo..hi', got {text!r}") from exc


def grid_spec(text: str) -> list[Fraction]:
    """``lo..hi`` or ``lo..hi/q``: numerators lo..hi over denominators 1..q."""
    body, _, den = text.partition("/")
    nums = int_range(body)
    try:
        q = int(den) if den else 1
        if q < 1:
            raise ValueError
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad denominator in grid {text!r}") from exc
    return sorted({Fraction(n, d) for n in nums for d in range(1, q + 1)})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lieconf", description="Exact verification runs for the CW(a, c) conformal algebras.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp: argparse.ArgumentParser, params: bool = True) -> None:
        if params:
            sp.add_argument("--a", type=rational_or_sym, default="sym", help="parameter a: rational or 'sym' (default: sym)")
            sp.add_argument("--c", type=rational_or_sym, default="sym", help="parameter c: rational or 'sym' (default: sym)")
        sp.add_argument("--format", choices=("json", "text"), default="json", help="report format (default: json)")
        sp.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include elapsed_ms (breaks byte-stability)")

    sp = sub.add_parser("verify", help="skew and Jacobi residuals of a presentation")
    common(sp)
    sp.add_argument("--presentation", type=Path, default=None, help="key = value file with name, a, c, P")
    sp.add_argument("--f", default=None, help="structure candidate f(al, be); P = f*D + (f + swap f)*la")

    sp = sub.add_parser("constraints", help="coefficient constraints on the structure polynomial")
    common(sp, params=False)
    sp.add_argument("--deg", type=int, default=1, help="degree bound Dg (default: 1)")

    sp = sub.add_parser("classify", help="bounded-degree classification of the structure polynomial")
    common(sp, params=False)
    sp.add_argument("--deg", type=int, default=2, help="degree bound Dg (default: 2)")
    sp.add_argument("--grid", type=grid_spec, default=None, help="coefficient grid 'lo..hi[/q]' (default: -2..2)")

    sp = sub.add_parser("modes", help="mode Lie algebra and its Lie residuals")
    common(sp)
    sp.add_argument("--via", choices=("closed", "kproducts"), default="kproducts", help="derivation route (default: kproducts)")
    sp.add_argument("--presentation", type=Path, default=None, help="key = value file (kproducts route only)")

    sp = sub.add_parser("derivations", help="outer derivation quotient on a grade window")
    common(sp)
    sp.add_argument("--beta", type=int_range, default=list(range(-2, 3)), help="degree or 'lo..hi' (default: -2..2)")
    sp.add_argument("--window", type=int, default=4, help="grade window N (default: 4)")
    sp.add_argument("--deg-d", type=int, default=3, help="D-degree bound (default: 3)")
    sp.add_argument("--deg-la", type=int, default=3, help="la-degree bound (default: 3)")

    sp = sub.add_parser("rank1", help="rank-one conformal modules on a grade window")
    common(sp)
    sp.add_argument("--window", type=int, default=3, help="grade window N (default: 3)")
    sp.add_argument("--deg-d", type=int, default=3, help="D-degree bound (default: 3)")
    sp.add_argument("--deg-la", type=int, default=3, help="la-degree bound (default: 3)")
    sp.add_argument("--grid", type=grid_spec, default=None, help="parameter grid 'lo..hi[/q]' (default: -2..2/2)")
    sp.add_argument("--aprime", type=rational, default=None, help="check one member c*cprime^al*(D + aprime*la + bprime)")
    sp.add_argument("--bprime", type=rational, default=None, help="see --aprime (default 0 when --aprime is set)")
    sp.add_argument("--cprime", type=rational, default=None, help="see --aprime (default 1 when --aprime is set)")

    sp = sub.add_parser("virasoro-module", help="module residual of (D + a' la + b') over the Virasoro algebra")
    common(sp, params=False)
    sp.add_argument("--aprime", type=rational, default=Fraction(1), help="a' (default: 1)")
    sp.add_argument("--bprime", type=rational, default=Fraction(0), help="b' (default: 0)")
    sp.add_argument("--f", default=None, help="replace the action polynomial in D, la")
    sp.add_argument("--grid", type=grid_spec, default=None, help="sweep (a', b') over 'lo..hi[/q]' instead")
    return p


# -- helpers -----------------------------------------------------------------------
def _mode(args) -> ParamMode:
    try:
        return parse_mode(args.a, args.c)
    except ParseError as exc:
        raise UsageError(f"--a/--c: {exc}") from exc


def _concrete(args, command: str) -> GradedLCA:
    mode = _mode(args)
    if mode.symbolic:
        raise UsageError(
            f"--a/--c: {command} needs concrete rationals; the answer branches on a = 0, c = 0 and c/a in Z"
        )
    return build_graded_lca(cw_polynomial(), mode, f"CW({mode.a},{mode.c})")


def _poly_flag(text: str, flag: str) -> MPoly:
    try:
        return parse_poly(text)
    except LieConfError as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _regime_tag(mode: ParamMode) -> str:
    return "SYMBOLIC" if mode.symbolic else param_regime(mode)


def _point_witness(p: MPoly, grid=WITNESS_GRID) -> dict[str, int] | None:
    """First integer point of the grade/parameter symbols where ``p`` stays nonzero."""
    coeffs = p.coefficients(["D", "la", "mu", "i", "j", "k"])
    lead = next(q for _, q in sorted(coeffs.items(), reverse=True) if q)
    syms = sorted(lead.symbols())
    for point in itertools.product(grid, repeat=len(syms)):
        if lead.evaluate(dict(zip(syms, point))) != 0:
            return dict(zip(syms, point))
    return None


def _fr(x: Fraction) -> str:
    return str(x)


def _mode_params(mode: ParamMode) -> dict[str, str]:
    if mode.symbolic:
        return {"a": "sym", "c": "sym"}
    return {"a": _fr(mode.a), "c": _fr(mode.c)}


# -- commands ----------------------------------------------------------------------
def cmd_verify(args) -> Report:
    if args.f is not None and args.presentation is not None:
        raise UsageError("--f and --presentation are mutually exclusive")
    if args.f is not None:
        f = _poly_flag(args.f, "--f")
        try:
            v = classify.verify_structure_candidate(f)
        except LieConfError as exc:
            raise UsageError(f"--f: {exc}") from exc
        rep = Report("verify", {"f": str(f)}, residuals={"skew": str(v.skew), "jacobi": str(v.jacobi)})
        for name, ok in (("skew", v.skew_ok), ("jacobi", v.jacobi_ok)):
            if not ok:
                point = v.witnesses.get(name)
                rep.add_witness(residual=name, point=dict(zip(("al", "be", "ga"), point)) if point else None)
        return rep
    if args.presentation is not None:
        try:
            A = load_presentation(args.presentation)
        except (OSError, LieConfError) as exc:
            raise UsageError(f"--presentation: {exc}") from exc
    else:
        mode = _mode(args)
        A = build_graded_lca(cw_polynomial(), mode, "CW")
    res = {"skew": skew_residual(A), "jacobi": jacobi_residual(A)}
    params = _mode_params(A.mode)
    if args.presentation is not None:
        params.update(presentation=A.name or str(args.presentation), P=str(A.P))
    rep = Report("verify", params, regime=_regime_tag(A.mode), residuals={k: str(v) for k, v in res.items()})
    for name, r in res.items():
        if not r.is_zero():
            rep.add_witness(residual=name, point=_point_witness(r))
    return rep


def cmd_constraints(args) -> Report:
    cs = classify.generate_structure_constraints(args.deg)
    rendered = cs.render()
    return Report(
        "constraints",
        {"deg": args.deg},
        residuals={f"{r['identity']}:{r['monomial']}": r["constraint"] for r in rendered},
        dimensions={"constraints": len(cs), "unknowns": len(cs.labels)},
    )


def cmd_classify(args) -> Report:
    grid = args.grid if args.grid is not None else list(classify.DEFAULT_GRID)
    sol = classify.solve_structure_bounded(args.deg, grid)
    fam = {
        "formula": str(sol.families[0]),
        "params": ["a", "c"] if args.deg else ["c"],
        "survivors": len(sol.survivors),
        "certificates": [s["stage"] for s in sol.stages if s["verified"]],
    }
    rep = Report(
        "classify",
        {"deg": args.deg, "grid": [_fr(g) for g in sol.grid]},
        families=[fam],
        dimensions={
            "constraints": sol.n_constraints,
            "unknowns": len(classify.unknown_shapes(args.deg)),
            "assignments": sol.assignments_total,
            "nodes_visited": sol.nodes_visited,
            "survivors": len(sol.survivors),
        },
    )
    for s in sol.outside_family:
        rep.add_witness(outside_family=[_fr(x) for x in s])
    for st in sol.stages:
        if not st["verified"]:
            rep.add_witness(stage=st["stage"], detail={k: v for k, v in st.items() if k != "verified"})
    return rep


def cmd_modes(args) -> Report:
    if args.presentation is not None:
        if args.via != "kproducts":
            raise UsageError("--presentation: only the kproducts route accepts a custom presentation")
        try:
            A = load_presentation(args.presentation)
        except (OSError, LieConfError) as exc:
            raise UsageError(f"--presentation: {exc}") from exc
    else:
        A = build_graded_lca(cw_polynomial(), _mode(args), "CW")
    params = {**_mode_params(A.mode), "via": args.via}
    try:
        M = modes.mode_algebra_closed_form(A) if args.via == "closed" else modes.mode_algebra_from_kproducts(A)
    except NotIndexAdditive as exc:
        rep = Report("modes", params)
        rep.add_witness(shift=str(exc))
        return rep
    skew, jac = modes.lie_algebra_residuals(M)
    tag = "SYMBOLIC" if A.mode.symbolic else modes.recognize_special_case(A.mode)
    failures = modes.numeric_jacobi_failures(M)
    rep = Report(
        "modes",
        params,
        regime=tag,
        residuals={"S": str(M.S), "skew": str(skew), "jacobi": str(jac)},
        dimensions={"numeric_points": 3 * 5 ** 6, "numeric_failures": len(failures)},
        shift_x=M.shift,
    )
    for name, r in (("skew", skew), ("jacobi", jac)):
        if not r.is_zero():
            rep.add_witness(residual=name, point=_point_witness(r))
    if failures and jac.is_zero():
        rep.add_witness(numeric=str(failures[0]))
    return rep


def cmd_derivations(args) -> Report:
    A = _concrete(args, "derivations")
    reg = cder.regime(A)
    fams, dims = [], {}
    rep = Report(
        "derivations",
        {"a": _fr(A.mode.a), "c": _fr(A.mode.c), "beta": args.beta, "window": args.window, "deg_d": args.deg_d, "deg_la": args.deg_la},
        regime=reg,
    )
    for b in args.beta:
        sp = cder.solve_derivation_space(A, b, args.window, args.deg_d, args.deg_la)
        dims[f"beta={b}"] = {
            "solutions": sp.solution_dimension,
            "inner": len(sp.inner_basis),
            "central_window": sp.central,
            "quotient": sp.quotient_dimension,
        }
        if not sp.inner_ok:
            rep.add_witness(beta=b, inner="an inner derivation violates the Leibniz rows")
        for cls in sp.representatives:
            full = cder.representative_assignment(sp, cls.poly)
            bad = next(
                (
                    (x, y, r)
                    for x, y in cder.admissible_pairs(b, args.window)
                    if not (r := cder.derivation_residual(A, full, b, x, y, args.window)).is_zero()
                ),
                None,
            )
            fams.append({
                "beta": b,
                "representative": str(cls.poly),
                "residual": "0" if bad is None else str(bad[2]),
                "outside_inner_span": sp.outside_inner_span(full),
            })
            if bad is not None:
                rep.add_witness(beta=b, pair=[bad[0], bad[1]], residual=str(bad[2]))
    rep.families = fams
    rep.dimensions = dims
    return rep


def cmd_rank1(args) -> Report:
    A = _concrete(args, "rank1")
    params = {"a": _fr(A.mode.a), "c": _fr(A.mode.c), "window": args.window}
    if args.aprime is not None or args.bprime is not None or args.cprime is not None:
        ap = args.aprime if args.aprime is not None else Fraction(0)
        bp = args.bprime if args.bprime is not None else Fraction(0)
        cp = args.cprime if args.cprime is not None else Fraction(1)
        if cp == 0:
            raise UsageError("--cprime: must be nonzero")
        params.update(aprime=_fr(ap), bprime=_fr(bp), cprime=_fr(cp))
        cmod._check_window(args.window)
        f = cmod.loop_family_action(A, ap, bp, cp, args.window)
        rep = Report("rank1", params, regime=param_regime(A.mode), residuals={})
        for x, y in cmod.window_pairs(args.window):
            r = cmod.rank1_residual(A, f, x, y)
            rep.residuals[f"({x},{y})"] = str(r)
            if not r.is_zero():
                rep.add_witness(pair=[x, y], residual=str(r))
        return rep
    grid = args.grid if args.grid is not None else list(cmod.DEFAULT_GRID)
    params.update(deg_d=args.deg_d, deg_la=args.deg_la, grid=[_fr(g) for g in grid])
    out = cmod.solve_rank1_family(A, args.window, args.deg_d, args.deg_la, grid)
    fams = [
        {
            "kind": "module",
            "name": f.name,
            "formula": f.formula,
            "params": list(f.params),
            "points_checked": f.points_checked,
            "pairs_checked": f.pairs_checked,
            "residual": f.residual,
        }
        for f in out.families
    ]
    if out.stage1 is not None:
        fams.extend({"kind": "f0_candidate", "formula": s} for s in out.stage1.strings())
    verdicts = Counter(c.verdict for c in out.stage3)
    dims = {"grade_solves": len(out.stage2), "param_points": len(out.stage3)}
    dims.update({f"pair_check_{k}": v for k, v in sorted(verdicts.items())})
    rep = Report("rank1", params, regime=out.regime, families=fams, dimensions=dims)
    for f in out.families:
        if f.residual != "0":
            rep.add_witness(family=f.name, residual=f.residual)
    if not out.complete:
        rep.add_witness(incomplete="unresolved branches or branches closed without a rational root")
    if out.stage1 is not None and not out.stage1.verified:
        rep.add_witness(stage1="a candidate family fails the (0, 0) identity")
    return rep


def cmd_virasoro(args) -> Report:
    action = _poly_flag(args.f, "--f") if args.f is not None else None
    if action is not None:
        try:
            action.check_alphabet(("D", "la"))
        except LieConfError as exc:
            raise UsageError(f"--f: {exc}") from exc
    if args.grid is not None:
        pts = list(itertools.product(args.grid, repeat=2))
        rep = Report("virasoro-module", {"grid": [_fr(g) for g in args.grid]}, dimensions={"grid_points": len(pts)})
        for ap, bp in pts:
            r = cmod.virasoro_module_residual(ap, bp, action)
            if not r.is_zero():
                rep.add_witness(aprime=_fr(ap), bprime=_fr(bp), residual=str(r))
        rep.residuals = {"grid": "0" if rep.passed else "nonzero"}
        return rep
    r = cmod.virasoro_module_residual(args.aprime, args.bprime, action)
    params = {"aprime": _fr(args.aprime), "bprime": _fr(args.bprime)}
    if action is not None:
        params = {"f": str(action)}
    rep = Report("virasoro-module", params, residuals={"module": str(r)})
    if not r.is_zero():
        rep.add_witness(residual=str(r))
    return rep


DISPATCH = {
    "verify": cmd_verify,
    "constraints": cmd_constraints,
    "classify": cmd_classify,
    "modes": cmd_modes,
    "derivations": cmd_derivations,
    "rank1": cmd_rank1,
    "virasoro-module": cmd_virasoro,
}


def run(args: argparse.Namespace) -> Report:
    start = time.perf_counter()
    rep = DISPATCH[args.command](args)
    if args.timing:
        rep.elapsed_ms = int((time.perf_counter() - start) * 1000)
    return rep


VALUE_FLAGS = ("--a", "--c", "--beta", "--grid", "--aprime", "--bprime", "--cprime", "--f")


def _attach_values(argv: Sequence[str]) -> list[str]:
    """Glue ``--grid -2..2`` into ``--grid=-2..2`` so argparse accepts leading minus signs."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_values(sys.argv[1:] if argv is None else argv))
    try:
        rep = run(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except LieConfError as exc:
        print(f"lieconf {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = rep.to_json() if args.format == "json" else rep.to_text()
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
