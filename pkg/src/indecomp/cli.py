"""Command-line front end with bit-stable JSON output.

Exit codes: 0 success, 2 invalid input, 3 timeout/partial, 4 internal
invariant violation.  All rationals are serialized as "num/den" strings and
field elements in the literal syntax; no floating point is persisted inside
result payloads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .classify import (
    ClassifyOptions,
    are_equivalent,
    census,
    classify,
    det_bound_full,
    family_m2p1,
    fixed_det_demo,
)
from .errors import IndecompError, InternalInvariantError
from .field import format_fraction, format_qnum, make_context, parse_fraction, parse_qnum
from .forms import (
    CLASSICAL,
    NONCLASSICAL,
    find_decomposition,
    form_from_literal,
)
from .indec import continued_fraction, indecomposables
from .lattice import min_norm
from .universal import (
    g_invariant,
    lower_bound_43,
    lower_bound_44,
    lower_bound_u_half,
    r_set_count,
    u_set,
    upper_bound_41,
    upper_bound_42,
    upper_bound_refined,
)


def _manifest(args: argparse.Namespace, ctx, started: float, partial: bool) -> dict:
    return {
        "command": args.command,
        "argv": sys.argv[1:],
        "engine_version": __version__,
        "constants": {
            "C": format_fraction(ctx.dominance_C),
            "gamma2": ctx.hermite2_display,
            "gamma2_source": "table" if ctx.hermite2_exact else "Delta/2 bound",
        }
        if ctx is not None
        else {},
        "wall_time_s": round(time.monotonic() - started, 3),
        "partial": partial,
        "seed": None,
    }


def _emit(payload: dict, args: argparse.Namespace) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    dest = getattr(args, "json", None)
    if dest and dest != "-":
        with open(dest, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _mode(args) -> str:
    return CLASSICAL if args.mode == "classical" else NONCLASSICAL


def _resume_path(args, ctx, mode: str) -> str | None:
    if getattr(args, "resume", None):
        return args.resume
    cache_dir = os.environ.get("INDECOMP_CACHE_DIR")
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        tag = hashlib.sha256(
            f"{ctx.D}|{mode}|{getattr(args, 'det_bound', None)}".encode()
        ).hexdigest()[:16]
        return os.path.join(cache_dir, f"classify-{ctx.D}-{mode}-{tag}.json")
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_context(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    cf = continued_fraction(ctx)
    payload = {
        "d": ctx.D,
        "omega": format_qnum(ctx.omega),
        "discriminant": ctx.discriminant,
        "fund_unit": format_qnum(ctx.fund_unit),
        "fund_unit_norm": ctx.fund_unit_norm,
        "eps_plus": format_qnum(ctx.eps_plus),
        "dominance_C": format_fraction(ctx.dominance_C),
        "dominance_eta": format_qnum(ctx.dominance_eta) if ctx.dominance_eta else None,
        "hermite2": ctx.hermite2_display,
        "hermite2_exact": ctx.hermite2_exact,
        "det_bound": float(det_bound_full(ctx)),
        "cf_head": cf.head,
        "cf_period": cf.period,
        "cf_target": cf.target,
    }
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


def cmd_indecomposables(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    ind = indecomposables(ctx)
    payload = {
        "d": ctx.D,
        "modulus": ind.modulus,
        "count": len(ind),
        "representatives": [
            {
                "element": format_qnum(e.rep),
                "norm": format_fraction(e.rep.norm()),
                "tag": e.tag,
            }
            for e in ind.representatives
        ],
    }
    payload["manifest"] = _manifest(args, ctx, started, False)
    if args.json is not None or True:
        _emit(payload, args)
    return 0


def cmd_classify(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    mode = _mode(args)
    options = ClassifyOptions(
        det_bound=parse_fraction(args.det_bound) if args.det_bound else None,
        timeout=args.timeout,
        jobs=args.jobs,
        resume_path=_resume_path(args, ctx, mode),
    )
    report = classify(ctx, mode, options)
    payload = report.to_json()
    payload["manifest"] = _manifest(args, ctx, started, report.partial)
    if args.table:
        _print_table(report)
    _emit(payload, args)
    return 3 if report.partial else 0


def _print_table(report) -> None:
    print(f"D={report.D} mode={report.mode} classes={len(report.classes)}")
    by_det: dict[str, list] = {}
    for e in report.classes:
        by_det.setdefault(format_qnum(e.form.det()), []).append(e)
    for det, entries in by_det.items():
        print(f"  determinant {det}:")
        for e in entries:
            f = e.form
            print(
                f"    ({format_qnum(f.alpha)})x^2 + ({format_qnum(f.c)})xy"
                f" + ({format_qnum(f.eta)})y^2"
            )


def cmd_census(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    mode = _mode(args)
    options = ClassifyOptions(
        det_bound=parse_fraction(args.det_bound) if args.det_bound else None,
        timeout=args.timeout,
        jobs=args.jobs,
    )
    report = census(ctx, mode, options)
    payload = report.to_json()
    payload["manifest"] = _manifest(args, ctx, started, report.partial)
    _emit(payload, args)
    return 3 if report.partial else 0


def cmd_check_form(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    mode = _mode(args)
    Q = form_from_literal(ctx, args.form)
    wit = find_decomposition(Q, mode)
    payload = {
        "d": ctx.D,
        "mode": mode,
        "form": Q.literal(),
        "det": format_qnum(Q.det()),
        "indecomposable": wit is None,
    }
    if args.witness and wit is not None:
        payload["witness"] = {
            "kind": wit.kind,
            "part1": wit.parts[0].literal(),
            "part2": wit.parts[1].literal(),
        }
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


def cmd_equivalent(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    Q = form_from_literal(ctx, args.form)
    H = form_from_literal(ctx, args.form2)
    U = are_equivalent(Q, H)
    payload = {
        "d": ctx.D,
        "form1": Q.literal(),
        "form2": H.literal(),
        "equivalent": U is not None,
    }
    if U is not None:
        payload["witness_rows"] = [
            [format_qnum(U[0][0]), format_qnum(U[0][1])],
            [format_qnum(U[1][0]), format_qnum(U[1][1])],
        ]
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


def cmd_enum_min(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    Q = form_from_literal(ctx, args.form)
    n, v = min_norm(Q)
    payload = {
        "d": ctx.D,
        "form": Q.literal(),
        "min_norm": format_fraction(n),
        "witness": [format_qnum(v[0]), format_qnum(v[1])],
    }
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


def cmd_universal_bounds(args) -> int:
    started = time.monotonic()
    ctx = make_context(args.d)
    mode = _mode(args)
    partial = False
    reports = {}
    options = ClassifyOptions(
        det_bound=parse_fraction(args.det_bound) if args.det_bound else None,
        timeout=args.timeout,
        jobs=args.jobs,
    )
    cls = classify(ctx, mode, options)
    cen = census(ctx, mode, options)
    partial = cls.partial or cen.partial
    if not cls.partial:
        reports["upper_42"] = upper_bound_42(ctx, cls, n=args.n, g=args.g).to_json()
    refined = upper_bound_refined(ctx, cen, n=args.n, g=args.g)
    reports["upper_refined"] = refined.to_json()
    reports["upper_41"] = upper_bound_41(
        ctx,
        args.n,
        census_count_gamma=len(cen.classes) if not cen.partial else None,
        g=args.g,
    ).to_json() if not cen.partial else {"skipped": "census partial"}
    reports["lower_u_half"] = lower_bound_u_half(ctx).to_json()
    if args.delta:
        deltas = [parse_qnum(ctx, d) for d in args.delta]
        if len(deltas) == 1:
            deltas = deltas * 2
        count = r_set_count(ctx, deltas[0], deltas[1], mode)
        reports["r_set_count"] = count
        reports["u_set_sizes"] = [len(u_set(ctx, d)) for d in deltas]
        reports["lower_43"] = lower_bound_43(count, args.n, 2).to_json()
        if count >= 240:
            reports["lower_44"] = lower_bound_44(count, args.n, 2).to_json()
    payload = {
        "d": ctx.D,
        "mode": mode,
        "n": args.n,
        "g": (args.g, "user") if args.g else g_invariant(ctx.D),
        "bounds": reports,
    }
    payload["manifest"] = _manifest(args, ctx, started, partial)
    _emit(payload, args)
    return 3 if partial else 0


def cmd_family(args) -> int:
    started = time.monotonic()
    ctx, forms = family_m2p1(args.m)
    payload = {
        "d": ctx.D,
        "m": args.m,
        "count": len(forms),
        "lower_bound": args.m * (args.m + 1) // 2,
        "forms": [f.literal() for f in forms],
    }
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


def cmd_fixed_det_demo(args) -> int:
    started = time.monotonic()
    ctx, d, forms, jacobi = fixed_det_demo(args.n, max_s=args.max_s)
    payload = {
        "d": ctx.D,
        "determinant": d,
        "count": len(forms),
        "jacobi_pair_count": jacobi,
        "forms": [f.literal() for f in forms],
    }
    payload["manifest"] = _manifest(args, ctx, started, False)
    _emit(payload, args)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="indecomp",
        description="Classify additively indecomposable binary quadratic forms "
        "over real quadratic fields and compute universality rank bounds.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, mode=True, bounds=True):
        p.add_argument("--d", type=int, required=True, help="square-free D > 1")
        p.add_argument("--json", default=None, help="write JSON here ('-' = stdout)")
        if mode:
            p.add_argument(
                "--mode", choices=["classical", "nonclassical"], default="classical"
            )
        if bounds:
            p.add_argument("--det-bound", default=None, help="determinant norm cap (rational)")
            p.add_argument("--timeout", type=float, default=None, help="budget in seconds")
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("context", help="field constants and continued fraction")
    add_common(p, mode=False, bounds=False)
    p.set_defaults(func=cmd_context)

    p = sub.add_parser("indecomposables", help="indecomposable integers mod unit squares")
    add_common(p, mode=False, bounds=False)
    p.set_defaults(func=cmd_indecomposables)

    p = sub.add_parser("classify", help="classify indecomposable binary forms")
    add_common(p)
    p.add_argument("--resume", default=None, help="resumable state file")
    p.add_argument("--table", action="store_true", help="print determinant-grouped table")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("census", help="classes with no rank-1 split below the bound")
    add_common(p)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("check-form", help="decide additive indecomposability")
    add_common(p, bounds=False)
    p.add_argument("--form", required=True, help="'<alpha>|<c>|<eta>' literals")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_check_form)

    p = sub.add_parser("equivalent", help="decide equivalence of two forms")
    add_common(p, mode=False, bounds=False)
    p.add_argument("--form", required=True)
    p.add_argument("--form2", required=True)
    p.set_defaults(func=cmd_equivalent)

    p = sub.add_parser("enum-min", help="exact minimum of a form (debug)")
    add_common(p, mode=False, bounds=False)
    p.add_argument("--form", required=True)
    p.set_defaults(func=cmd_enum_min)

    p = sub.add_parser("universal-bounds", help="rank bounds for n-universal forms")
    add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--delta", action="append", default=None, help="codifferent element literal")
    p.add_argument("--g", type=int, default=None, help="override the g-invariant")
    p.add_argument("--c-bi", default=None, help="user-supplied C_BI (rational)")
    p.set_defaults(func=cmd_universal_bounds)

    p = sub.add_parser("family", help="m^2+1 family of indecomposable forms")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("fixed-det-demo", help="many inequivalent forms, one determinant")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-s", type=int, default=2)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_fixed_det_demo)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InternalInvariantError as exc:
        json.dump({"error": exc.code, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 4
    except IndecompError as exc:
        json.dump({"error": exc.code, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ValueError, OSError) as exc:
        json.dump({"error": "invalid-input", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
