"""Command-line front end: classgroup, detect, lift, verify, scan-xg5."""

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .arith import parse_rational
from .config import ConfigError, load_config, threads
from .curves import cm_mod_check, curve_from_j, xg5_curve, xg5_point
from .galrep import detect_cm_type
from .pipeline import StageError, run_pipeline
from .quadfield import QuadField, class_group
from .verify import FixtureError, ingest, verify_congruence

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INPUT, EXIT_STAGE = 0, 1, 2, 3, 4

log = logging.getLogger("heckelift")


def _rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bound(text):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bound must be an integer or 'auto', got {text!r}") from None


def field_from_disc(D):
    """The field of discriminant D (D = delta or 4 delta); a squarefree delta is also accepted."""
    delta = D // 4 if D % 4 == 0 else D
    K = QuadField(delta)
    if K.disc != D and K.delta != D:
        raise ValueError(f"{D} is not a fundamental discriminant")
    return K


def cmd_classgroup(args):
    K = field_from_disc(args.disc)
    cg = class_group(K)
    shape = "cyclic" if cg.is_cyclic() else "x".join(f"C{d}" for d in cg.structure)
    print(f"h={cg.h}" + (f", {shape}" if cg.h > 1 else ""))
    for P, e in cg.generators:
        print(f"  generator {P} (norm {P.norm}) of order {e}")
    return EXIT_OK


def cmd_detect(args):
    f = ingest(args.coeffs)
    hits = detect_cm_type(f, args.ell, args.max_disc, args.pbound)
    out = [{"disc": d, "factor": list(fac.factor), "residue_degree": fac.degree} for d, fac in hits]
    if args.json:
        print(json.dumps(out, indent=1))
    else:
        print(f"{f.label}: CM type mod {args.ell} at p <= {args.pbound}")
        for row in out:
            print(f"  disc {row['disc']:>6}  prime factor {row['factor']} (degree {row['residue_degree']})")
        if not out:
            print("  none")
    return EXIT_OK if out else EXIT_FAIL


def cmd_lift(args):
    cfg = load_config(args.config)
    if args.bound is not None:
        cfg.bound = args.bound
    if args.output:
        cfg.output = args.output
    res = run_pipeline(cfg)
    if args.json:
        print(json.dumps(res.to_json(), indent=1))
    else:
        for flag in res.flags + (res.psi.flags if res.psi else []):
            print(f"note: {flag}")
        if res.chosen:
            print(f"r: {res.chosen.describe()}")
        print(f"psi modulus {res.psi.modulus} ({res.psi.mode}); g level {res.level}")
        if args.table and res.psi.is_exact():
            from .cmform import format_psi_table, make_cm_form, psi_table
            f = ingest(cfg.f["fixture"]) if cfg.f and "fixture" in cfg.f else None
            print(format_psi_table(psi_table(make_cm_form(res.psi), f, res.report.bound if res.report else 67)))
        if res.report:
            print(res.report.table())
        else:
            print(f"verdict: {'pass' if res.verdict else 'fail'}")
    return EXIT_OK if res.verdict else EXIT_FAIL


def cmd_verify(args):
    f, g = ingest(args.f), ingest(args.g)
    rep = verify_congruence(f, g, args.ell, args.bound)
    print(json.dumps(rep.to_json(), indent=1) if args.json else rep.table())
    return EXIT_OK if rep.verdict else EXIT_FAIL


def _scan_one(t, pmax, fixed_model):
    pt = xg5_point(t)
    E = curve_from_j(pt.j) if fixed_model else xg5_curve(t)
    bad = {d: cm_mod_check(E, d, 5, pmax) for d in (pt.K1_disc, pt.K2_disc)}
    return {"t": str(t), "j": str(pt.j), "curve": repr(E), "K1": pt.K1_disc, "K2": pt.K2_disc,
            "bad_primes": {str(d): v for d, v in bad.items()},
            "certified": not any(bad.values())}


def _sweep(height):
    seen = set()
    for b in range(1, height + 1):
        for a in range(-height, height + 1):
            t = Fraction(a, b)
            if t in seen:
                continue
            seen.add(t)
            try:
                xg5_point(t)
            except ZeroDivisionError:
                continue
            yield t


def cmd_scan_xg5(args):
    ts = [args.t] if args.t is not None else list(_sweep(args.sweep))
    n = threads()
    if n > 1 and len(ts) > 1:
        with ProcessPoolExecutor(n) as pool:
            rows = list(pool.map(_scan_one, ts, [args.pmax] * len(ts), [args.fixed_model] * len(ts)))
    else:
        rows = [_scan_one(t, args.pmax, args.fixed_model) for t in ts]
    if args.json:
        print(json.dumps(rows, indent=1))
    else:
        print(f"{'t':>8} {'K1':>7} {'K2':>7}  certified  curve")
        for r in rows:
            print(f"{r['t']:>8} {r['K1']:>7} {r['K2']:>7}  {str(r['certified']):9}  {r['curve']}")
            for d, v in r["bad_primes"].items():
                if v:
                    print(f"{'':>8} disc {d}: a_p != 0 mod 5 at {v[:10]}")
    return EXIT_OK if all(r["certified"] for r in rows) else EXIT_FAIL


def build_parser():
    ap = argparse.ArgumentParser(prog="heckelift", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classgroup", help="class group of an imaginary quadratic field")
    p.add_argument("--disc", type=int, required=True)
    p.set_defaults(func=cmd_classgroup)

    p = sub.add_parser("detect", help="CM type mod l of a coefficient fixture")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--max-disc", type=int, default=1200)
    p.add_argument("--pbound", type=int, default=100)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("lift", aliases=["lift-and-synthesize"],
                       help="derive r, lift to psi, synthesize g, verify against f")
    p.add_argument("--config", required=True)
    p.add_argument("--bound", type=_bound)
    p.add_argument("--output")
    p.add_argument("--table", action="store_true", help="print p, a_p, generator, psi(p), b_p")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("verify", help="compare two coefficient fixtures mod l")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--bound", type=_bound, default="auto")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan-xg5", help="CM type mod 5 of curves on X_G(5)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=_rational)
    g.add_argument("--sweep", type=int, metavar="HEIGHT")
    p.add_argument("--pmax", type=int, default=300)
    p.add_argument("--fixed-model", action="store_true",
                   help="use curve_from_j(j(t)) even at j = 0")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_scan_xg5)
    return ap


def _join_negative_values(argv):
    # let "--t -4/5" through: argparse would read -4/5 as an option
    out = []
    for tok in argv:
        if out and out[-1] in ("--t", "--disc") and tok.startswith("-"):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    level = max(logging.DEBUG, logging.WARNING - 10 * args.verbose)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FixtureError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
