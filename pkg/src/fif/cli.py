"""``fif`` command-line front end.

Exit status: 0 on success, 2 when the IFS or a hypothesis fails
validation, 3 on usage errors (bad arguments, unknown example, point
outside a domain, unreadable files).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, attractor, continuation, errors, examples, formats, render
from .ifs import GeneralAffineIFS2D, validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 2, 3

_USAGE_ERRORS = (
    errors.UnknownExample,
    errors.ParamOutOfRange,
    errors.AddressSyntaxError,
    errors.SymbolOutOfRange,
    errors.AddressTooShort,
    errors.ConfigError,
    errors.OutOfDomain,
    errors.OutOfDomainAtCap,
    errors.OutOfOracleDomain,
    errors.NoOracle,
    errors.WindowDegenerate,
    errors.IoError,
    errors.EnsembleTooLarge,
    errors.TooFewPoints,
    errors.TooFewScales,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


fmt = formats.fmt


def _num(v):
    """JSON number (shortest round-trip repr), or null when not finite."""
    v = float(v)
    return v if np.isfinite(v) else None


# -- helpers --------------------------------------------------------------------------

def _add_source(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--example", metavar="ID[:K=V,...]", help="registry example, e.g. tent-family:p=0.25")
    g.add_argument("--config", metavar="PATH", help="JSON IFS config")


def _load(args, allow_general=False):
    if args.config:
        return formats.load_config(args.config)
    if not args.example:
        raise UsageError("one of --example or --config is required")
    entry = examples.from_selector(args.example)
    if isinstance(entry.ifs, GeneralAffineIFS2D) and not allow_general:
        raise UsageError(f"{entry.id} is a general planar IFS; only 'attract' and 'render' accept it")
    return entry.ifs


def _entry_window(args):
    if args.example:
        return examples.from_selector(args.example).window
    return None


def _print(*values, out=None):
    print(" ".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in values),
          file=out or sys.stdout)


def _emit_cloud(cloud, out):
    if out:
        formats.export_csv(cloud, out)
    else:
        print("x,y,branch")
        for (x, y), t in zip(cloud.points, cloud.tags):
            print(f"{fmt(x)},{fmt(y)},{int(t)}")


def _window(text, size, fallback):
    if text:
        return render.Window.parse(text, size)
    if fallback is None:
        raise UsageError("--window is required for this IFS")
    try:
        w, h = (int(v) for v in size.lower().split("x"))
    except ValueError:
        raise UsageError(f"--size must look like 800x600, got {size!r}") from None
    return render.Window(*fallback, w, h)


# -- subcommands ----------------------------------------------------------------------

def cmd_validate(args):
    ifs = _load(args, allow_general=True)
    if isinstance(ifs, GeneralAffineIFS2D):
        ok, weight, norm = ifs.certify()
        print(json.dumps({"contractive": bool(ok), "weight": weight, "norm": _num(norm)}))
        return EXIT_OK if ok else EXIT_INVALID
    r = validate(ifs, require_invertible=not args.allow_noninvertible)
    print(json.dumps({
        "conditions": {k: r.conditions_abc[k] for k in "abc"},
        "M_bound": _num(r.M_bound),
        "s_bound": _num(r.s_bound),
        "metric_e": _num(r.metric_e),
        "metric_contraction": _num(r.metric_contraction),
        "invertible_in_y": list(r.invertible_in_y),
        "warnings": r.warnings,
        "valid": r.valid,
    }, indent=2))
    return EXIT_OK if r.valid else EXIT_INVALID


def cmd_attract(args):
    ifs = _load(args, allow_general=True)
    if isinstance(ifs, GeneralAffineIFS2D):
        if args.method != "chaos":
            raise UsageError("general planar IFSs support only --method chaos")
        _emit_cloud(attractor.attractor_general(ifs, args.count, args.seed, args.burn_in), args.out)
        return EXIT_OK
    if args.method == "chaos":
        _emit_cloud(attractor.chaos_game(ifs, args.count, args.seed, args.burn_in), args.out)
        return EXIT_OK
    f = attractor.chord_polyline(ifs)
    for _ in range(args.depth):
        f = attractor.w_operator(ifs, f)
    if args.out:
        formats.export_csv(f, args.out)
    else:
        print("x,y")
        for x, y in zip(f.xs, f.ys):
            print(f"{fmt(x)},{fmt(y)}")
    print(f"sup_error_bound {fmt(f.sup_error_bound)}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args):
    ifs = _load(args)
    y, err = attractor.evaluate_many(ifs, args.x, args.depth)
    for yi, ei in zip(y, err):
        if args.verbose:
            _print(float(yi), float(ei))
        else:
            _print(float(yi))
    return EXIT_OK


def cmd_continue(args):
    ifs = _load(args)
    theta = continuation.parse_address(args.address, ifs.N)
    if args.cloud:
        if args.k is None:
            raise UsageError("--cloud needs --k")
        cloud = continuation.continuation_cloud(ifs, theta, args.k, args.count, args.seed, args.burn_in)
        _emit_cloud(cloud, args.out)
        return EXIT_OK
    if not args.x:
        raise UsageError("give --x values or --cloud --k")
    for x in args.x:
        r = continuation.continue_eval(ifs, theta, x, args.depth_cap)
        if args.verbose:
            _print(r.value, r.error_bound, r.depth_used)
        else:
            _print(r.value)
    return EXIT_OK


def cmd_ensemble(args):
    ifs = _load(args)
    members = continuation.ensemble(ifs, args.k)
    clouds = continuation.ensemble_clouds(members, args.count, args.seed)
    manifest = formats.export_ensemble(members, clouds, args.out)
    if args.image:
        win = _window(args.window, args.size, _entry_window(args))
        base = attractor.chaos_game(ifs, args.count, args.seed)
        Path(args.image).write_bytes(render.rasterize(render.ensemble_layers(base, clouds), win))
    print(manifest)
    return EXIT_OK


def cmd_render(args):
    ifs = _load(args, allow_general=True)
    if isinstance(ifs, GeneralAffineIFS2D):
        base = attractor.attractor_general(ifs, args.count, args.seed)
        clouds = []
    else:
        base = attractor.chaos_game(ifs, args.count, args.seed)
        clouds = []
        if args.k:
            members = continuation.ensemble(ifs, args.k)
            clouds = continuation.ensemble_clouds(members, args.count, args.seed)
    fallback = _entry_window(args)
    if fallback is None:
        pts = base.points
        pad = 0.05 * (np.ptp(pts, axis=0) + 1e-9)
        lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
        fallback = (lo[0], hi[0], lo[1], hi[1])
    win = _window(args.window, args.size, fallback)
    try:
        Path(args.out).write_bytes(render.rasterize(render.ensemble_layers(base, clouds), win))
    except OSError as exc:
        raise errors.IoError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def cmd_analyze(args):
    what = args.what
    if what == "dimension" and args.method == "eq":
        if None in (args.a, args.d1, args.d2):
            raise UsageError("--method eq needs --a, --d1 and --d2")
        r = analysis.dimension_solve(args.a, args.d1, args.d2)
        _print(r.value)
        return EXIT_OK
    ifs = _load(args)
    if what == "lipschitz":
        _print(analysis.lipschitz_bound(ifs).lam)
    elif what == "derivative":
        if args.x is None:
            raise UsageError("derivative needs --x")
        _print(analysis.derivative_series(ifs, args.x))
    elif what == "double-points":
        for x in analysis.double_points(ifs, args.depth).xs:
            _print(x)
    elif what == "dimension":
        cloud = attractor.chaos_game(ifs, args.count, args.seed)
        r = analysis.box_dimension(cloud, range(args.jmin, args.jmax + 1))
        _print(r.value, r.fit)
    elif what == "report":
        print(json.dumps(analysis_report(ifs, args), indent=2))
    return EXIT_OK


def analysis_report(ifs, args):
    """JSON-ready summary; entries that do not apply are null."""
    out = {"lambda": None, "dimension": None, "double_points": [], "uniqueness": None}
    try:
        out["lambda"] = analysis.lipschitz_bound(ifs).lam
    except errors.HypothesisViolated:
        pass
    try:
        r = analysis.box_dimension(attractor.chaos_game(ifs, args.count, args.seed),
                                   range(args.jmin, args.jmax + 1))
        out["dimension"] = {"value": r.value, "r2": r.fit}
    except (errors.TooFewPoints, errors.TooFewScales):
        pass
    out["double_points"] = list(analysis.double_points(ifs, args.depth).xs)
    if ifs.is_affine:
        probe = analysis.uniqueness_probe(ifs, analysis.compose_ifs(ifs, 2), count=args.count,
                                          seed=args.seed, window=(-20, 20))
        out["uniqueness"] = {"max_gap_theta1": probe.max_gap_theta1,
                             "max_gap_thetaN": probe.max_gap_thetaN}
    return out


def cmd_list(args):
    for id, params, text in examples.list_examples():
        p = ",".join(f"{k}={v:g}" for k, v in params.items())
        print(f"{id}\t{p or '-'}\t{text}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="fif", description="Fractal interpolation functions and their continuations.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("validate", help="check interpolation conditions and contractivity")
    _add_source(s)
    s.add_argument("--allow-noninvertible", action="store_true",
                   help="do not fail on branches that are not invertible in y")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("attract", help="sample the attractor")
    _add_source(s)
    s.add_argument("--method", choices=["chaos", "wop"], default="chaos")
    s.add_argument("--count", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int, default=attractor.DEFAULT_BURN_IN)
    s.add_argument("--depth", type=int, default=10, help="W-operator iterations for --method wop")
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.set_defaults(func=cmd_attract)

    s = sub.add_parser("eval", help="evaluate the fractal function")
    _add_source(s)
    s.add_argument("--x", type=float, action="append", required=True)
    s.add_argument("--depth", type=int, default=40)
    s.add_argument("--verbose", "-v", action="store_true", help="also print the error bound")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("continue", help="evaluate or sample a fractal continuation")
    _add_source(s)
    s.add_argument("--address", required=True, help='address such as "221(1)" or "(2)"')
    s.add_argument("--x", type=float, action="append")
    s.add_argument("--depth-cap", type=int, default=64)
    s.add_argument("--cloud", action="store_true")
    s.add_argument("--k", type=int)
    s.add_argument("--count", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int, default=attractor.DEFAULT_BURN_IN)
    s.add_argument("--out")
    s.add_argument("--verbose", "-v", action="store_true", help="also print error bound and depth")
    s.set_defaults(func=cmd_continue)

    s = sub.add_parser("ensemble", help="export all depth-k continuations")
    _add_source(s)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--count", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--window", help="xlo,xhi,ylo,yhi for --image")
    s.add_argument("--size", default="800x800")
    s.add_argument("--image", help="also write a PPM picture here")
    s.set_defaults(func=cmd_ensemble)

    s = sub.add_parser("analyze", help="regularity and dimension")
    s.add_argument("what", choices=["lipschitz", "derivative", "double-points", "dimension", "report"])
    _add_source(s)
    s.add_argument("--x", type=float)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--method", choices=["eq", "box"], default="box")
    s.add_argument("--a", type=float)
    s.add_argument("--d1", type=float)
    s.add_argument("--d2", type=float)
    s.add_argument("--count", type=int, default=10 ** 6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jmin", type=int, default=4)
    s.add_argument("--jmax", type=int, default=10)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("render", help="write a PPM picture of the attractor and continuations")
    _add_source(s)
    s.add_argument("--out", required=True)
    s.add_argument("--window", help="xlo,xhi,ylo,yhi")
    s.add_argument("--size", default="800x800", help="WxH")
    s.add_argument("--k", type=int, default=0, help="also draw all depth-k continuations")
    s.add_argument("--count", type=int, default=20000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("list-examples", help="list registry examples")
    s.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("fif: a subcommand is required (try --help)")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except _USAGE_ERRORS as exc:
        print(f"fif: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.FIFError as exc:
        print(f"fif: validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"fif: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
