"""Command-line front end.

Exit status: 0 success / no violation, 2 a bound was violated, 1 usage or data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import __version__
from .bounds import check_icpf1, check_icpf2, check_icpr, check_icpr2, chi
from .boxes import (Box, check_no_signalling, dumps_box, has_uniform_marginals, loads_box,
                    make_anti_pr, make_functional, make_functional_shift, make_isotropic, make_noise,
                    make_pr, make_pr_shift, mix, mu_profile, nu_profile_avg, nu_profile_min)
from .engine import DEFAULT_CEILING, BranchLimitError, induced_box, sample_execute, sample_many
from .mc import rac_mc
from .protocols import (NotReducibleError, RacConfig, depolarize, rac_inputs, rac_protocol,
                        rac_success_exact, reduce_functional_to_pr)
from .zp import delta, format_poly, parse_poly

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _read_box(path: str) -> Box:
    try:
        with open(path) as fh:
            return loads_box(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _frac_str(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _emit(text: str, out: str | None, manifest: dict) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
        with open(out + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
        print(json.dumps({"manifest": manifest}, sort_keys=True), file=sys.stderr)


def _jsonable(v):
    if isinstance(v, Fraction):
        return _frac_str(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def _manifest(args, started: float, **extra) -> dict:
    params = {k: _jsonable(v) for k, v in vars(args).items() if k != "func"}
    return {
        "command": args.command if not getattr(args, "box_command", None)
        else f"box {args.box_command}",
        "args": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time_ms": round((time.perf_counter() - started) * 1000, 3),
        **extra,
    }


# --- box ---------------------------------------------------------------------

def cmd_box_make(args, started):
    kind, p = args.kind, args.p
    if kind in ("functional", "functional-shift") and not args.f:
        raise UsageError(f"--kind {kind} needs --f")
    if kind == "pr":
        box = make_pr(p)
    elif kind == "pr-shift":
        box = make_pr_shift(p, args.j)
    elif kind == "functional":
        box = make_functional(parse_poly(args.f, p))
    elif kind == "functional-shift":
        box = make_functional_shift(parse_poly(args.f, p), args.j)
    elif kind == "noise":
        box = make_noise(p)
    elif kind == "anti-pr":
        box = make_anti_pr()
    elif kind == "isotropic":
        if args.lam is None:
            raise UsageError("--kind isotropic needs --lam")
        box = make_isotropic(args.lam)
    else:  # mix
        if not args.component or len(args.component) != len(args.weight or []):
            raise UsageError("--kind mix needs matching --component and --weight lists")
        box = mix([_read_box(c) for c in args.component], args.weight)
    _emit(dumps_box(box) + "\n", args.out, _manifest(args, started))
    return EXIT_OK


def cmd_box_check(args, started):
    box = _read_box(args.file)
    report = {"p": box.p, "normalized": True, "no_signalling": check_no_signalling(box),
              "uniform_marginals": has_uniform_marginals(box)}
    print(json.dumps(report))
    return EXIT_OK


def cmd_box_depolarize(args, started):
    box = _read_box(args.file)
    out = induced_box(depolarize(box))
    _emit(dumps_box(out) + "\n", args.out, _manifest(args, started))
    return EXIT_OK


def cmd_box_profile(args, started):
    box = _read_box(args.file)
    report = {"p": box.p, "method": "exact", "mu": [_frac_str(v) for v in mu_profile(box)]}
    if args.f:
        f = parse_poly(args.f, box.p)
        report["f"] = format_poly(f)
        report["delta"] = delta(f)
        if delta(f) == 2:
            report["nu_avg"] = [_frac_str(v) for v in nu_profile_avg(box, f)]
        report["nu_min"] = [_frac_str(v) for v in nu_profile_min(box, f)]
    print(json.dumps(report))
    return EXIT_OK


# --- reduce ------------------------------------------------------------------

def cmd_reduce(args, started):
    f = parse_poly(args.f, args.p)
    try:
        plan, proto = reduce_functional_to_pr(f)
    except NotReducibleError:
        raise UsageError(f"f = {format_poly(f)} is additively separable: P^f has a local "
                         "shared-randomness model and cannot be turned into PR_p") from None
    report = {
        "p": args.p, "f": format_poly(f), "delta": plan.delta, "axes": plan.axes,
        "chain": [format_poly(g) for g in plan.chain], "copies": plan.copies,
        "lambda_inv": plan.lam_inv, "g": plan.g, "h": plan.h,
    }
    if args.verify == "exact":
        report["method"] = "exact"
        report["verified"] = induced_box(proto) == make_pr(args.p)
    else:
        p = args.p
        rows = sample_many(proto, lambda rng: (int(rng.integers(p)), int(rng.integers(p))),
                           args.samples, seed=args.seed)
        bad = sum(1 for x, y, a, b in rows if (a - b - x * y) % p)
        report.update(method="mc", samples=args.samples, seed=args.seed, failures=bad, verified=bad == 0)
    _emit(json.dumps(report) + "\n", args.out, _manifest(args, started))
    return EXIT_OK if report["verified"] else EXIT_ERROR


# --- rac ---------------------------------------------------------------------

def cmd_rac(args, started):
    box = _read_box(args.box)
    if box.p != args.p:
        raise UsageError(f"box has p={box.p} but --p {args.p}")
    try:
        cfg = RacConfig(args.p, args.N, args.c, box, args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    proto = rac_protocol(cfg)
    probe = sample_execute(proto, (0,) * cfg.N, 0, args.seed)
    report = {"mode": cfg.mode, "p": cfg.p, "N": cfg.N, "c": cfg.c, "method": args.method,
              "alice_copies": probe.alice_copies, "bob_copies": probe.bob_copies,
              "total_copies": proto.total_copies}
    if args.method == "exact":
        work = (cfg.p ** cfg.N) * cfg.N * proto.branch_estimate()
        if work > args.ceiling:
            raise UsageError(f"exact evaluation needs ~{work} branches (ceiling {args.ceiling}); "
                             "use --method mc or analytic")
        value = rac_success_exact(proto, cfg.p, cfg.N)
        report.update(success=_frac_str(value), success_float=f"{float(value):.12g}",
                      inputs=sum(1 for _ in rac_inputs(cfg.p, cfg.N)))
    elif args.method == "mc":
        est = rac_mc(cfg, args.samples, seed=args.seed, workers=args.workers, backend=args.backend)
        report.update(success=f"{est.estimate:.12g}", stderr=f"{est.stderr:.12g}",
                      samples=est.samples, successes=est.successes, seed=est.seed, backend=est.backend)
    else:
        value = chi(mu_profile(box), cfg.bob_boxes, cfg.c, "convolution")
        report.update(success=_frac_str(value), success_float=f"{float(value):.12g}",
                      shifts=cfg.bob_boxes)
    _emit(json.dumps(report) + "\n", args.out, _manifest(args, started))
    return EXIT_OK


# --- bounds / sweep ----------------------------------------------------------

def _reports(theorem: str, box: Box, f, N=None, ns=()) -> list:
    """Reports for every c; ``ns`` lists the recursive-regime depths to cover."""
    p = box.p
    if theorem == "icpr":
        if N is None:
            raise UsageError("icpr needs --N")
        return [check_icpr(box, N, c) for c in range(p)]
    if theorem == "icpr2":
        if not ns:
            raise UsageError("icpr2 needs --n")
        return [check_icpr2(box, k, c) for k in ns for c in range(p)]
    if f is None:
        raise UsageError(f"{theorem} needs --f")
    checker = check_icpf1 if theorem == "icpf1" else check_icpf2
    if N is not None:
        return checker(box, f, N=N)
    if not ns:
        raise UsageError(f"{theorem} needs --N or --n")
    return [r for k in ns for r in checker(box, f, n=k)]


def cmd_bounds(args, started):
    box = _read_box(args.box)
    f = parse_poly(args.f, box.p) if args.f else None
    reports = _reports(args.theorem, box, f, args.N, [args.n] if args.n else ())
    payload = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    _emit(payload, args.out, _manifest(args, started))
    return EXIT_VIOLATION if any(r.violated for r in reports) else EXIT_OK


def _grid(text: str) -> list[Decimal]:
    try:
        start, stop, step = (Decimal(s) for s in text.split(":"))
    except (ValueError, InvalidOperation):
        raise UsageError(f"--param-range must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--param-range is empty")
    count = int((stop - start) / step) + 1
    return [start + k * step for k in range(count)]


def _family_box(args, t: Fraction) -> Box:
    if args.family == "isotropic":
        return make_isotropic(t)
    f = parse_poly(args.f, args.p)
    return mix([make_functional(f), make_noise(args.p)], [t, 1 - t])


def cmd_sweep(args, started):
    if args.family == "mix-pf-noise" and not args.f:
        raise UsageError("--family mix-pf-noise needs --f and --p")
    if args.family == "isotropic":
        args.p = 2
    grid = _grid(args.param_range)
    theorem = args.theorem or ("icpr2" if args.family == "isotropic" else "icpf1")
    f = parse_poly(args.f, args.p) if args.f else None
    recursive = theorem in ("icpr2",) or (theorem in ("icpf1", "icpf2") and args.N is None)

    def reports_at(t) -> list:
        box = _family_box(args, Fraction(t))
        return _reports(theorem, box, f, args.N, range(1, args.n_max + 1) if recursive else ())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["parameter", "n" if recursive else "N", "c", "lhs", "rhs", "violated"])
    flags = []
    for t in grid:
        reps = reports_at(t)
        flags.append(any(r.violated for r in reps))
        for r in reps:
            size = r.params["n"] if recursive else r.params["N"]
            writer.writerow([str(t), size, r.params["c"], f"{r.lhs:.12g}", f"{r.rhs:.12g}",
                             "true" if r.violated else "false"])

    threshold = None
    if any(flags):
        first = flags.index(True)
        hi = float(grid[first])
        if first > 0 and not flags[first - 1]:
            lo = float(grid[first - 1])
            while hi - lo > 1e-4:
                mid = (lo + hi) / 2
                if any(r.violated for r in reports_at(Fraction(mid))):
                    hi = mid
                else:
                    lo = mid
        threshold = hi
    summary = f"threshold,{'none' if threshold is None else f'{threshold:.6f}'}"
    _emit(buf.getvalue(), args.out, _manifest(args, started, threshold=threshold, theorem=theorem))
    print(summary)
    return EXIT_VIOLATION if any(flags) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    box = sub.add_parser("box", help="make, check, depolarize or profile boxes")
    bsub = box.add_subparsers(dest="box_command", required=True, parser_class=_Parser)
    mk = bsub.add_parser("make")
    mk.add_argument("--kind", required=True,
                    choices=["pr", "pr-shift", "functional", "functional-shift", "noise", "anti-pr",
                             "isotropic", "mix"])
    mk.add_argument("--p", type=int, default=2)
    mk.add_argument("--j", type=int, default=0)
    mk.add_argument("--f")
    mk.add_argument("--lam", type=_fraction)
    mk.add_argument("--component", action="append", help="box JSON file (repeat for mix)")
    mk.add_argument("--weight", action="append", type=_fraction, help="rational weight (repeat for mix)")
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_box_make)
    ck = bsub.add_parser("check")
    ck.add_argument("file")
    ck.set_defaults(func=cmd_box_check)
    dp = bsub.add_parser("depolarize")
    dp.add_argument("file")
    dp.add_argument("--out")
    dp.set_defaults(func=cmd_box_depolarize)
    pf = bsub.add_parser("profile")
    pf.add_argument("file")
    pf.add_argument("--f")
    pf.set_defaults(func=cmd_box_profile)

    red = sub.add_parser("reduce", help="reduce a functional box to PR_p")
    red.add_argument("--p", type=int, required=True)
    red.add_argument("--f", required=True)
    red.add_argument("--verify", choices=["exact", "sample"], default="exact")
    red.add_argument("--samples", type=int, default=1000)
    red.add_argument("--seed", type=int, default=0)
    red.add_argument("--out")
    red.set_defaults(func=cmd_reduce)

    rac = sub.add_parser("rac", help="random access code success probability")
    rac.add_argument("--mode", choices=["basic", "recursive"], default="basic")
    rac.add_argument("--p", type=int, required=True)
    rac.add_argument("--N", type=int, required=True)
    rac.add_argument("--c", type=int, default=0)
    rac.add_argument("--box", required=True)
    rac.add_argument("--method", choices=["exact", "mc", "analytic"], default="analytic")
    rac.add_argument("--samples", type=int, default=100_000)
    rac.add_argument("--seed", type=int, default=0)
    rac.add_argument("--workers", type=int, default=1)
    rac.add_argument("--backend", choices=["cython", "python"])
    rac.add_argument("--ceiling", type=int, default=DEFAULT_CEILING)
    rac.add_argument("--out")
    rac.set_defaults(func=cmd_rac)

    bd = sub.add_parser("bounds", help="evaluate an information-causality bound for every c")
    bd.add_argument("--theorem", required=True, choices=["icpr", "icpr2", "icpf1", "icpf2"])
    bd.add_argument("--box", required=True)
    bd.add_argument("--f")
    bd.add_argument("--N", type=int)
    bd.add_argument("--n", type=int)
    bd.add_argument("--out")
    bd.set_defaults(func=cmd_bounds)

    sw = sub.add_parser("sweep", help="CSV of bound values along a box family")
    sw.add_argument("--family", required=True, choices=["isotropic", "mix-pf-noise"])
    sw.add_argument("--param-range", required=True, help="start:stop:step")
    sw.add_argument("--theorem", choices=["icpr", "icpr2", "icpf1", "icpf2"])
    sw.add_argument("--p", type=int, default=2)
    sw.add_argument("--f")
    sw.add_argument("--N", type=int)
    sw.add_argument("--n-max", type=int, default=30)
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return args.func(args, started)
    except (UsageError, BranchLimitError, ValueError) as exc:
        print(f"fbox: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
