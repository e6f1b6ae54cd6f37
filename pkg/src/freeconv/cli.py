"""Command-line front end: density grids, support reports, bound checks,
and the random-matrix cross-check, with reproducible on-disk outputs.

Exit codes: 0 success, 1 bad input, 2 numerical failure, 3 bound violation.
"""

import argparse
import json
import os
import platform
import sys

import numpy as np
import scipy

import freeconv
from freeconv.measures import InputError, build_measure
from freeconv.transform import NumericalError
from freeconv import subordination, spectral
from freeconv.analysis import bounds_report
from freeconv.rmt import TrialConfig, validate
from freeconv.spectral import density_grid, detect_support, write_csv

_DEFAULT_OUT = {
    "convolve": "grid.csv",
    "semigroup": "grid.csv",
    "support": "support.json",
    "bounds-check": "bounds.json",
    "rmt-validate": "rmt.json",
}


def _parser():
    p = argparse.ArgumentParser(
        prog="freeconv",
        description="Free additive convolution of multi-cut measures: "
        "densities, supports, component-count bounds, random-matrix checks.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, n_measures):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("measures", nargs=n_measures, metavar="MEASURE.json")
        sp.add_argument("--t", type=float, default=None,
                        help="semigroup parameter (> 1)")
        sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                        default=None, help="energy window for the grid")
        sp.add_argument("--points", type=int, default=2001, metavar="N",
                        help="number of base grid points")
        sp.add_argument("--out", default=None, metavar="PATH",
                        help="output path (CSV for grids, JSON for reports)")
        sp.add_argument("--seed", type=int, default=0, metavar="S",
                        help="RNG seed for randomized commands")
        sp.add_argument("--threads", type=int, default=None, metavar="K",
                        help="cap on BLAS threads")
        sp.add_argument("--allow-atomic", action="store_true",
                        help="accept measure specs with atoms")
        return sp

    add("convolve", "density grid and support of mu_a boxplus mu_b", 2)
    add("semigroup", "density grid and support of mu^boxplus t", 1)
    add("support", "support report only (pair with two measures, "
        "semigroup with one measure and --t)", "+")
    add("bounds-check", "component-count bound verdicts "
        "(pair or semigroup, chosen like `support`)", "+")
    add("rmt-validate", "random-matrix Monte Carlo check of the pair density "
        "(--points sets the matrix size)", 2)
    return p


def _load(path, allow_atomic):
    if not os.path.exists(path):
        raise InputError(f"measure spec file not found: {path}")
    with open(path) as f:
        try:
            spec = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"invalid JSON in {path}: {e}") from e
    return build_measure(spec, allow_atomic=allow_atomic)


def _limit_threads(k):
    if k is None:
        return
    if k < 1:
        raise InputError("--threads must be a positive integer")
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(k)
    except ImportError:
        pass


def _write_json(obj, path):
    with open(path, "w", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_meta(args, out_path):
    meta = {
        "command": args.command,
        "config": {
            "measures": list(args.measures),
            "t": args.t,
            "window": list(args.window) if args.window else None,
            "points": args.points,
            "out": out_path,
            "seed": args.seed,
            "threads": args.threads,
            "allow_atomic": args.allow_atomic,
        },
        "tolerances": {
            "semigroup_residual": subordination.SEMIGROUP_TOL,
            "pair_residual": subordination.PAIR_TOL,
            "support_threshold_rel": spectral.SUPP_THRESHOLD_REL,
            "edge_refinement": spectral.EDGE_TOL,
        },
        "versions": {
            "freeconv": freeconv.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    _write_json(meta, os.path.join(os.path.dirname(out_path) or ".", "run_meta.json"))


def _grid_kind(args):
    """Decide pair vs semigroup from the measure count and --t."""
    if len(args.measures) == 2:
        if args.t is not None:
            raise InputError("--t applies to the semigroup path (one measure)")
        return "pair"
    if len(args.measures) == 1:
        if args.t is None:
            raise InputError("one measure needs --t (semigroup path)")
        return "semigroup"
    raise InputError("expected one measure with --t, or two measures")


def _make_grid(args, kind):
    mus = [_load(p, args.allow_atomic) for p in args.measures]
    window = tuple(args.window) if args.window else None
    if kind == "pair":
        dg = density_grid("pair", mus[0], mus[1],
                          window=window, n_points=args.points)
    else:
        dg = density_grid("semigroup", mus[0], t=args.t,
                          window=window, n_points=args.points)
    return mus, dg


def _support_dict(sr):
    return {
        "components": [[l, r] for l, r in sr.components],
        "interior_zeros": sr.interior_zeros,
        "divergence_points": sr.divergence_points,
        "counts": {"I": sr.counts[0], "C0": sr.counts[1], "Cinf": sr.counts[2]},
        "threshold": sr.threshold,
        "edge_mismatches": sr.edge_mismatches,
    }


def _cmd_grid(args, kind):
    _, dg = _make_grid(args, kind)
    out = args.out or _DEFAULT_OUT[args.command]
    write_csv(dg, out)
    sr = detect_support(dg)
    root, _ = os.path.splitext(out)
    _write_json(_support_dict(sr), root + ".support.json")
    _write_meta(args, out)
    return 0


def _cmd_convolve(args):
    if args.t is not None:
        raise InputError("--t applies to the semigroup command")
    return _cmd_grid(args, "pair")


def _cmd_semigroup(args):
    if args.t is None or args.t <= 1:
        raise InputError("semigroup needs --t greater than 1")
    return _cmd_grid(args, "semigroup")


def _cmd_support(args):
    kind = _grid_kind(args)
    _, dg = _make_grid(args, kind)
    sr = detect_support(dg)
    out = args.out or _DEFAULT_OUT[args.command]
    _write_json(_support_dict(sr), out)
    _write_meta(args, out)
    return 0


def _cmd_bounds_check(args):
    kind = _grid_kind(args)
    mus, dg = _make_grid(args, kind)
    sr = detect_support(dg)
    if kind == "pair":
        br = bounds_report("pair", mus[0], sr, mu_b=mus[1])
    else:
        br = bounds_report("semigroup", mus[0], sr, t=args.t)
    out = args.out or _DEFAULT_OUT[args.command]
    _write_json(br.to_dict(), out)
    _write_meta(args, out)
    return 0 if br.passed else 3


def _cmd_rmt_validate(args):
    # --points sets the matrix size here; the reference density uses a
    # fixed-resolution grid
    mus = [_load(p, args.allow_atomic) for p in args.measures]
    window = tuple(args.window) if args.window else None
    dg = density_grid("pair", mus[0], mus[1], window=window, n_points=1001)
    cfg = TrialConfig(matrix_size=args.points, trials=50, seed=args.seed)
    rep = validate(mus[0], mus[1], cfg, dg)
    out = args.out or _DEFAULT_OUT[args.command]
    _write_json(rep.to_dict(), out)
    _write_meta(args, out)
    return 0


_COMMANDS = {
    "convolve": _cmd_convolve,
    "semigroup": _cmd_semigroup,
    "support": _cmd_support,
    "bounds-check": _cmd_bounds_check,
    "rmt-validate": _cmd_rmt_validate,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        _limit_threads(args.threads)
        return _COMMANDS[args.command](args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
