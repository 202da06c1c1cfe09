"""Command-line interface: ``axialunif {sample,test,crit,power,limlaw,figure}``.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness, limlaw, teststats
from .io import DataFileSpec, dumps, load_dataset, report_to_dict, write_dataset
from .models import LINEAR, WATSON, AxialModel, sample_axial
from .numerics import NumericalError, RngStream

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
_F = {"watson": WATSON, "linear": LINEAR}
_SPECIFIED = ("specified_right", "specified_left", "specified_two_sided")


class UsageError(ValueError):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_sample(args):
    theta = np.asarray(args.theta) if args.theta else None
    if theta is None:
        model = AxialModel.standard(args.p, args.kappa, _F[args.f])
    else:
        model = AxialModel(args.p, theta / np.linalg.norm(theta), args.kappa, _F[args.f])
    sample = sample_axial(model, args.n, RngStream(args.seed, 0))
    comment = (f"seed={args.seed} p={args.p} n={args.n} kappa={args.kappa!r} f={args.f} "
               f"theta={','.join(repr(float(v)) for v in model.theta)}")
    if args.out:
        write_dataset(sample, args.out, comment=comment)
    else:
        sys.stdout.write(f"# {comment}\n")
        for row in sample.points:
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
    return EXIT_OK


def run_tests(sample, tests, theta=None, alpha=0.05, crit_source="auto",
              m=limlaw.DEFAULT_CRIT_M, seed=0):
    """One JSON-ready report per requested test.

    ``seed`` is recorded in every report; it only matters for simulated
    null laws.
    """
    unknown = [t for t in tests if t not in teststats.TEST_NAMES]
    if unknown:
        raise UsageError(f"unknown test(s): {', '.join(unknown)}")
    if any(t in _SPECIFIED for t in tests) and theta is None:
        raise UsageError("--theta is required for specified-axis tests")
    if theta is not None and not any(t in _SPECIFIED for t in tests):
        raise UsageError("--theta given but no specified-axis test requested")
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        if theta.size != sample.p or np.linalg.norm(theta) == 0:
            raise UsageError(f"--theta must be a non-zero vector of length p={sample.p}")
        theta = theta / np.linalg.norm(theta)
    if crit_source == "analytic" and sample.p not in (2, 3) and any(
            t in ("t_plus", "t_minus", "t_pm") for t in tests):
        raise UsageError(f"analytic critical values are unavailable for p={sample.p}")
    spec = teststats.scatter_matrix(sample)
    out = []
    for name in tests:
        if name in _SPECIFIED:
            rep = teststats.t_specified(spec, theta, name[len("specified_"):], alpha)
        elif name == "bingham":
            rep = teststats.bingham_q(spec, alpha)
        elif name == "rayleigh":
            rep = teststats.rayleigh_stat(sample, alpha)
        else:
            fn = getattr(teststats, name)
            rep = fn(spec, alpha, m=m, seed=seed, method=crit_source)
        out.append(report_to_dict(rep, seed=seed))
    return out


def cmd_test(args):
    data = load_dataset(DataFileSpec(args.data, args.delimiter, args.header, args.renormalize))
    reports = run_tests(data, _names(args.tests), args.theta, args.alpha, args.crit_source,
                        args.m, args.seed)
    _emit(dumps(reports), args.out)
    return EXIT_OK


def cmd_crit(args):
    value = limlaw.crit_value(args.test, args.p, args.alpha, args.method, args.m, args.seed)
    payload = {"test": args.test, "p": args.p, "alpha": args.alpha, "method": args.method,
               "critical_value": value, "seed": args.seed}
    if args.method == "mc":
        payload["m"] = args.m
    _emit(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def cmd_power(args):
    tests = _names(args.tests)
    if args.n is not None:
        spec = harness.ExperimentSpec(args.p, args.n, tuple(args.tau), tuple(tests), args.alpha,
                                      args.replicates, args.seed, _F[args.f],
                                      crit_m=args.m, asym_m=args.asym_m, workers=args.threads)
        curve = harness.run_power_experiment(spec)
        if args.out:
            curve.to_csv(args.out)
        else:
            curve.write(sys.stdout)
        return EXIT_OK
    crits = harness.critical_values(tests, args.p, args.alpha, args.m, args.seed + 1)
    lines = [f"# seed={args.seed}", "test,tau,asym_power"]
    for name in tests:
        for tau in args.tau:
            pw = harness.asymptotic_power(name, args.p, tau, args.alpha, crits[name],
                                          args.asym_m, args.seed + 2)
            lines.append(f"{name},{tau!r},{pw!r}")
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_limlaw(args):
    table = limlaw.build_table(limlaw.LimitMatrixSpec(args.p, args.tau), args.m, args.seed)
    if not args.out:
        raise UsageError("limlaw needs --out FILE")
    table.to_csv(args.out)
    sys.stdout.write(json.dumps({"path": args.out, "p": args.p, "tau": args.tau, "m": args.m,
                                 "seed": args.seed}) + "\n")
    return EXIT_OK


def cmd_figure(args):
    out_dir = args.out or f"figure{args.id}"
    manifest = harness.replicate_figure(args.id, args.scale, args.seed, out_dir,
                                        replicates=args.replicates, workers=args.threads)
    sys.stdout.write(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for simulations")
    common.add_argument("--out", default=None, help="output file (or directory for 'figure')")

    parser = argparse.ArgumentParser(prog="axialunif",
                                     description="Axial tests of uniformity on the sphere.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw from an axial model")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--f", choices=sorted(_F), default="watson")
    p.add_argument("--theta", type=_floats, default=None, help="location axis, e.g. 0,0,1")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("test", parents=[common], help="run tests on a dataset")
    p.add_argument("data")
    p.add_argument("--tests", default="bingham,t_plus,t_minus,t_pm",
                   help="comma-separated: " + ",".join(teststats.TEST_NAMES))
    p.add_argument("--theta", type=_floats, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--crit-source", choices=("auto", "analytic", "mc"), default="auto")
    p.add_argument("--m", type=int, default=limlaw.DEFAULT_CRIT_M,
                   help="limiting-law draws for simulated p-values")
    p.add_argument("--delimiter", default=",", help="',' or 'whitespace'")
    p.add_argument("--header", action="store_true")
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("crit", parents=[common], help="asymptotic critical value")
    p.add_argument("--test", choices=("t_plus", "t_minus", "t_pm"), required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--m", type=int, default=limlaw.DEFAULT_CRIT_M)
    p.set_defaults(func=cmd_crit)

    p = sub.add_parser("power", parents=[common], help="asymptotic or Monte Carlo power")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--tau", type=_floats, default=[0.0, 1.0, 2.0, 3.0])
    p.add_argument("--tests", default="specified_right,bingham,t_plus")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, default=None, help="run a Monte Carlo experiment with this n")
    p.add_argument("--replicates", type=int, default=2000)
    p.add_argument("--f", choices=sorted(_F), default="watson")
    p.add_argument("--m", type=int, default=limlaw.DEFAULT_CRIT_M)
    p.add_argument("--asym-m", type=int, default=limlaw.DEFAULT_POWER_M)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("limlaw", parents=[common], help="simulate a limiting-law table")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--m", type=int, default=limlaw.DEFAULT_CRIT_M)
    p.set_defaults(func=cmd_limlaw)

    p = sub.add_parser("figure", parents=[common], help="regenerate a simulation figure")
    p.add_argument("--id", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p.add_argument("--replicates", type=int, default=None)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NumericalError as exc:
        sys.stderr.write(f"axialunif: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"axialunif: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
