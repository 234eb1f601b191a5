"""Command-line interface: ``trimot <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 infeasible plan, 3 I/O error,
4 self-test failure.
"""

import argparse
import os
import sys

import numpy as np

from .errors import InfeasiblePlanError, TrimotError
from .harness import STATISTICS, ExperimentConfig, emit_report, run_experiment, sample_uniform
from .matching import MatchingProblem, solve_partial_matching
from .measures import Sample, TrimParams, read_sample_csv
from .quantization import quantization_constant, quantization_cost_1d, quantization_cost_mc
from .stripes import build_stripe_plan, stripe_cost, stripe_cost_recursive
from .trim1d import compute_envelopes, solve_trim1d

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO, EXIT_SELFTEST = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _g(x):
    return f"{x:.12g}"


def _n_grid(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p, d=1, n=100):
    p.add_argument("--n", type=_positive_int, default=n, help="sample size (ignored with --input-x)")
    p.add_argument("--d", type=_positive_int, default=d, help="dimension of sampled points")
    p.add_argument("--p", type=float, default=2.0, help="cost exponent, >= 1")
    p.add_argument("--alpha", type=float, default=0.1, help="trimming level in [0, 1)")
    p.add_argument("--seed", type=int, default=0, help="master seed for sampling")
    p.add_argument("--input-x", metavar="FILE", help="CSV of points (one row per point); overrides sampling")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="trimot", description="Trimmed optimal transport rates and solvers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trim1d", formatter_class=fmt,
                       help="optimal alpha-trimming of a 1-D sample towards U(0,1)")
    _common(p)
    p.add_argument("--out", metavar="DIR", help="write the optimal trim vector to DIR/trim1d_h.csv")

    p = sub.add_parser("match", formatter_class=fmt, help="partial matching between two samples")
    _common(p)
    p.add_argument("--input-y", metavar="FILE", help="CSV of second sample; overrides sampling")
    p.add_argument("--out", metavar="DIR", help="write the pairing to DIR/pairing.csv")

    p = sub.add_parser("stripe", formatter_class=fmt, help="stripe construction cost and bound (d >= 2)")
    _common(p, d=2, n=256)
    p.add_argument("--method", choices=["exact", "quadrature", "mc"], default="exact",
                   help="cost evaluation for d=2 (mc: Monte Carlo)")
    p.add_argument("--mc-draws", type=_positive_int, default=100_000, help="Monte Carlo draws")

    p = sub.add_parser("quantize", formatter_class=fmt, help="random quantization cost (alpha = 1)")
    _common(p)
    p.add_argument("--method", choices=["exact", "mc"], default=None,
                   help="exact (d=1 only) or mc; default exact for d=1, mc otherwise")
    p.add_argument("--mc-draws", type=_positive_int, default=100_000, help="Monte Carlo draws")

    p = sub.add_parser("rates", formatter_class=fmt, help="replicated rate experiment with reports")
    p.add_argument("--statistic", choices=STATISTICS, required=True)
    p.add_argument("--d", type=_positive_int, default=1, help="dimension")
    p.add_argument("--p", type=float, default=2.0, help="cost exponent, >= 1")
    p.add_argument("--alpha", type=float, default=0.1, help="trimming level in [0, 1)")
    p.add_argument("--n-grid", type=_n_grid, default=[50, 100, 200, 400],
                   help="comma-separated, strictly increasing sample sizes")
    p.add_argument("--reps", type=_positive_int, default=100, help="replications per n")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1,
                   help="worker threads (output does not depend on it)")
    p.add_argument("--mc-draws", type=_positive_int, default=100_000,
                   help="Monte Carlo draws per replication (quantization, d >= 2)")
    p.add_argument("--out", metavar="DIR", default="out", help="report directory")

    p = sub.add_parser("selftest", formatter_class=fmt, help="run the oracle-equivalence checks")
    p.add_argument("--seed", type=int, default=0, help="seed for the random instances")
    return parser


def _load(path):
    try:
        return read_sample_csv(path)
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read points from {path}: {exc}") from exc


def _sample(args, d=None):
    if args.input_x:
        return _load(args.input_x)
    return sample_uniform(args.n, d or args.d, args.seed)


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")


def cmd_trim1d(args):
    sample = _sample(args, d=1)
    if sample.dim != 1:
        raise UsageError(f"trim1d needs 1-D points, got d={sample.dim}")
    params = TrimParams(args.alpha, args.p)
    res = solve_trim1d(sample, params)
    print(f"n {sample.n}  p {_g(params.p)}  alpha {_g(params.alpha)}")
    print(f"cost {_g(res.cost)}")
    print(f"bounds [{_g(res.lower_bound)}, {_g(res.upper_bound)}]")
    if sample.n > 1:
        env = compute_envelopes(sample, params)
        band = env.h_bar[1:-1] - env.h_lower[1:-1]
        h = res.h_opt.h
        inside = bool(np.all(h >= env.h_lower[1:-1] - 1e-7) and np.all(h <= env.h_bar[1:-1] + 1e-7))
        print(f"envelopes: max width {_g(band.max())}, mean width {_g(band.mean())}, "
              f"optimum inside {inside}")
    if args.out:
        path = os.path.join(args.out, "trim1d_h.csv")
        _write_csv(path, "i,h", ([str(i), f"{v:.17g}"] for i, v in enumerate(res.h_opt.full())))
        print(f"wrote {path}")
    return EXIT_OK


def cmd_match(args):
    if args.input_x or args.input_y:
        if not (args.input_x and args.input_y):
            raise UsageError("--input-x and --input-y must be given together")
        X, Y = _load(args.input_x), _load(args.input_y)
    else:
        pts = sample_uniform(2 * args.n, args.d, args.seed).points
        X, Y = Sample(pts[:args.n]), Sample(pts[args.n:])
    prob = MatchingProblem(X, Y, args.p, args.alpha)
    res = solve_partial_matching(prob)
    print(f"n {prob.n}  m {prob.m}  p {_g(prob.p)}  alpha {_g(prob.alpha)}")
    print(f"cost {_g(res.cost)}")
    if args.out:
        path = os.path.join(args.out, "pairing.csv")
        d = np.sqrt(np.sum((X.points[res.kept_x] - Y.points[res.kept_y]) ** 2, axis=1)) ** prob.p
        _write_csv(path, "x_index,y_index,cost",
                   ([str(i), str(j), f"{c:.17g}"] for i, j, c in zip(res.kept_x, res.kept_y, d)))
        print(f"wrote {path}")
    return EXIT_OK


def cmd_stripe(args):
    sample = _sample(args)
    params = TrimParams(args.alpha, args.p)
    if sample.dim >= 3:
        rep = stripe_cost_recursive(sample, params)
        print(f"n {sample.n}  d {sample.dim}  feasible True")
        print(f"upper_bound {_g(rep.upper_bound)}")
        return EXIT_OK
    plan = build_stripe_plan(sample, params)
    print(f"n {sample.n}  N {plan.N}  min count {plan.counts.min()}  feasible {plan.feasible}")
    for msg in plan.diagnostics:
        print(f"  {msg}")
    method = "monte_carlo" if args.method == "mc" else args.method
    rep = stripe_cost(plan, method=method, n_mc=args.mc_draws, seed=args.seed)
    line = f"cost {_g(rep.exact_or_mc_cost)} ({rep.method})"
    if method == "monte_carlo":
        line += f"  stderr {_g(rep.mc_std_error)}"
    print(line)
    print(f"upper_bound {_g(rep.upper_bound)}")
    return EXIT_OK


def cmd_quantize(args):
    sample = _sample(args)
    method = args.method or ("exact" if sample.dim == 1 else "mc")
    if method == "exact":
        if sample.dim != 1:
            raise UsageError("--method exact needs d=1")
        rep = quantization_cost_1d(sample, args.p)
    else:
        rep = quantization_cost_mc(sample, args.p, args.mc_draws, args.seed)
    const = quantization_constant(rep.d, rep.p)
    print(f"n {rep.n}  d {rep.d}  p {_g(rep.p)}  method {rep.method}")
    line = f"cost {_g(rep.cost)}"
    if rep.mc_std_error is not None:
        line += f"  stderr {_g(rep.mc_std_error)}"
    print(line)
    print(f"scaled n^(p/d)*cost {_g(rep.scaled)}  limit constant {_g(const)}")
    return EXIT_OK


def cmd_rates(args):
    cfg = ExperimentConfig(args.statistic, args.d, args.p, args.alpha, tuple(args.n_grid),
                           args.reps, args.seed, args.workers, args.mc_draws)
    table = run_experiment(cfg)
    for n, mean, se, k in table.summary:
        print(f"n {n:>7d}  mean {_g(mean)}  stderr {_g(se)}  included {k}/{cfg.reps}")
    print(f"slope {_g(table.slope)}  se {_g(table.slope_se)}")
    paths = emit_report(table, args.out)
    for p in paths.values():
        print(f"wrote {p}")
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest
    return EXIT_OK if run_selftest(args.seed) else EXIT_SELFTEST


COMMANDS = {"trim1d": cmd_trim1d, "match": cmd_match, "stripe": cmd_stripe,
            "quantize": cmd_quantize, "rates": cmd_rates, "selftest": cmd_selftest}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        try:
            return COMMANDS[args.command](args)
        finally:
            sys.stdout.flush()
    except UsageError as exc:
        print(f"trimot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasiblePlanError as exc:
        print(f"trimot {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"trimot {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TrimotError as exc:
        print(f"trimot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
