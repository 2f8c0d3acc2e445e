"""Command-line entry point.

Exit codes: 0 on success, 2 on input errors, 3 on solver failures.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .core import DataError, read_dataset_csv
from .datagen import FAMILIES, GeneratorSpec
from .experiments import exp_certificate_bench, exp_estimator_compare, exp_growth_vs_dim
from .report import FORMATS, ExperimentReport
from .returns import ReturnsMatrix, compute_log_returns, read_prices_csv, write_returns_csv
from .robust import ASSIGNMENTS, MomConfig, geometric_mom, replicated_mom
from .solvers import METHODS, MaxItersExceeded, SolverConfig, SolverError, solve

EXIT_INPUT = 2
EXIT_SOLVER = 3


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _common(p, need_input=False):
    p.add_argument("--in", dest="input", required=need_input, help="input CSV file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6, help="solver accuracy")
    p.add_argument("--method", choices=METHODS, default="newton")
    p.add_argument("--skip-header", action="store_true", help="skip the first CSV line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geomed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("median", help="geometric median of a CSV dataset")
    _common(p, need_input=True)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--m-factor", type=float, default=2.0)

    p = sub.add_parser("mom", help="geometric median-of-means of a CSV dataset")
    _common(p, need_input=True)
    p.add_argument("--k", type=int, required=True, help="number of blocks")
    p.add_argument("--assignment", choices=ASSIGNMENTS, default="sequential")
    p.add_argument("--reps", type=int, default=1, help="replicate every row this many times")

    p = sub.add_parser("returns", help="convert a price CSV to log returns")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("--dates", action="store_true", help="first column holds row labels")
    p.add_argument("--header", choices=("auto", "yes", "no"), default="auto")

    exp = sub.add_parser("exp", help="experiment pipelines").add_subparsers(dest="experiment", required=True)

    p = exp.add_parser("growth-dim", help="curvature of F near the median versus dimension")
    _common(p)
    p.add_argument("--dims", type=_int_list, default=[4, 16, 64, 256])
    p.add_argument("--family", choices=("fourier", "sphere"), default="fourier")

    p = exp.add_parser("compare", help="compare mean estimators on a returns or prices CSV")
    _common(p, need_input=True)
    p.add_argument("--prices", action="store_true", help="input holds prices, not returns")
    p.add_argument("--dates", action="store_true", help="first column holds row labels")
    p.add_argument("--header", choices=("auto", "yes", "no"), default="auto")
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--cutoffs", type=_int_list, required=True)
    p.add_argument("--mom-ks", type=_int_list, default=[5, 10])
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--rep-k", type=int, default=50)
    p.add_argument("--assignment", choices=ASSIGNMENTS, default="sequential")

    p = exp.add_parser("cert-bench", help="solver iterations and certificate soundness")
    _common(p)
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--df", type=float, default=5.0)
    p.add_argument("--frac", type=float, default=0.0)
    p.add_argument("--mag", type=float, default=0.0)
    p.add_argument("--eps-list", type=_float_list, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--timing", action="store_true", help="record wall-clock time per run")
    return parser


def _emit(report: ExperimentReport, args):
    text = report.dumps(args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _header_flag(value):
    return {"auto": None, "yes": True, "no": False}[value]


def _run(args):
    if args.command == "median":
        data = read_dataset_csv(args.input, skip_header=args.skip_header)
        cfg = SolverConfig(eps=args.eps, max_iters=args.max_iters, m_factor=args.m_factor)
        res = solve(data, args.method, cfg)
        _emit(ExperimentReport("median", {"input": args.input, "method": args.method, "eps": args.eps}, args.seed, [res.to_dict()]), args)
    elif args.command == "mom":
        data = read_dataset_csv(args.input, skip_header=args.skip_header)
        cfg = MomConfig(args.k, assignment=args.assignment, seed=args.seed, inner_eps=args.eps, inner_method=args.method)
        est = replicated_mom(data, args.reps, cfg) if args.reps > 1 else geometric_mom(data, cfg)
        params = {"input": args.input, "k": args.k, "assignment": args.assignment, "reps": args.reps, "eps": args.eps}
        _emit(ExperimentReport("mom", params, args.seed, [{"estimate": est}]), args)
    elif args.command == "returns":
        prices, symbols, dates = read_prices_csv(args.input, dates=args.dates, header=_header_flag(args.header))
        ret = compute_log_returns(prices, symbols, dates)
        write_returns_csv(ret, args.out or sys.stdout)
    elif args.experiment == "growth-dim":
        _emit(exp_growth_vs_dim(args.dims, seed=args.seed, family=args.family), args)
    elif args.experiment == "compare":
        values, symbols, dates = read_prices_csv(args.input, dates=args.dates, header=_header_flag(args.header))
        returns = compute_log_returns(values, symbols, dates) if args.prices else ReturnsMatrix(values, symbols, dates)
        report = exp_estimator_compare(
            returns,
            horizon=args.horizon,
            cutoffs=args.cutoffs,
            mom_ks=args.mom_ks,
            reps=args.reps,
            rep_k=args.rep_k,
            seed=args.seed,
            assignment=args.assignment,
            inner_eps=args.eps,
        )
        _emit(report, args)
    elif args.experiment == "cert-bench":
        spec = GeneratorSpec(args.family, args.d, seed=args.seed, df=args.df, frac=args.frac, mag=args.mag)
        _emit(exp_certificate_bench(spec, args.n, args.eps_list, timing=args.timing), args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _run(args)
    except (MaxItersExceeded, SolverError) as exc:
        print(f"geomed: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, ValueError, OSError) as exc:
        print(f"geomed: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
