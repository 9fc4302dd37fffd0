"""Command-line interface: ``rss-infer <subcommand> ...``.

Every subcommand builds its whole output in memory and writes it only when
all requested computations succeeded; errors go to stderr (as JSON with
``--error-json``) with exit status 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, bands, estimators, exact
from .beta_rank import family
from .errors import ArgumentError, ParseError, RSSError
from .sampling import (
    SAMPLERS,
    RankedDataset,
    StratumCounts,
    dump_csv,
    load_dataset,
    simulate_jps,
    simulate_rss,
)

log = logging.getLogger("rssinfer")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _alpha(text: str) -> float:
    a = float(text)
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=True) + "\n"


# -- subcommands ----------------------------------------------------------------


def cmd_simulate(args) -> str:
    if args.scheme == "rss":
        if args.design is None:
            raise ArgumentError("--design is required for --scheme rss")
        ds = simulate_rss(args.k, args.design, args.dist, args.seed, args.threads)
    else:
        if args.n is None:
            raise ArgumentError("-n is required for --scheme jps")
        ds = simulate_jps(args.k, args.n, args.dist, args.seed, args.threads)
    if args.format == "json":
        return _json(ds.to_dict())
    return dump_csv(ds)


def _requested_estimators(choice: str, ds: RankedDataset) -> list[str]:
    if choice == "auto":
        wanted = list(estimators.ESTIMATORS)
        if 0 in ds.stratum_counts().counts:
            log.warning("stratified estimator skipped: empty strata %s",
                        [r + 1 for r, c in enumerate(ds.stratum_counts().counts) if c == 0])
            wanted.remove("S")
        return wanted
    wanted = [s.strip() for s in choice.split(",") if s.strip()]
    for name in wanted:
        if name not in estimators.ESTIMATORS:
            raise ArgumentError(f"unknown estimator {name!r}; choose from {estimators.ESTIMATORS}")
    return wanted


def cmd_estimate(args) -> str:
    ds = load_dataset(args.input)
    ds.require_homogeneous()
    names = _requested_estimators(args.estimators, ds)
    fits = {name: estimators.estimate(ds, name) for name in names}
    xs = next(iter(fits.values())).jump_points
    if args.format == "json":
        return _json({"jump_points": xs.tolist(),
                      "estimators": {name: fit.plateaus.tolist() for name, fit in fits.items()}})
    rows = ([x] + [fit.plateaus[i] for fit in fits.values()] for i, x in enumerate(xs, start=1))
    return _table(["x"] + names, rows)


def _model(args):
    if (args.input is None) == (args.counts is None):
        raise ArgumentError("give exactly one of --input and --counts")
    if args.counts is not None:
        counts = StratumCounts(tuple(args.counts))
        return exact.counts_model(counts, family(counts.k)), None
    ds = load_dataset(args.input)
    return exact.dataset_model(ds), ds


def cmd_interval(args) -> str:
    model, _ = _model(args)
    table = exact.interval_table(model, args.alpha)
    return _json(table.to_dict()) if args.format == "json" else table.to_csv()


def cmd_pvalue(args) -> str:
    model, ds = _model(args)
    if (args.y is None) == (args.x is None):
        raise ArgumentError("give exactly one of --y and --x")
    if args.x is not None:
        if ds is None:
            raise ArgumentError("--x needs --input")
        y = int(np.sum(ds.x <= args.x))
    else:
        y = args.y
    if not 0 <= y <= model.n:
        raise ArgumentError(f"y = {y} outside 0..{model.n}")
    if not 0.0 <= args.p0 <= 1.0:
        raise ArgumentError("p0 must lie in [0, 1]")
    ge = model.G(args.p0, y)
    le = model.tail(args.p0, y)
    row = {"y": y, "p0": args.p0, "pvalue_ge": ge, "pvalue_le": le}
    if args.format == "json":
        return _json(row)
    return _table(list(row), [list(row.values())])


def cmd_band(args) -> str:
    sources = [args.input is not None, args.counts is not None, args.sweep_k2 is not None]
    if sum(sources) != 1:
        raise ArgumentError("give exactly one of --input, --counts and --sweep-k2")
    if args.sweep_k2 is not None:
        sweep = bands.kappa_sweep_k2(args.sweep_k2, args.alpha, args.reps, args.seed, args.threads)
        log.info("JPS average half-width: %.4f", sweep.jps_average())
        return _json(sweep.to_dict()) if args.format == "json" else sweep.to_csv()
    if args.counts is not None:
        counts = StratumCounts(tuple(args.counts))
        kappa = bands.estimate_kappa(counts, family(counts.k), args.Z, args.alpha,
                                     args.reps, args.seed, args.threads)
        row = {"estimator": args.Z, "alpha": args.alpha, "kappa": kappa,
               "replications": args.reps, "seed": args.seed}
        return _json(row) if args.format == "json" else _table(list(row), [list(row.values())])
    ds = load_dataset(args.input)
    result = bands.band(ds, args.Z, args.alpha, args.reps, args.seed, args.threads)
    log.info("kappa = %.6f", result.kappa)
    return _json(result.to_dict()) if args.format == "json" else result.to_csv()


def cmd_efficiency(args) -> str:
    pi = args.pi if args.pi is not None else [1.0 / args.k] * args.k
    if len(pi) != args.k:
        raise ArgumentError(f"--pi has {len(pi)} entries, expected k = {args.k}")
    if args.grid < 1:
        raise ArgumentError("--grid must be positive")
    grid = np.arange(1, args.grid + 1) / (args.grid + 1)
    prof = asymptotics.efficiency_profile(asymptotics.WeightProfile(tuple(pi)), grid)
    return _json(prof.to_dict()) if args.format == "json" else prof.to_csv()


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default="-", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--error-json", action="store_true", help="report errors as JSON on stderr")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rss-infer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate an RSS or JPS dataset")
    p.add_argument("--scheme", choices=("rss", "jps"), required=True)
    p.add_argument("-k", type=int, required=True, help="set size")
    p.add_argument("-n", type=int, help="sample size (jps)")
    p.add_argument("--design", type=_int_list, help="units per rank, e.g. 25,25 (rss)")
    p.add_argument("--dist", choices=sorted(SAMPLERS), default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common], help="estimate the CDF from a dataset")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--estimators", default="auto", help="comma list of naive,S,M,L (default: all defined)")
    p.set_defaults(func=cmd_estimate)

    for name, func, text in (("interval", cmd_interval, "exact pointwise intervals for every y"),
                             ("pvalue", cmd_pvalue, "exact p-values for F(x) >= p0 and F(x) <= p0")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("-i", "--input")
        p.add_argument("--counts", type=_int_list, help="stratum sizes N_1..N_k instead of a dataset")
        if name == "interval":
            p.add_argument("--alpha", type=_alpha, default=0.05)
        else:
            p.add_argument("--p0", type=float, required=True)
            p.add_argument("--y", type=int)
            p.add_argument("--x", type=float)
        p.set_defaults(func=func)

    p = sub.add_parser("band", parents=[common], help="Monte Carlo confidence band")
    p.add_argument("-i", "--input")
    p.add_argument("--counts", type=_int_list, help="report kappa for these stratum sizes only")
    p.add_argument("--sweep-k2", type=int, metavar="N", help="kappa^M(m) and kappa(m) for k=2, m=0..N")
    p.add_argument("--Z", choices=estimators.ESTIMATORS, default="M")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--reps", type=int, default=bands.DEFAULT_REPLICATIONS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("efficiency", parents=[common], help="asymptotic variances and efficiencies")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--pi", type=_float_list, help="stratum proportions (default: balanced)")
    p.add_argument("--grid", type=int, default=99, help="number of interior grid points")
    p.set_defaults(func=cmd_efficiency)
    return parser


def _report(args, exc: BaseException) -> None:
    if getattr(args, "error_json", False):
        doc = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ParseError) and exc.line is not None:
            doc["line"] = exc.line
        sys.stderr.write(json.dumps(doc) + "\n")
    else:
        sys.stderr.write(f"rss-infer: error: {exc}\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="rss-infer: %(levelname)s: %(message)s")
    try:
        text = args.func(args)
        if args.output == "-":
            sys.stdout.write(text)
        else:
            Path(args.output).write_text(text, encoding="utf-8")
    except (RSSError, ValueError, OSError) as exc:
        _report(args, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
