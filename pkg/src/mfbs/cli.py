"""Command-line interface.

Subcommands: price, simulate, density, calibrate, compare, sample-paths.
Exit status is 0 on success, 2 on invalid input and 1 on numerical failure.

Hurst functions are given as ``const:H``, ``sin:A,B,C[,f]`` or ``table:PATH``
(two-column CSV ``t_years,h``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (
    DAYS_PER_YEAR,
    MODEL_KINDS,
    CalibrationConfig,
    OptionQuote,
    QuoteSet,
    calibrate,
    compare_models,
)
from .density import DensityParams, effective_variance, mean_price, pdf, variance_price
from .errors import DomainError, EmptyInputError, NumericalError, ParseError
from .hurst import THIRTY_DAY_FREQUENCY, ConstantHurst, HurstFunction, SinusoidalHurst, load_table
from .mbm import CovarianceKernel, PathGrid, sample_paths
from .monte_carlo import MarketParams, McConfig, mc_call_price, mc_moments, simulate_terminal_log_price
from .pricer import PricingInput, call_price

log = logging.getLogger("mfbs")

SCHEMA_VERSION = 1
QUOTE_HEADER = ["maturity_days", "strike", "mid_price"]


# ------------------------------------------------------------------ parsing

def parse_hurst(text: str) -> HurstFunction:
    kind, _, body = text.partition(":")
    if not body:
        raise DomainError(f"bad Hurst spec {text!r}; use const:H, sin:A,B,C[,f] or table:PATH")
    if kind == "table":
        return load_table(body)
    try:
        values = [float(v) for v in body.split(",")]
    except ValueError:
        raise DomainError(f"non-numeric Hurst parameters in {text!r}") from None
    if kind == "const" and len(values) == 1:
        return ConstantHurst(values[0])
    if kind == "sin" and len(values) in (3, 4):
        return SinusoidalHurst(*values)
    raise DomainError(f"bad Hurst spec {text!r}; use const:H, sin:A,B,C[,f] or table:PATH")


def parse_quotes(path, spot: float, rate: float) -> QuoteSet:
    """Read a ``maturity_days,strike,mid_price`` CSV into a validated QuoteSet."""
    path = Path(path)
    quotes, seen = [], {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path} is empty")
        if [c.strip() for c in header] != QUOTE_HEADER:
            raise ParseError(f"header must be {','.join(QUOTE_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
            try:
                days_f = float(row[0])
                if days_f != int(days_f):
                    raise ValueError(f"maturity_days {row[0]!r} is not an integer")
                quote = OptionQuote(int(days_f), float(row[1]), float(row[2]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            key = (quote.maturity_days, quote.strike)
            if key in seen:
                raise ParseError(f"duplicate quote for {key}, first seen on line {seen[key]}", line=lineno)
            seen[key] = lineno
            quotes.append(quote)
    if not quotes:
        raise EmptyInputError(f"{path} has no quote rows")
    return QuoteSet(tuple(quotes), spot, rate)


def write_quotes(qs: QuoteSet, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(QUOTE_HEADER)
        for q in qs.quotes:
            w.writerow([q.maturity_days, repr(q.strike), repr(q.mid_price)])


# ------------------------------------------------------------------ helpers

def _maturity(args) -> float:
    if args.maturity is not None:
        return args.maturity
    return args.maturity_days / DAYS_PER_YEAR


def _emit_json(payload: dict, out) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, allow_nan=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _calibration_config(args) -> CalibrationConfig:
    return CalibrationConfig(
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
        frequency=args.frequency,
        hurst_bounds=tuple(args.hurst_bounds),
        threads=args.threads,
    )


# ------------------------------------------------------------------ commands

def cmd_price(args):
    T = _maturity(args)
    res = call_price(PricingInput(args.spot, args.strike, args.rate, args.sigma, T, parse_hurst(args.hurst)))
    _emit_json(res.to_dict(), args.out)


def cmd_simulate(args):
    h = parse_hurst(args.hurst)
    T = _maturity(args)
    cfg = McConfig(MarketParams(args.spot, args.mu, args.rate, args.sigma), h, T,
                   n_paths=args.paths, n_steps=args.steps, seed=args.seed, threads=args.threads)
    x_T = simulate_terminal_log_price(cfg)
    moments = mc_moments(cfg, x_T)
    payload = {
        "config": {"spot": args.spot, "mu": args.mu, "rate": args.rate, "sigma": args.sigma,
                   "hurst": args.hurst, "maturity": T, "paths": args.paths, "steps": args.steps,
                   "seed": args.seed},
        "moments": {k: v.to_dict() for k, v in moments.items()},
        "closed_form_moments": {
            "mean_S_T": mean_price(args.spot, args.mu, T),
            "var_S_T": variance_price(args.spot, args.mu, args.sigma, h, T) if args.sigma > 0 else 0.0,
        },
    }
    if args.strike is not None:
        payload["call"] = mc_call_price(cfg, args.strike, x_T).to_dict()
        if args.sigma > 0:
            payload["closed_form_call"] = call_price(
                PricingInput(args.spot, args.strike, args.rate, args.sigma, T, h)).price
    if args.terminal_csv:
        with Path(args.terminal_csv).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["x_T", "S_T"])
            for x in x_T:
                w.writerow([repr(float(x)), repr(math.exp(x + args.mu * T))])
    _emit_json(payload, args.out)


def cmd_density(args):
    p = DensityParams(args.x0, args.sigma, parse_hurst(args.hurst))
    v = effective_variance(p.sigma, p.h, args.t)
    sd = math.sqrt(v)
    centre = args.x0 - 0.5 * v
    xs = np.linspace(centre - args.width * sd, centre + args.width * sd, args.points)
    ys = pdf(p, xs, args.t)
    fh = Path(args.out).open("w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["x", "density"])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_calibrate(args):
    qs = parse_quotes(args.quotes, args.spot, args.rate)
    res = calibrate(qs, args.model, _calibration_config(args))
    _emit_json({"spot": qs.spot, "rate": qs.rate, "n_quotes": len(qs),
                "result": res.to_dict(), "quotes": _quote_rows(qs)}, args.out)


def _quote_rows(qs):
    return [{"maturity_days": q.maturity_days, "strike": q.strike, "mid_price": q.mid_price}
            for q in qs.quotes]


def cmd_compare(args):
    qs = parse_quotes(args.quotes, args.spot, args.rate)
    ranked = compare_models(qs, _calibration_config(args))
    _emit_json({
        "spot": qs.spot,
        "rate": qs.rate,
        "n_quotes": len(qs),
        "ranking": [r.kind for r in ranked],
        "models": {r.kind: r.to_dict() for r in ranked},
        "quotes": _quote_rows(qs),
    }, args.out)
    if args.csv:
        by_kind = {r.kind: r.model_prices for r in ranked}
        cols = [("mf_price", "multifractional"), ("f_price", "fractional"), ("bs_price", "classical")]
        with Path(args.csv).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["maturity_days", "market_mid"] + [c for c, _ in cols])
            for i, q in enumerate(qs.quotes):
                row = [q.maturity_days, repr(q.mid_price)]
                row += [repr(by_kind[k][i]) if k in by_kind else "" for _, k in cols]
                w.writerow(row)


def cmd_sample_paths(args):
    if args.times:
        times = tuple(float(t) for t in args.times.split(","))
    else:
        times = tuple(args.horizon * np.arange(1, args.n_times + 1) / args.n_times)
    grid = PathGrid(times, args.paths, args.seed)
    paths = sample_paths(CovarianceKernel(parse_hurst(args.hurst)), grid, threads=args.threads)
    fh = Path(args.out).open("w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow([repr(t) for t in grid.times])
        for row in paths:
            w.writerow([repr(float(v)) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


# ------------------------------------------------------------------ parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mfbs", description="Multifractional Black-Scholes toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def maturity_args(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--maturity-days", type=float, help="maturity in trading days (252 per year)")
        g.add_argument("--maturity", type=float, help="maturity in years")

    p = sub.add_parser("price", parents=[common], help="closed-form European call")
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--hurst", default="const:0.5")
    maturity_args(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo moments and call price")
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--strike", type=float)
    p.add_argument("--hurst", default="const:0.5")
    p.add_argument("--paths", type=_positive_int, default=100_000)
    p.add_argument("--steps", type=_positive_int, default=128)
    p.add_argument("--terminal-csv", help="write per-path x_T and S_T here")
    maturity_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("density", parents=[common], help="transition density curve as CSV")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--hurst", default="const:0.5")
    p.add_argument("--t", type=float, required=True, help="time in years")
    p.add_argument("--points", type=_positive_int, default=2001)
    p.add_argument("--width", type=float, default=12.0, help="half-width in standard deviations")
    p.set_defaults(func=cmd_density)

    def calib_args(p):
        p.add_argument("--quotes", required=True, help="CSV with maturity_days,strike,mid_price")
        p.add_argument("--spot", type=float, required=True)
        p.add_argument("--rate", type=float, required=True)
        p.add_argument("--restarts", type=_positive_int, default=16)
        p.add_argument("--max-iter", type=_positive_int, default=2000)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--frequency", type=float, default=THIRTY_DAY_FREQUENCY,
                       help="sinusoid cycles per year (default 252/30)")
        p.add_argument("--hurst-bounds", type=float, nargs=2, default=(0.05, 0.95), metavar=("L", "M"))

    p = sub.add_parser("calibrate", parents=[common], help="fit one model to quotes")
    calib_args(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="multifractional")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compare", parents=[common], help="fit and rank all three models")
    calib_args(p)
    p.add_argument("--csv", help="plot-ready CSV of market and model prices")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sample-paths", parents=[common], help="exact mBm paths as CSV")
    p.add_argument("--hurst", default="const:0.5")
    p.add_argument("--paths", type=int, default=10)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--times", help="comma-separated grid times in years")
    g.add_argument("--horizon", type=float, help="uniform grid on (0, horizon]")
    p.add_argument("--n-times", type=_positive_int, default=100)
    p.set_defaults(func=cmd_sample_paths)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DomainError, ValueError, OSError) as exc:
        print(f"mfbs {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"mfbs {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
