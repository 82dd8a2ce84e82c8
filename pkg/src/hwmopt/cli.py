"""Command line: ``hwm-opt {price,mc,tables,selftest}``.

Exit codes: 0 success, 1 a numerical gate failed, 2 usage or validation error.
Rates may be given as decimals (0.02) or percentages (2%).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

from . import montecarlo, pricing, tables, transforms
from .inversion import InversionConfig, self_test
from .model import FundParameters, HwmMode, ParameterError, derive_coefficients, validate

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2

# flag -> FundParameters field
PARAM_FLAGS = {
    "spot": "spot",
    "hwm": "high_water_mark",
    "strike": "strike",
    "maturity": "maturity",
    "rate": "rate",
    "alpha": "excess_return",
    "mgmt": "management_fee",
    "incentive": "incentive_fraction",
    "mu": "mean_return",
    "vol": "volatility",
}
OPTIONAL_FLAGS = {"offset": "valuation_offset"}


class UsageError(Exception):
    pass


def parse_rate(text: str | float) -> float:
    """``"2%"`` -> 0.02, ``"0.02"`` -> 0.02."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    if text.endswith("%"):
        return float(text[:-1]) / 100.0
    return float(text)


def _rate_arg(text: str) -> float:
    try:
        return parse_rate(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or percentage: {text!r}")


def _seed(default: int) -> int:
    env = os.environ.get("HWM_OPT_SEED")
    return int(env) if env else default


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("contract and market")
    for flag in PARAM_FLAGS:
        g.add_argument(f"--{flag}", type=_rate_arg, default=None)
    g.add_argument("--offset", type=_rate_arg, default=None, help="valuation date in years (default 0)")
    g.add_argument("--hwm-mode", choices=[m.value for m in HwmMode], default=None)
    g.add_argument("--config", help="JSON file whose keys mirror the flags; a list prices a batch")


def _requests(args: argparse.Namespace) -> list[dict[str, Any]]:
    """Merge config-file entries with command-line flags (flags win)."""
    entries: list[dict[str, Any]] = [{}]
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        entries = loaded if isinstance(loaded, list) else [loaded]
    out = []
    for entry in entries:
        merged = {k.replace("_", "-"): v for k, v in entry.items()}
        for flag in [*PARAM_FLAGS, *OPTIONAL_FLAGS, "hwm-mode"]:
            value = getattr(args, flag.replace("-", "_"), None)
            if value is not None:
                merged[flag] = value
        out.append(merged)
    return out


def _build_params(request: dict[str, Any]) -> FundParameters:
    missing = [f"--{flag}" for flag in PARAM_FLAGS if request.get(flag) is None]
    if missing:
        raise UsageError(f"missing required flag(s): {', '.join(missing)}")
    fields = {field: parse_rate(request[flag]) for flag, field in PARAM_FLAGS.items()}
    fields["valuation_offset"] = parse_rate(request.get("offset", 0.0))
    fields["hwm_mode"] = HwmMode(request.get("hwm-mode", HwmMode.FIXED.value))
    params = FundParameters(**fields)
    violations = validate(params)
    if violations:
        raise ParameterError(violations)
    return params


def _inversion_config(args) -> InversionConfig:
    return InversionConfig(series_terms=args.series_terms, euler_terms=args.euler_terms)


def cmd_price(args) -> int:
    config = _inversion_config(args)
    for request in _requests(args):
        params = _build_params(request)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.put:
                quote = pricing.price_put(params, config)
            else:
                quote = pricing.price_call(params, config)
        payload = {
            "price": quote.value,
            "method": quote.method.value,
            "error_estimate": quote.error_estimate,
            "payoff": "put" if args.put else ("forward" if params.strike == 0 else "call"),
            "params_echo": params.as_dict(),
        }
        if caught:
            payload["warnings"] = [str(w.message) for w in caught]
        print(json.dumps(payload))
    return EXIT_OK


def cmd_mc(args) -> int:
    config = montecarlo.McConfig(paths=args.paths, steps_per_year=args.steps_per_year, seed=_seed(args.seed),
                                 antithetic=not args.no_antithetic)
    for request in _requests(args):
        params = _build_params(request)
        stats = montecarlo.simulate_price(params, args.payoff, config)
        print(json.dumps({
            "price": stats.price_mean,
            "method": "monte-carlo",
            "error_estimate": stats.std_error,
            "occupation_above_fraction": stats.occupation_above_fraction,
            "barrier_hit_fraction": stats.barrier_hit_fraction,
            "paths": stats.paths,
            "steps_per_year": config.steps_per_year,
            "seed": config.seed,
            "payoff": args.payoff,
            "params_echo": params.as_dict(),
        }))
    return EXIT_OK


def table_rows(number: int, config: InversionConfig = InversionConfig(), mc_config: montecarlo.McConfig | None = None,
               interpretations: Sequence[str] | None = None) -> list[dict[str, Any]]:
    """Price a benchmark table; one row per (block, strike, maturity)."""
    if interpretations is None:
        interpretations = ("title", "blocks") if number == 4 else (None,)
    jobs = []
    for interp in interpretations:
        tb = tables.table(number, interp)
        for bi, block in enumerate(tb.blocks, start=1):
            for strike in tables.STRIKES:
                for maturity in tables.MATURITIES:
                    jobs.append((tb, bi, block, strike, maturity))

    def price(job):
        tb, bi, block, strike, maturity = job
        params = block.params(strike, maturity)
        quote = pricing.price_call(params, config)
        published = block.published[(strike, maturity)]
        row = {
            "table": tb.number,
            "interpretation": tb.interpretation,
            "block": bi,
            "hwm": block.hwm,
            "spot": params.spot,
            "strike": strike,
            "maturity": maturity,
            "volatility": block.volatility,
            "excess_return": block.excess_return,
            "mean_return": block.mean_return,
            "price": quote.value,
            "error_estimate": quote.error_estimate,
            "published": published,
            "abs_diff": abs(quote.value - published),
        }
        if tb.number == 5:
            row["merton"] = pricing.merton_reference(params.spot, strike, maturity, params.rate,
                                                     params.management_fee, block.volatility)
            row["merton_header_vol"] = pricing.merton_reference(params.spot, strike, maturity, params.rate,
                                                                params.management_fee, tb.extra["header_volatility"])
        return row

    with ThreadPoolExecutor(4) as pool:
        rows = list(pool.map(price, jobs))

    if mc_config is not None:
        # one simulation per block serves all strikes and maturities
        seen: dict[tuple, dict] = {}
        for (tb, bi, block, _, _), row in zip(jobs, rows):
            key = (block.hwm, block.volatility, block.excess_return, block.mean_return, block.management_fee,
                   block.incentive_fraction)
            if key not in seen:
                seen[key] = montecarlo.simulate_grid(block.params(tables.STRIKES[0], max(tables.MATURITIES)),
                                                     tables.STRIKES, tables.MATURITIES, "call", mc_config)
            stats = seen[key][(row["strike"], row["maturity"])]
            row["mc_price"] = stats.price_mean
            row["mc_std_error"] = stats.std_error
            row["mc_z"] = abs(row["price"] - stats.price_mean) / stats.std_error
    return rows


def _render_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k], k) for k in header])
    return buf.getvalue()


def _fmt(value, key):
    if isinstance(value, float):
        if key in ("error_estimate",):
            return f"{value:.3e}"
        if key in ("mc_z",):
            return f"{value:.2f}"
        if key in ("volatility", "excess_return", "mean_return", "maturity"):
            return f"{value:g}"
        return f"{value:.4f}"
    return value


def _matching_interpretation(rows) -> dict[str, float]:
    worst: dict[str, float] = {}
    for row in rows:
        worst[row["interpretation"]] = max(worst.get(row["interpretation"], 0.0), row["abs_diff"])
    return worst


def cmd_tables(args) -> int:
    mc_config = None
    if args.mc_check:
        mc_config = montecarlo.McConfig(paths=args.mc_paths, steps_per_year=args.mc_steps, seed=_seed(args.seed))
    rows = table_rows(args.table, _inversion_config(args), mc_config)
    if args.format == "csv":
        text = _render_csv(rows)
    else:
        tb = tables.table(args.table)
        doc: dict[str, Any] = {"table": args.table, "rows": rows}
        if args.table == 4:
            worst = _matching_interpretation(rows)
            doc["header_discrepancy"] = tables.TABLE4_NOTE
            doc["max_abs_diff_by_interpretation"] = worst
            doc["matching_interpretation"] = min(worst, key=worst.get)
        elif args.table == 5:
            doc["header_discrepancy"] = tb.note
        text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _kernel_gate(draws: int = 4, seed: int = 11) -> tuple[bool, float]:
    import numpy as np

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        params = random_params(rng)
        coeffs = derive_coefficients(params)
        handle = transforms.inception_call_transform(params, coeffs)
        weight = transforms.PayoffWeight(params.spot, params.strike, coeffs.b, coeffs.lam, coeffs.sigma)
        for shift in (0.5, 1.0, 5.0):
            theta = coeffs.validity_abscissa + shift
            closed = float(handle(theta).real)
            quad = transforms.excursion_kernel(weight, coeffs.lam, coeffs.rate + coeffs.alpha_plus,
                                               coeffs.rate + coeffs.alpha_minus, theta,
                                               points=weight.breakpoints, growth=weight.growth)
            worst = max(worst, abs(closed - quad) / abs(closed))
    return worst <= 1e-8, worst


def random_params(rng) -> FundParameters:
    """A random valid contract at inception (NAV on the mark)."""
    return FundParameters(
        spot=100.0,
        high_water_mark=100.0,
        strike=float(rng.uniform(70.0, 130.0)),
        maturity=float(rng.uniform(0.25, 1.0)),
        rate=float(rng.uniform(0.0, 0.06)),
        excess_return=float(rng.uniform(-0.05, 0.20)),
        management_fee=float(rng.uniform(0.0, 0.03)),
        incentive_fraction=float(rng.uniform(0.05, 0.25)),
        mean_return=float(rng.uniform(0.0, 0.30)),
        volatility=float(rng.uniform(0.1, 0.5)),
    )


def _parity_gate() -> tuple[bool, float]:
    worst_ratio = 0.0
    for block in tables.table(1).blocks:
        params = block.params(100.0, 1.0)
        call = pricing.price_call(params)
        put = pricing.price_put(params)
        fwd = pricing.price_forward(params)
        residual = call.value - put.value - (fwd.value - pricing.discounted_strike(params))
        bound = 2.0 * (call.error_estimate + put.error_estimate + fwd.error_estimate)
        worst_ratio = max(worst_ratio, abs(residual) / bound)
    return worst_ratio <= 1.0, worst_ratio


def _merton_gate() -> tuple[bool, float]:
    rows = table_rows(5)
    worst = max(abs(r["price"] - r["merton"]) for r in rows)
    return worst <= 1e-4, worst


def cmd_selftest(args) -> int:
    report = self_test(_inversion_config(args))
    gates = [("inversion known pairs", report.passed, f"max error {report.max_error:.3e} (tol {report.tolerance:.1e})")]
    ok, worst = _kernel_gate()
    gates.append(("kernel quadrature vs closed form", ok, f"max rel diff {worst:.3e} (tol 1e-8)"))
    ok, ratio = _parity_gate()
    gates.append(("call-put parity", ok, f"max residual / (2 x error estimates) {ratio:.3f}"))
    ok, worst = _merton_gate()
    gates.append(("fee-free Merton agreement", ok, f"max abs diff {worst:.3e} (tol 1e-4)"))
    for name, passed, detail in gates:
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(g[1] for g in gates) else EXIT_GATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwm-opt", description="Options on fund NAVs under a high-water-mark fee rule")
    parser.add_argument("--series-terms", type=int, default=InversionConfig.series_terms)
    parser.add_argument("--euler-terms", type=int, default=InversionConfig.euler_terms)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price one call, put or forward")
    _add_param_flags(p)
    p.add_argument("--put", action="store_true", help="price the put through parity")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("mc", help="Monte Carlo estimate")
    _add_param_flags(p)
    p.add_argument("--payoff", choices=[x.value for x in montecarlo.Payoff], default="call")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps-per-year", type=int, default=2000)
    p.add_argument("--seed", type=int, default=montecarlo.McConfig.seed)
    p.add_argument("--no-antithetic", action="store_true")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("tables", help="reproduce a benchmark table")
    p.add_argument("--table", type=int, choices=range(1, 6), required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--mc-check", action="store_true", help="append Monte Carlo estimates")
    p.add_argument("--mc-paths", type=int, default=200_000)
    p.add_argument("--mc-steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=montecarlo.McConfig.seed)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("selftest", help="run the numerical gates")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
