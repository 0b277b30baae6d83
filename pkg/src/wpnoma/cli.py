"""Command-line front-end for the sweep experiments.

Subcommands radius, pmf, throughput, ablation, and all.  Flag values
resolve as CLI > WPNOMA_* environment variable > built-in default;
model parameters come from --config (flat YAML) or the built-in
baseline.  Exit codes: 0 success, 2 configuration error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from .analysis import RadiusMode, RateMode
from .experiments import default_spec, run_experiment
from .geometry import DEFAULT_POINT_BUDGET
from .params import ParamError, SystemParams, baseline_params, read_params_file

log = logging.getLogger(__name__)

_ENV_PREFIX = "WPNOMA_"


def _env(name: str) -> Optional[str]:
    return os.environ.get(_ENV_PREFIX + name)


def _parse_floats(text: str) -> tuple[float, ...]:
    vals = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    if not vals:
        raise ValueError("empty list")
    return vals


def _parse_grid(text: str) -> tuple[float, ...]:
    """start:stop:step, inclusive of stop up to float fuzz."""
    start, stop, step = (float(tok) for tok in text.split(":"))
    if step <= 0 or stop < start:
        raise ValueError("grid must have positive step and stop >= start")
    out = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-12:
            break
        out.append(round(v, 12))
        k += 1
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpnoma",
        description="Wireless-powered uplink NOMA sweeps: analytic and Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=_env("CONFIG"),
                        help="flat YAML file of model parameters")
    common.add_argument("--trials", type=int,
                        default=int(_env("TRIALS") or 50_000),
                        help="Monte Carlo trials per sweep point")
    common.add_argument("--seed", type=int, default=int(_env("SEED") or 0),
                        help="campaign master seed")
    common.add_argument("--out", default=_env("OUT") or "results",
                        help="output directory for CSV and manifest files")
    common.add_argument("--mode", choices=[m.value for m in RadiusMode],
                        default=_env("MODE"),
                        help="selection-radius mode (default per experiment)")
    common.add_argument("--rate-mode", choices=[m.value for m in RateMode],
                        default=_env("RATE_MODE") or RateMode.LogSumRate.value)
    common.add_argument("--threads", type=int, default=int(_env("THREADS") or 1))
    common.add_argument("--point-budget", type=float,
                        default=float(_env("POINT_BUDGET") or DEFAULT_POINT_BUDGET),
                        help="soft cap on expected points per realization")
    common.add_argument("--radius-trials", type=int,
                        default=int(_env("RADIUS_TRIALS") or 10_000),
                        help="trial budget per exact-mode radius evaluation")
    common.add_argument("--lambdas", type=_parse_floats, default=None,
                        help="comma-separated BS densities [1/km^2]")
    common.add_argument("--t-values", type=_parse_floats, default=None,
                        help="comma-separated harvest fractions")
    common.add_argument("--t-grid", type=_parse_grid, default=None,
                        help="harvest fraction grid start:stop:step")
    common.add_argument("--verbose", action="store_true")
    for name in ("radius", "pmf", "throughput", "ablation", "all"):
        sub.add_parser(name, parents=[common])
    return parser


def _resolve_params(args: argparse.Namespace) -> SystemParams:
    if args.config:
        return read_params_file(args.config)
    return baseline_params()


def _spec_kwargs(args: argparse.Namespace) -> dict:
    if args.t_values is not None and args.t_grid is not None:
        raise ParamError("--t-values and --t-grid are mutually exclusive")
    return dict(
        lambda_values=args.lambdas,
        t_values=args.t_values if args.t_values is not None else args.t_grid,
        radius_mode=None if args.mode is None else RadiusMode(args.mode),
        rate_mode=RateMode(args.rate_mode),
        trials=args.trials,
        master_seed=args.seed,
        threads=args.threads,
        output_dir=args.out,
        point_budget=args.point_budget,
        radius_trials=args.radius_trials,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        base = _resolve_params(args)
        kwargs = _spec_kwargs(args)
        names = (
            ["radius", "pmf", "throughput", "ablation"]
            if args.experiment == "all" else [args.experiment]
        )
        specs = [default_spec(name, base, **kwargs) for name in names]
    except (ParamError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        for spec in specs:
            csv_path, manifest_path = run_experiment(spec)
            print(f"{spec.experiment}: wrote {csv_path} and {manifest_path}")
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        log.exception("experiment failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
