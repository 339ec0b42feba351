"""Command-line interface.

    stable-exit run --config cfg.json --out results/ [--workers N] [--seed S]
    stable-exit predict --d D --alpha A --beta B
    stable-exit validate --config cfg.json

Exit codes: 0 success, 2 configuration error, 3 aborted run.
"""

import argparse
import dataclasses
import sys

from .backend import backend_name
from .estimators import critical_exponent
from .experiments import (
    ConfigError,
    RunAborted,
    default_workers,
    emit_outputs,
    load_config,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="stable-exit",
        description="Exit-time and harmonic-measure experiments for the "
                    "isotropic stable process in parabola-shaped regions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: config, then "
                          "STABLE_EXIT_WORKERS, then CPU count)")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed")

    pred = sub.add_parser("predict", help="print the predicted exponents")
    pred.add_argument("--d", type=int, required=True)
    pred.add_argument("--alpha", type=float, required=True)
    pred.add_argument("--beta", type=float, required=True)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    return parser


def _cmd_predict(args) -> int:
    try:
        p0 = critical_exponent(args.d, args.alpha, args.beta)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    ab = args.alpha * args.beta
    print(f"p0                  = {p0:.12g}")
    print(f"alpha*beta*p0       = {ab * p0:.12g}")
    print(f"alpha*beta*(p0 - 1) = {ab * (p0 - 1.0):.12g}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: {cfg.kind} experiment, {len(cfg.scales)} scale(s), "
          f"n={cfg.n_per_scale} per scale, seed={cfg.seed}")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
            if not 0 <= cfg.seed < 2**64:
                raise ConfigError("seed: must be an unsigned 64-bit integer")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else (
        cfg.workers if cfg.workers is not None else default_workers())
    try:
        record = run_experiment(cfg, workers=workers)
        paths = emit_outputs(record, args.out)
    except RunAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except (ValueError, RuntimeError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    print(f"wrote {paths['results']} ({cfg.kind}, backend={backend_name()}, "
          f"workers={workers}, {record['wall_time_seconds']:.1f}s)")
    if "fit" in record and record["fit"] is not None:
        f = record["fit"]
        print(f"fit slope = {f['slope']:.4f} +/- {f['stderr']:.4f} "
              f"(predicted {f['predicted']:.4f})")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "predict":
        return _cmd_predict(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
