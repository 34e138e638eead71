"""Command-line driver: ``dicke-ldos <experiment> [--config file] [flags]``.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
4 analysis window outside the converged part of the spectrum.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..spectral import EigensolverError, UnconvergedWindowError
from .config import KINDS, ConfigError, ExperimentConfig
from .experiments import execute

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_UNCONVERGED = 0, 2, 3, 4

# flag -> config key; value type is parsed by the config layer
FLAGS = {
    "--lambda0": "lambda0",
    "--delta-lambda": "delta_lambda",
    "--delta-range": "delta_range",
    "--lambdas": "lambdas",
    "--lambda-range": "lambda_range",
    "--variant": "variant",
    "--variants": "variants",
    "--omega": "omega",
    "--omega0": "omega0",
    "--j": "j",
    "--n-max": "n_max",
    "--sector": "sector",
    "--window": "window",
    "--n-times": "n_times",
    "--t-max": "t_max",
    "--bin-width": "bin_width",
    "--span": "span",
    "--tol": "tol",
    "--probe": "probe",
    "--fit-cutoff": "fit_cutoff",
    "--out": "out",
    "--cache": "cache",
    "--workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dicke-ldos", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="kind", required=True, metavar="experiment")
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="flat key = value experiment file")
        for flag, key in FLAGS.items():
            p.add_argument(flag, dest=key, default=None, metavar=key.upper())
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {key: getattr(args, key) for key in FLAGS.values()}
    cfg = ExperimentConfig.from_mapping(overrides, base=cfg)
    cfg.kind = args.kind
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"dicke-ldos: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        session = execute(cfg)
    except UnconvergedWindowError as exc:
        print(f"dicke-ldos: {exc}; raise n_max or move the window", file=sys.stderr)
        return EXIT_UNCONVERGED
    except (EigensolverError, FloatingPointError, ArithmeticError) as exc:
        where = f" at level {exc.index}" if getattr(exc, "index", None) is not None else ""
        print(f"dicke-ldos: numerical failure{where} "
              f"(variant={cfg.variant}, lambda0={cfg.lambda0}, sector={cfg.sector}): {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {len(session.files)} files to {session.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
