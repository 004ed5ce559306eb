"""Command-line entry point.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import Config, ConfigError, load_config

log = logging.getLogger("cellfree")

WORKERS_ENV = "CELLFREE_SIM_WORKERS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: output.dir)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override a config key (repeatable)")
    common.add_argument("--workers", type=int, metavar="N",
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    common.add_argument("--seed", type=int, metavar="U64", help="override experiment.master_seed")
    common.add_argument("--quiet", action="store_true", help="only print errors")

    parser = _Parser(prog="cellfree-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="evaluate experiment.modes x policies")
    sub.add_parser("compare-modes", parents=[common],
                   help="canonical vs proposed vs CoMP-JT at the configured power policy")
    sub.add_parser("sweep-alpha", parents=[common],
                   help="95%%-likely and median SE over experiment.alpha_grid")
    sub.add_parser("validate-oracle", parents=[common],
                   help="closed-form SINR vs Monte-Carlo link simulation")
    sub.add_parser("print-config", parents=[common], help="print the effective config")
    return parser


def _workers(args) -> int:
    if args.workers is not None:
        value, source = args.workers, "--workers"
    else:
        raw = os.environ.get(WORKERS_ENV)
        if raw is None:
            return 1
        try:
            value, source = int(raw), WORKERS_ENV
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigError(f"{source} must be >= 1")
    return value


def _resolve_config(args) -> Config:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"experiment.master_seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output.dir={args.out}")
    return load_config(args.config, overrides)


def _print_table(result, qs) -> None:
    for v in result.variants:
        table = result[v.name].table(qs)
        pu = " ".join(f"p{q:g}={x:.4f}" for q, x in table["per_user_se"].items())
        mn = " ".join(f"p{q:g}={x:.4f}" for q, x in table["min_se"].items())
        print(f"{v.name:<28} per-user SE: {pu} | min SE: {mn}")


def _dispatch(args, config: Config) -> int:
    from . import harness, oracle, results
    from .evaluation import sinr_terms

    out_dir = Path(config.output.dir)
    workers = _workers(args)
    qs = config.experiment.percentiles

    if args.command == "print-config":
        sys.stdout.write(config.dumps())
        return 0

    if args.command == "validate-oracle":
        state, serving, eta = oracle.default_instance()
        report = oracle.simulate_sinr(state, serving, eta, config.oracle.n_realizations,
                                      config.oracle.seed)
        rows = oracle.compare_terms(sinr_terms(state, eta), report)
        print(oracle.format_comparison(rows))
        failed = [r for r in rows if not r.ok]
        print(f"{len(rows) - len(failed)}/{len(rows)} terms within 3 standard errors "
              f"({report.n_realizations} realizations)")
        return 0 if not failed else 2

    if args.command == "run":
        result = harness.run_experiment(config, workers=workers)
        stem = "run"
    elif args.command == "compare-modes":
        result = harness.compare_modes(config, workers=workers)
        stem = "compare_modes"
    elif args.command == "sweep-alpha":
        rows, result = harness.sweep_alpha(config, workers=workers)
        results.write_sweep_csv(rows, out_dir / "sweep_alpha.csv")
        if not args.quiet:
            print(f"{'alpha':>8} {'95%-likely SE':>14} {'median SE':>10}")
            for r in rows:
                print(f"{r.alpha:>8g} {r.se_95_likely:>14.4f} {r.median_se:>10.4f}")
        stem = "sweep_alpha"
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown subcommand {args.command!r}")

    paths = results.write_experiment(result, out_dir, stem)
    if not args.quiet:
        if args.command != "sweep-alpha":
            _print_table(result, qs)
        for p in paths:
            print(f"wrote {p}")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s")
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return _dispatch(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
