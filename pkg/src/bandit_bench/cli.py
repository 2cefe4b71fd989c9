"""Command-line front end: run / sweep / ingest / export-fixture.

Exit codes: 0 success, 1 configuration error, 2 I/O error.  All error detail
goes to stderr.  Seeds default to the fixed constant in the config schema, so
bare invocations are reproducible.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .core import hardness_alpha, save_instance
from .harness import ConfigError
from .ingest import load_ratings, means_to_instance, ratings_to_means

DEFAULT_INGEST_HORIZON = 100_000


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bandit-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True, help="TOML or JSON experiment config")
    run.add_argument("--out", default=None, help="output directory (default: config 'out' or ./runs)")
    run.add_argument("--seed", type=int, default=None, help="override the config base_seed")
    run.add_argument("--threads", type=int, default=None, help="worker processes (default: BANDIT_BENCH_THREADS or 1)")

    sweep = sub.add_parser("sweep", help="run the config once per alpha_grid value")
    sweep.add_argument("--config", required=True, help="TOML or JSON experiment config")
    sweep.add_argument("--out", default=None, help="output directory (default: config 'out' or ./runs)")
    sweep.add_argument("--seed", type=int, default=None, help="override the config base_seed")
    sweep.add_argument("--threads", type=int, default=None, help="worker processes (default: BANDIT_BENCH_THREADS or 1)")

    ingest = sub.add_parser("ingest", help="convert a ratings CSV into an instance fixture")
    ingest.add_argument("--ratings", required=True, help="CSV with header id,stars1,stars2,stars3")
    ingest.add_argument("--out", required=True, help="output instance JSON path")
    ingest.add_argument("--threshold", type=float, default=0.8, help="promotion threshold (default: 0.8)")
    ingest.add_argument("--horizon", type=int, default=DEFAULT_INGEST_HORIZON,
                        help=f"horizon used to report the hardness level (default: {DEFAULT_INGEST_HORIZON})")

    export = sub.add_parser("export-fixture", help="write generator output as fixture JSON")
    export.add_argument("--config", required=True, help="config whose instance spec to export")
    export.add_argument("--out", required=True, help="output file (or directory for families)")
    return parser


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("BANDIT_BENCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"BANDIT_BENCH_THREADS must be an integer, got {env!r}")
    return 1


def _cmd_run(args, sweep: bool) -> int:
    config = harness.load_config(args.config)
    if args.seed is not None:
        config.base_seed = args.seed
    threads = _resolve_threads(args.threads)
    result = (harness.sweep_alpha if sweep else harness.run_experiment)(config, threads)
    out_dir = args.out or config.out or "runs"
    csv_path, summary_path = harness.write_results(result, out_dir)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    _print_table(result)
    return 0


def _print_table(result) -> None:
    print(f"{'policy':<20} {'alpha':>6} {'final mean':>12} {'final std':>12}")
    for e in result.entries:
        print(f"{e.policy:<20} {e.alpha:>6.3f} {e.final_mean:>12.2f} {e.final_std:>12.2f}")


def _cmd_ingest(args) -> int:
    table = load_ratings(args.ratings)
    means, m = ratings_to_means(table, threshold=args.threshold)
    instance = means_to_instance(means)
    save_instance(instance, args.out)
    alpha = hardness_alpha(instance.n, m, args.horizon)
    if table.dropped:
        print(f"dropped {table.dropped} item(s) with zero ratings", file=sys.stderr)
    print(f"n={instance.n} m={m} alpha={alpha:.4f}")
    print(f"wrote {args.out}")
    return 0


def _cmd_export(args) -> int:
    config = harness.load_config(args.config)
    paths = harness.export_fixture(config.instance, config.horizon, args.out)
    for path in paths:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        if args.command == "run":
            return _cmd_run(args, sweep=False)
        if args.command == "sweep":
            return _cmd_run(args, sweep=True)
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "export-fixture":
            return _cmd_export(args)
        parser.print_usage(sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
