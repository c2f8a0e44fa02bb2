import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from intrasign import config
from intrasign.config import TomlConfigParser
from intrasign.errors import ConfigurationError, IntrasignError, ValidationError
from intrasign.harness import DEFAULT_CONFIG, add_experiment_options, load_experiment_config
from intrasign.harness import run_universe
from intrasign.harness.report import emit_report, read_run_file
from intrasign.market_data import load_metadata, write_quotes
from intrasign.market_data.synthetic import KINDS, generate, generate_universe

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2


def _series_params(args) -> dict:
    if args.kind == "sine":
        return {"base": args.base, "amplitude": args.amplitude, "period": args.period}
    if args.kind == "ar1":
        return {"base": args.base, "phi": args.phi, "sigma": args.sigma}
    return {"base": args.base, "sigma": args.sigma}


def _add_series_options(parser: argparse.ArgumentParser):
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--length", type=int, default=1000, help="Number of quotes")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--base", type=float, default=100.0, help="Starting/centre price")
    parser.add_argument("--amplitude", type=float, default=5.0, help="sine: price amplitude")
    parser.add_argument("--period", type=float, default=50.0, help="sine: period in quotes")
    parser.add_argument("--phi", type=float, default=0.3, help="ar1: autocorrelation")
    parser.add_argument("--sigma", type=float, default=0.002, help="ar1/gaussian: return noise")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intrasign",
        description="Intraday return sign forecasting with a 10-6-1 RPROP network.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="Train and evaluate every stock of a universe",
        epilog="Extra key.path=value arguments override config entries.",
    )
    run.add_argument("--config", type=Path, action="append", default=[], help="TOML config file")
    run.add_argument("--seed", type=int, help="Base seed")
    run.add_argument("--runs", type=int, help="Runs per stock")
    run.add_argument("--out", type=Path, help="Output directory")
    run.add_argument("--workers", type=int, help="Worker processes")
    run.add_argument("--no-progress", action="store_true", help="Hide progress bars")
    run.add_argument(
        "--dump-default-config",
        default="",
        help="Dump default config to specified file and exit.",
    )

    gen = sub.add_parser("gen", help="Write one synthetic quote file")
    _add_series_options(gen)
    gen.add_argument("--ticker", default=None, help="Defaults to the output file stem")
    gen.add_argument("--out", type=Path, required=True)

    universe = sub.add_parser(
        "gen-universe", help="Write a synthetic quote file for every stock of a metadata file"
    )
    _add_series_options(universe)
    universe.add_argument("--metadata", type=Path, required=True)
    universe.add_argument("--out-dir", type=Path, required=True)

    report = sub.add_parser("report", help="Rebuild tables from a runs.csv file")
    report.add_argument("--from", dest="run_file", type=Path, required=True)
    report.add_argument("--out", type=Path, required=True)
    return parser


def cmd_run(args, extra: list[str]) -> int:
    if args.dump_default_config:
        parser = TomlConfigParser(config_files=[DEFAULT_CONFIG])
        add_experiment_options(parser)
        with open(args.dump_default_config, "w") as f:
            parser.dump_default_config(f)
        logger.info(f"Dumped default config to {args.dump_default_config}")
        return EXIT_OK

    overrides = config.hoist_default(config.parse_dot_config(extra))
    flags = {"base_seed": args.seed, "runs": args.runs, "workers": args.workers}
    # flags win over config files and key=value overrides
    overrides.update({k: v for k, v in flags.items() if v is not None})
    if args.out is not None:
        overrides["out_dir"] = str(args.out)

    cfg = load_experiment_config(args.config, overrides)
    cfg.validate_paths()
    stocks = load_metadata(cfg.metadata)
    if not stocks:
        raise ConfigurationError(f"{cfg.metadata} lists no stocks")
    reports = run_universe(stocks, cfg, progress=not args.no_progress)
    emit_report(reports, cfg.out_dir)
    return EXIT_OK


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    ticker = args.ticker or args.out.stem
    series = generate(args.kind, args.length, rng, ticker=ticker, **_series_params(args))
    write_quotes(series, args.out)
    logger.info(f"Wrote {args.length} {args.kind} quotes to {args.out}")
    return EXIT_OK


def cmd_gen_universe(args) -> int:
    stocks = load_metadata(args.metadata)
    generate_universe(
        stocks, args.out_dir, args.kind, args.length, seed=args.seed, **_series_params(args)
    )
    return EXIT_OK


def cmd_report(args) -> int:
    emit_report(read_run_file(args.run_file), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if extra and args.command != "run":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")

    try:
        if args.command == "run":
            return cmd_run(args, extra)
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "gen-universe":
            return cmd_gen_universe(args)
        return cmd_report(args)
    except (ValidationError, ConfigurationError) as e:
        logger.error(str(e))
        return EXIT_INVALID
    except (IntrasignError, OSError) as e:
        logger.error(str(e), exc_info=args.verbose)
        return EXIT_FAILURE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
