"""Experiment orchestration: many seeded trainings per stock, aggregated.

Every (stock, run) pair is an independent job. Jobs are built up front in
(ticker, run) order, may execute on a process pool, and their results are
collected in that same order, so the output never depends on scheduling.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from intrasign.config import Config, TomlConfigParser
from intrasign.dataset import Dataset, build_dataset, compute_returns
from intrasign.errors import ConfigurationError, RunFailure
from intrasign.market_data import QuoteSeries, StockMeta, load_quotes
from intrasign.metrics import AggregateMetrics, RunMetrics, aggregate, run_metrics
from intrasign.network import predict, save_params
from intrasign.rprop import RpropConfig, train
from intrasign.trading import LONG, SHORT, optimize_range, threshold_grid

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).parent / "config.toml"


def _integer(value, key: str) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigurationError(f"{key} must be an integer, got {value!r}")
    return int(value)


def add_experiment_options(parser: TomlConfigParser):
    """Declare every key the harness reads."""
    parser.add_argument("base_seed", default=0, help="Seed of run 0; run r uses base_seed + r")
    parser.add_argument("runs", default=30, help="Independent trainings per stock")
    parser.add_argument("workers", default=1, help="Worker processes for (stock, run) jobs")
    parser.add_argument("out_dir", default="results", help="Directory for report files")
    parser.add_argument(
        "snapshot_dir", default=None, help="Write final weights of every run here"
    )

    data = parser.add_argument_group("data", help="Input files")
    data.add_argument("metadata", default=None, help="Stock metadata CSV")
    data.add_argument("quotes_dir", default=None, help="Directory of <ticker>.csv quote files")

    rprop = parser.add_argument_group("rprop", help="Resilient propagation")
    defaults = RpropConfig()
    rprop.add_argument("initial_update", defaults.initial_update, "Initial step size")
    rprop.add_argument("min_update", defaults.min_update, "Lower bound of step sizes")
    rprop.add_argument("max_update", defaults.max_update, "Upper bound of step sizes")
    rprop.add_argument("increase_factor", defaults.increase_factor, "Step growth on equal signs")
    rprop.add_argument("decrease_factor", defaults.decrease_factor, "Step shrink on sign flips")
    rprop.add_argument("max_iterations", defaults.max_iterations, "Full-batch iterations per run")

    trading = parser.add_argument_group("trading", help="Threshold band")
    trading.add_argument("grid_max", 0.02, "Largest band half-width tried")
    trading.add_argument("grid_step", 0.0005, "Spacing of band half-widths tried")
    trading.add_argument("initial_position", LONG, "Position before the first signal (1 or -1)")
    return parser


@dataclass(frozen=True)
class ExperimentConfig:
    base_seed: int = 0
    runs: int = 30
    workers: int = 1
    rprop: RpropConfig = field(default_factory=RpropConfig)
    grid_max: float = 0.02
    grid_step: float = 0.0005
    initial_position: int = LONG
    metadata: Optional[Path] = None
    quotes_dir: Optional[Path] = None
    out_dir: Path = Path("results")
    snapshot_dir: Optional[Path] = None

    def __post_init__(self):
        if int(self.runs) != self.runs or self.runs < 1:
            raise ConfigurationError(f"runs must be at least 1, got {self.runs}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if self.initial_position not in (LONG, SHORT):
            raise ConfigurationError(
                f"initial_position must be 1 or -1, got {self.initial_position}"
            )
        # raises on a bad grid
        threshold_grid(self.grid_max, self.grid_step)

    @property
    def grid(self) -> np.ndarray:
        return threshold_grid(self.grid_max, self.grid_step)

    def seed(self, run: int) -> int:
        return self.base_seed + run

    def validate_paths(self):
        """Check that every referenced input exists."""
        if self.metadata is None or not Path(self.metadata).is_file():
            raise ConfigurationError(f"metadata file not found: {self.metadata}")
        if self.quotes_dir is None or not Path(self.quotes_dir).is_dir():
            raise ConfigurationError(f"quotes directory not found: {self.quotes_dir}")

    @classmethod
    def from_config(cls, conf: Config) -> "ExperimentConfig":
        def optional_path(value):
            return Path(value) if value else None

        try:
            rprop = RpropConfig(
                initial_update=float(conf.rprop.initial_update),
                min_update=float(conf.rprop.min_update),
                max_update=float(conf.rprop.max_update),
                increase_factor=float(conf.rprop.increase_factor),
                decrease_factor=float(conf.rprop.decrease_factor),
                max_iterations=_integer(conf.rprop.max_iterations, "rprop.max_iterations"),
            )
            return cls(
                base_seed=_integer(conf.base_seed, "base_seed"),
                runs=_integer(conf.runs, "runs"),
                workers=_integer(conf.workers, "workers"),
                rprop=rprop,
                grid_max=float(conf.trading.grid_max),
                grid_step=float(conf.trading.grid_step),
                initial_position=_integer(
                    conf.trading.initial_position, "trading.initial_position"
                ),
                metadata=optional_path(conf.data.metadata),
                quotes_dir=optional_path(conf.data.quotes_dir),
                out_dir=Path(conf.out_dir),
                snapshot_dir=optional_path(conf.snapshot_dir),
            )
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid configuration value: {e}") from e


def load_experiment_config(
    config_files: Sequence[Path] = (), overrides: Optional[dict] = None
) -> ExperimentConfig:
    """Packaged defaults, then ``config_files`` in order, then ``overrides``."""
    parser = TomlConfigParser(
        config_files=[DEFAULT_CONFIG, *config_files], override_configs=overrides
    )
    add_experiment_options(parser)
    return ExperimentConfig.from_config(parser.parse_args())


@dataclass(frozen=True)
class StockReport:
    ticker: str
    runs: tuple[RunMetrics, ...]
    seeds: tuple[int, ...]
    summary: AggregateMetrics
    meta: Optional[StockMeta] = None

    @property
    def group(self) -> str:
        return self.meta.percentile_group if self.meta else ""


@dataclass(frozen=True)
class _Job:
    ticker: str
    run: int
    seed: int
    dataset: Dataset
    rprop: RpropConfig
    grid: np.ndarray
    initial: int
    snapshot_path: Optional[Path] = None


def _run_job(job: _Job) -> RunMetrics:
    try:
        train_half, test_half = job.dataset.train, job.dataset.test
        params = train(train_half, job.rprop, np.random.default_rng(job.seed))
        rule = optimize_range(params, train_half, job.grid, job.initial)
        if job.snapshot_path is not None:
            save_params(params, job.snapshot_path)
        return run_metrics(
            predict(params, train_half.inputs),
            train_half.targets,
            predict(params, test_half.inputs),
            test_half.targets,
            rule,
            job.initial,
        )
    except Exception as e:
        raise RunFailure(job.ticker, job.run, e) from e


def _execute(jobs: list[_Job], workers: int, progress: bool) -> list[RunMetrics]:
    if workers > 1 and len(jobs) > 1:
        return process_map(
            _run_job,
            jobs,
            max_workers=workers,
            chunksize=1,
            desc="runs",
            disable=not progress,
        )
    return [_run_job(job) for job in tqdm(jobs, desc="runs", disable=not progress)]


def _jobs_for(dataset: Dataset, cfg: ExperimentConfig) -> list[_Job]:
    grid = cfg.grid
    jobs = []
    for run in range(cfg.runs):
        snapshot = None
        if cfg.snapshot_dir is not None:
            snapshot = Path(cfg.snapshot_dir) / dataset.ticker / f"run_{run:03d}.txt"
        jobs.append(
            _Job(
                ticker=dataset.ticker,
                run=run,
                seed=cfg.seed(run),
                dataset=dataset,
                rprop=cfg.rprop,
                grid=grid,
                initial=cfg.initial_position,
                snapshot_path=snapshot,
            )
        )
    return jobs


def _prepare(quotes: QuoteSeries) -> Dataset:
    dataset = build_dataset(compute_returns(quotes))
    logger.info(
        f"{quotes.ticker}: {len(quotes)} quotes, {len(dataset)} samples "
        f"({dataset.train_len} train / {len(dataset) - dataset.train_len} test)"
    )
    return dataset


def _report(ticker, runs, cfg: ExperimentConfig, meta=None) -> StockReport:
    return StockReport(
        ticker=ticker,
        runs=tuple(runs),
        seeds=tuple(cfg.seed(r) for r in range(len(runs))),
        summary=aggregate(runs),
        meta=meta,
    )


def run_stock(
    quotes: QuoteSeries,
    cfg: ExperimentConfig,
    meta: Optional[StockMeta] = None,
    progress: bool = False,
) -> StockReport:
    """Train ``cfg.runs`` networks on one stock and aggregate their metrics."""
    dataset = _prepare(quotes)
    runs = _execute(_jobs_for(dataset, cfg), cfg.workers, progress)
    report = _report(quotes.ticker, runs, cfg, meta)
    logger.info(
        f"{quotes.ticker}: mean sign prediction {report.summary.mean['sign_prediction']:.4f} "
        f"over {cfg.runs} runs"
    )
    return report


def quote_path(quotes_dir, ticker: str) -> Path:
    return Path(quotes_dir) / f"{ticker}.csv"


def run_universe(
    stocks: Sequence[StockMeta], cfg: ExperimentConfig, progress: bool = False
) -> list[StockReport]:
    """Run every stock of the universe; reports come back in ``stocks`` order.

    All quote files are located and turned into datasets before any training
    starts.
    """
    cfg.validate_paths()
    missing = [s.ticker for s in stocks if not quote_path(cfg.quotes_dir, s.ticker).is_file()]
    if missing:
        raise ConfigurationError(
            f"no quote file in {cfg.quotes_dir} for: {', '.join(missing)}"
        )
    datasets = {
        s.ticker: _prepare(load_quotes(quote_path(cfg.quotes_dir, s.ticker), ticker=s.ticker))
        for s in stocks
    }

    jobs = [job for ticker in sorted(datasets) for job in _jobs_for(datasets[ticker], cfg)]
    logger.info(f"Running {len(jobs)} jobs for {len(stocks)} stocks on {cfg.workers} worker(s)")
    results = _execute(jobs, cfg.workers, progress)

    by_ticker: dict[str, list[RunMetrics]] = {}
    for job, metrics in zip(jobs, results):
        by_ticker.setdefault(job.ticker, []).append(metrics)
    return [_report(s.ticker, by_ticker[s.ticker], cfg, s) for s in stocks]
