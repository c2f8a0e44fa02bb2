from dataclasses import replace

import numpy as np
import pytest

from intrasign.dataset import build_dataset, compute_returns
from intrasign.errors import ConfigurationError
from intrasign.harness import (
    ExperimentConfig,
    load_experiment_config,
    quote_path,
    run_stock,
    run_universe,
)
from intrasign.market_data import StockMeta, load_quotes, write_quotes
from intrasign.market_data.synthetic import generate
from intrasign.metrics import run_metrics
from intrasign.network import load_params, predict
from intrasign.rprop import RpropConfig, train
from intrasign.trading import optimize_range

STOCKS = [
    StockMeta("VALE3", "Materials", 25871589.0, "75-100"),
    StockMeta("USIM5", "Materials", 2164639.0, "0-25"),
]


@pytest.fixture
def universe(tmp_path):
    meta = tmp_path / "meta.csv"
    meta.write_text("ticker,sector,market_cap_kusd,percentile\n")
    quotes_dir = tmp_path / "quotes"
    for i, stock in enumerate(STOCKS):
        series = generate("ar1", 120, np.random.default_rng(i), ticker=stock.ticker)
        write_quotes(series, quote_path(quotes_dir, stock.ticker))
    return ExperimentConfig(
        runs=3,
        rprop=RpropConfig(max_iterations=5),
        metadata=meta,
        quotes_dir=quotes_dir,
        out_dir=tmp_path / "out",
    )


def _quotes(ticker="PETR3", seed=0):
    return generate("gaussian", 80, np.random.default_rng(seed), ticker=ticker)


def test_load_experiment_config_defaults():
    cfg = load_experiment_config()
    assert cfg.runs == 30
    assert cfg.base_seed == 0
    assert cfg.rprop == RpropConfig()
    assert len(cfg.grid) == 41
    assert cfg.initial_position == 1
    assert cfg.metadata is None


def test_load_experiment_config_layers(tmp_path):
    config_file = tmp_path / "exp.toml"
    config_file.write_text('runs = 4\n[rprop]\nmax_iterations = 10\n[data]\nmetadata = "m.csv"\n')
    cfg = load_experiment_config([config_file], {"rprop": {"max_iterations": 20}, "base_seed": 7})
    assert cfg.runs == 4
    assert cfg.rprop.max_iterations == 20
    assert cfg.base_seed == 7
    assert cfg.seed(2) == 9
    assert str(cfg.metadata) == "m.csv"


@pytest.mark.parametrize(
    "overrides",
    [
        {"runs": 0},
        {"workers": 0},
        {"trading": {"initial_position": 0}},
        {"trading": {"grid_step": 0}},
        {"rprop": {"increase_factor": 0.9}},
        {"runs": "many"},
        {"runs": 2.5},
        {"runs": True},
        {"base_seed": 0.5},
        {"workers": 1.5},
        {"rprop": {"max_iterations": 10.9}},
        {"trading": {"initial_position": 1.7}},
    ],
)
def test_load_experiment_config_rejects(overrides):
    with pytest.raises(ConfigurationError):
        load_experiment_config(overrides=overrides)


def test_load_experiment_config_integral_floats():
    cfg = load_experiment_config(overrides={"runs": 3.0, "rprop": {"max_iterations": 10.0}})
    assert cfg.runs == 3
    assert cfg.rprop.max_iterations == 10


def test_validate_paths(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(metadata=tmp_path / "none.csv", quotes_dir=tmp_path).validate_paths()


class TestRunStock:
    def test_report_shape(self, universe):
        report = run_stock(_quotes(), universe)
        assert report.ticker == "PETR3"
        assert len(report.runs) == 3
        assert report.seeds == (0, 1, 2)
        assert report.summary.runs == 3
        assert report.group == ""

    def test_run_matches_direct_pipeline(self, universe):
        quotes = _quotes()
        report = run_stock(quotes, replace(universe, base_seed=10))
        dataset = build_dataset(compute_returns(quotes))
        params = train(dataset.train, universe.rprop, np.random.default_rng(11))
        rule = optimize_range(params, dataset.train, universe.grid)
        expected = run_metrics(
            predict(params, dataset.train.inputs),
            dataset.train.targets,
            predict(params, dataset.test.inputs),
            dataset.test.targets,
            rule,
        )
        assert report.seeds[1] == 11
        assert report.runs[1] == expected

    def test_deterministic(self, universe):
        assert run_stock(_quotes(), universe) == run_stock(_quotes(), universe)

    def test_single_run(self, universe):
        report = run_stock(_quotes(), replace(universe, runs=1))
        assert report.summary.single_run
        assert report.summary.sharpe_ratio is None

    def test_snapshots(self, universe, tmp_path):
        cfg = replace(universe, snapshot_dir=tmp_path / "snap", runs=2)
        run_stock(_quotes(), cfg)
        for run in range(2):
            load_params(tmp_path / "snap" / "PETR3" / f"run_{run:03d}.txt")


class TestRunUniverse:
    def test_reports_follow_metadata_order(self, universe):
        reports = run_universe(STOCKS, universe)
        assert [r.ticker for r in reports] == ["VALE3", "USIM5"]
        assert reports[1].meta == STOCKS[1]
        assert reports[1].group == "0-25"
        assert all(len(r.runs) == 3 for r in reports)

    def test_same_as_single_stock(self, universe):
        reports = run_universe(STOCKS, universe)
        quotes = load_quotes(quote_path(universe.quotes_dir, "USIM5"))
        assert reports[1].runs == run_stock(quotes, universe).runs

    def test_missing_quote_file(self, universe):
        stocks = [*STOCKS, StockMeta("ABEV3", "Consumer Staples", 93084295.0, "75-100")]
        with pytest.raises(ConfigurationError, match="ABEV3"):
            run_universe(stocks, universe)
