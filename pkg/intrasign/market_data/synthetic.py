"""Synthetic quote series for experiments without real tick data."""

import logging
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from intrasign.errors import ConfigurationError, SizeError
from intrasign.market_data import QuoteSeries, StockMeta, write_quotes

logger = logging.getLogger(__name__)

KINDS = ("sine", "ar1", "gaussian")
DEFAULT_START = "2015-09-16T14:00:00+00:00"


def sine_prices(length: int, base=100.0, amplitude=5.0, period=50.0) -> np.ndarray:
    """p_t = base + amplitude * sin(2*pi*t / period), t = 0..length-1"""
    t = np.arange(length, dtype=np.float64)
    return base + amplitude * np.sin(2.0 * np.pi * t / period)


def ar1_prices(
    length: int, rng: np.random.Generator, phi=0.3, sigma=0.002, base=100.0
) -> np.ndarray:
    """Prices whose log returns follow r_t = phi * r_{t-1} + sigma * eps_t."""
    if not -1.0 < phi < 1.0:
        raise ConfigurationError(f"AR(1) coefficient must lie in (-1, 1), got {phi}")
    eps = rng.standard_normal(length - 1)
    returns = np.empty(length - 1)
    # start from the stationary distribution
    prev = rng.standard_normal() * sigma / np.sqrt(1.0 - phi * phi)
    for t, e in enumerate(eps):
        prev = phi * prev + sigma * e
        returns[t] = prev
    return _from_returns(base, returns)


def gaussian_prices(
    length: int, rng: np.random.Generator, sigma=0.002, base=100.0
) -> np.ndarray:
    """Prices with i.i.d. N(0, sigma^2) log returns."""
    return _from_returns(base, rng.normal(0.0, sigma, size=length - 1))


def _from_returns(base: float, returns: np.ndarray) -> np.ndarray:
    return base * np.exp(np.concatenate(([0.0], np.cumsum(returns))))


def generate(
    kind: str,
    length: int,
    rng: np.random.Generator,
    ticker="SYNTH",
    start=DEFAULT_START,
    interval_seconds=60,
    **params,
) -> QuoteSeries:
    """Build a synthetic QuoteSeries on a regular one-minute grid.

    Args:
        kind: one of "sine", "ar1", "gaussian".
        length: number of quotes.
        params: forwarded to the price generator (amplitude, period, phi,
            sigma, base).
    """
    if length < 2:
        raise SizeError(f"Need at least 2 quotes, got {length}")
    if kind == "sine":
        prices = sine_prices(length, **params)
    elif kind == "ar1":
        prices = ar1_prices(length, rng, **params)
    elif kind == "gaussian":
        prices = gaussian_prices(length, rng, **params)
    else:
        raise ConfigurationError(f"Unknown series kind {kind!r}, expected one of {KINDS}")
    timestamps = pd.date_range(
        start=pd.Timestamp(start), periods=length, freq=pd.Timedelta(seconds=interval_seconds)
    )
    return QuoteSeries(ticker, timestamps, prices)


def generate_universe(
    stocks: Iterable[StockMeta],
    out_dir,
    kind: str,
    length: int,
    seed: int = 0,
    **params,
) -> list[Path]:
    """Write one synthetic quote file per stock, ``<out_dir>/<ticker>.csv``.

    Stock i (in the given order) draws from ``default_rng(seed + i)``.
    """
    out_dir = Path(out_dir)
    written = []
    for i, stock in enumerate(stocks):
        series = generate(kind, length, np.random.default_rng(seed + i), ticker=stock.ticker, **params)
        written.append(write_quotes(series, out_dir / f"{stock.ticker}.csv"))
    logger.info(f"Wrote {len(written)} {kind} quote files to {out_dir}")
    return written
