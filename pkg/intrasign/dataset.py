"""Supervised pairs from a quote series.

Sample j takes nine consecutive log returns as inputs, their least-squares
trend as the tenth input, and the return right after the window as target.
The first half of the samples (rounded down) trains, the rest tests.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from intrasign.errors import SizeError, StructureError, ValidationError
from intrasign.market_data import QuoteSeries

logger = logging.getLogger(__name__)

WINDOW = 9
N_FEATURES = WINDOW + 1

_TREND_X = np.arange(1, WINDOW + 1, dtype=np.float64)
_TREND_CENTERED = _TREND_X - _TREND_X.mean()
_TREND_SXX = float(_TREND_CENTERED @ _TREND_CENTERED)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Log returns; entry t-1 is ln(p_t / p_{t-1})."""

    returns: np.ndarray
    ticker: str = ""

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=np.float64)
        if returns.ndim != 1:
            raise StructureError("returns must be one-dimensional")
        if not np.all(np.isfinite(returns)):
            raise ValidationError(f"{self.ticker}: non-finite return")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)

    def __len__(self):
        return len(self.returns)


@dataclass(frozen=True, eq=False)
class Sample:
    x: np.ndarray
    y: float


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A contiguous run of samples stored as an input matrix and target vector."""

    inputs: np.ndarray  # (n, 10)
    targets: np.ndarray  # (n,)

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != N_FEATURES:
            raise StructureError(f"inputs must have shape (n, {N_FEATURES}), got {inputs.shape}")
        if targets.shape != (inputs.shape[0],):
            raise StructureError(
                f"{inputs.shape[0]} input rows but targets of shape {targets.shape}"
            )
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ValidationError("samples must be finite")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self):
        return len(self.targets)

    def __iter__(self) -> Iterator[Sample]:
        for x, y in zip(self.inputs, self.targets):
            yield Sample(x, float(y))

    def __getitem__(self, index) -> Union[Sample, "SampleBatch"]:
        if isinstance(index, slice):
            return SampleBatch(self.inputs[index], self.targets[index])
        return Sample(self.inputs[index], float(self.targets[index]))


Samples = Union[SampleBatch, Sequence[Sample]]


def as_batch(samples: Samples) -> SampleBatch:
    """Accept a SampleBatch or any sequence of Sample."""
    if isinstance(samples, SampleBatch):
        return samples
    samples = list(samples)
    if not samples:
        return SampleBatch(np.empty((0, N_FEATURES)), np.empty(0))
    return SampleBatch(
        np.stack([np.asarray(s.x, dtype=np.float64) for s in samples]),
        np.array([s.y for s in samples], dtype=np.float64),
    )


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: SampleBatch
    train_len: int
    ticker: str = ""

    def __len__(self):
        return len(self.samples)

    @property
    def train(self) -> SampleBatch:
        return self.samples[: self.train_len]

    @property
    def test(self) -> SampleBatch:
        return self.samples[self.train_len :]


def compute_returns(quotes: QuoteSeries) -> ReturnSeries:
    if len(quotes) < 2:
        raise SizeError(f"{quotes.ticker}: need at least 2 quotes for a return")
    prices = quotes.prices
    return ReturnSeries(np.log(prices[1:] / prices[:-1]), ticker=quotes.ticker)


def ols_trend(window) -> float:
    """Least-squares slope of the window values against x = 1..9."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (WINDOW,):
        raise StructureError(f"trend window must hold {WINDOW} values, got {window.shape}")
    return float(_TREND_CENTERED @ window) / _TREND_SXX


def build_dataset(returns: ReturnSeries) -> Dataset:
    """Slide a nine-return window over the series.

    For R returns there are R - 9 samples: sample j has inputs r[j..j+8] plus
    their trend and target r[j+9].
    """
    r = returns.returns
    count = len(r) - WINDOW
    if count < 1:
        raise SizeError(
            f"{returns.ticker}: {len(r)} returns give no sample, need at least {WINDOW + 1}"
        )
    windows = sliding_window_view(r[:-1], WINDOW)
    trend = (windows @ _TREND_CENTERED) / _TREND_SXX
    inputs = np.column_stack([windows, trend])
    targets = r[WINDOW:]
    samples = SampleBatch(inputs, targets)
    dataset = Dataset(samples, train_len=count // 2, ticker=returns.ticker)
    logger.debug(
        f"{returns.ticker}: {count} samples, {dataset.train_len} train / "
        f"{count - dataset.train_len} test"
    )
    return dataset
