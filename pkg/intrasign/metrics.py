"""Profitability measures of one trained model and their aggregation over runs."""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from intrasign.errors import SizeError, StructureError, ValidationError
from intrasign.trading import LONG, ThresholdRule, positions, rule_return

logger = logging.getLogger(__name__)


def _vector(values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise StructureError(f"{what} must be one-dimensional")
    if values.size == 0:
        raise SizeError(f"{what} is empty")
    return values


def _paired(preds, targets):
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise StructureError(f"{preds.size} predictions for {targets.size} targets")
    return preds, targets


def bh_train(targets) -> float:
    """Buy & hold return over the training half."""
    return float(np.sum(_vector(targets, "training targets")))


def bh_test(targets) -> float:
    return float(np.sum(_vector(targets, "test targets")))


def sign_prediction_ratio(preds, targets) -> float:
    """Share of periods where sign(prediction) == sign(target); zero is its own sign."""
    preds, targets = _paired(preds, targets)
    if targets.size == 0:
        raise SizeError("no test samples")
    return float(np.count_nonzero(np.sign(preds) == np.sign(targets)) / targets.size)


def max_return(targets) -> float:
    """What a perfect forecaster earns: sum of absolute returns."""
    return float(np.sum(np.abs(_vector(targets, "test targets"))))


def total_return_rawsign(preds, targets) -> float:
    preds, targets = _paired(preds, targets)
    return float(np.sum(np.sign(preds) * targets))


def ideal_profit_ratio(total: float, maximum: float) -> float:
    if maximum < 0:
        raise ValidationError(f"max return cannot be negative, got {maximum}")
    if maximum == 0:
        return 0.0
    return total / maximum


def sharpe_ratio(total_returns) -> Optional[float]:
    """Mean over sample std (n-1) of per-run total returns.

    Returns None when every run returned the same amount.
    """
    totals = np.asarray(total_returns, dtype=np.float64)
    if totals.size < 2:
        raise SizeError(f"Sharpe ratio needs at least 2 runs, got {totals.size}")
    # np.std of identical values can come out as rounding noise instead of 0
    if np.ptp(totals) == 0:
        return None
    std = float(np.std(totals, ddof=1))
    return float(np.mean(totals)) / std


@dataclass(frozen=True)
class RunMetrics:
    bh_train: float
    bh_test: float
    return_rule_train: float
    sign_prediction: float
    total_return_rule: float
    total_return_rawsign: float
    max_return: float
    ideal_profit_ratio: float
    threshold: float

    def as_dict(self) -> dict:
        return asdict(self)


METRIC_NAMES = tuple(f.name for f in fields(RunMetrics))


def run_metrics(
    train_preds,
    train_targets,
    test_preds,
    test_targets,
    rule: ThresholdRule,
    initial: int = LONG,
) -> RunMetrics:
    """All measures of one trained network.

    Both halves start from ``initial``; the test half does not inherit the
    final training position.
    """
    train_preds, train_targets = _paired(train_preds, train_targets)
    test_preds, test_targets = _paired(test_preds, test_targets)
    best = max_return(test_targets)
    total = rule_return(positions(test_preds, rule, initial), test_targets)
    return RunMetrics(
        bh_train=bh_train(train_targets),
        bh_test=bh_test(test_targets),
        return_rule_train=rule_return(positions(train_preds, rule, initial), train_targets),
        sign_prediction=sign_prediction_ratio(test_preds, test_targets),
        total_return_rule=total,
        total_return_rawsign=total_return_rawsign(test_preds, test_targets),
        max_return=best,
        ideal_profit_ratio=ideal_profit_ratio(total, best),
        threshold=rule.half_width,
    )


@dataclass(frozen=True)
class AggregateMetrics:
    mean: dict
    std: dict
    sharpe_ratio: Optional[float]
    runs: int

    @property
    def single_run(self) -> bool:
        return self.runs == 1


def aggregate(runs: Sequence[RunMetrics]) -> AggregateMetrics:
    """Mean and sample standard deviation of every measure over the runs.

    A single run reports zero deviations and no Sharpe ratio.
    """
    if not runs:
        raise SizeError("nothing to aggregate")
    table = pd.DataFrame([r.as_dict() for r in runs], columns=list(METRIC_NAMES))
    mean = {name: float(table[name].mean()) for name in METRIC_NAMES}
    if len(runs) == 1:
        std = {name: 0.0 for name in METRIC_NAMES}
        sharpe = None
    else:
        std = {name: float(table[name].std(ddof=1)) for name in METRIC_NAMES}
        sharpe = sharpe_ratio(table["total_return_rule"].to_numpy())
    return AggregateMetrics(mean=mean, std=std, sharpe_ratio=sharpe, runs=len(runs))
