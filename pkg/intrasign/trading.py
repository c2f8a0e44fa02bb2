"""Threshold-band trading rule.

A prediction above +X goes long, below -X goes short, anything inside the band
keeps the previous position.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd

from intrasign.dataset import Samples, as_batch
from intrasign.errors import ConfigurationError, SizeError, StructureError, ValidationError
from intrasign.network import NetParams, predict

logger = logging.getLogger(__name__)

LONG = 1
SHORT = -1

PositionSeq = npt.NDArray[np.int8]


@dataclass(frozen=True)
class ThresholdRule:
    half_width: float

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width >= 0):
            raise ValidationError(f"band half-width must be >= 0, got {self.half_width}")


def _check_initial(initial: int):
    if initial not in (LONG, SHORT):
        raise ConfigurationError(f"initial position must be +1 or -1, got {initial}")


def positions(preds, rule: ThresholdRule, initial: int = LONG) -> PositionSeq:
    _check_initial(initial)
    preds = np.asarray(preds, dtype=np.float64)
    x = rule.half_width
    signal = pd.Series(np.where(preds > x, 1.0, np.where(preds < -x, -1.0, np.nan)))
    held = signal.ffill().fillna(float(initial))
    return held.to_numpy().astype(np.int8)


def rule_return(pos: PositionSeq, targets) -> float:
    """Sum of position times realised return."""
    pos = np.asarray(pos, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if pos.shape != targets.shape:
        raise StructureError(f"{pos.shape[0]} positions for {targets.shape[0]} targets")
    # same pairwise reduction as max_return, so |total| <= max_return holds exactly
    return float(np.sum(pos * targets))


def threshold_grid(grid_max: float = 0.02, grid_step: float = 0.0005) -> np.ndarray:
    """0, step, 2*step, ... up to grid_max inclusive."""
    if grid_step <= 0 or grid_max < 0:
        raise ConfigurationError(
            f"grid needs grid_step > 0 and grid_max >= 0, got {grid_step}, {grid_max}"
        )
    # floor with a small tolerance so grid_max is never exceeded
    count = int(np.floor(grid_max / grid_step + 1e-9))
    return np.round(np.arange(count + 1) * grid_step, 12)


def scan_thresholds(preds, targets, grid: Sequence[float], initial: int = LONG) -> np.ndarray:
    """Rule return of every grid candidate, in grid order."""
    return np.array(
        [rule_return(positions(preds, ThresholdRule(float(x)), initial), targets) for x in grid]
    )


def optimize_range(
    trained: NetParams, train: Samples, grid: Sequence[float], initial: int = LONG
) -> ThresholdRule:
    """Band half-width from ``grid`` with the best training rule return.

    Ties go to the smallest width.
    """
    grid = np.unique(np.asarray(grid, dtype=np.float64))
    if grid.size == 0:
        raise ConfigurationError("threshold grid is empty")
    batch = as_batch(train)
    if len(batch) == 0:
        raise SizeError("cannot optimize the band on an empty training set")
    scores = scan_thresholds(predict(trained, batch.inputs), batch.targets, grid, initial)
    # np.unique sorts ascending and argmax keeps the first maximum
    best = int(np.argmax(scores))
    logger.debug(f"Best band +/-{grid[best]} with training rule return {scores[best]:.6g}")
    return ThresholdRule(float(grid[best]))
