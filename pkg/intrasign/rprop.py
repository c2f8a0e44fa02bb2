"""Resilient propagation with weight backtracking.

Every weight keeps its own step size. When the partial derivative keeps its
sign the step grows, when it flips the step shrinks and the last change of
that weight is undone. Only the sign of the derivative is used, never its
magnitude.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from intrasign.dataset import Samples, as_batch
from intrasign.errors import ConfigurationError, SizeError, StructureError
from intrasign.network import Gradient, NetParams, PARAM_COUNT, gradient, init_params, loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RpropConfig:
    initial_update: float = 0.01
    min_update: float = 1e-6
    max_update: float = 50.0
    increase_factor: float = 1.2
    decrease_factor: float = 0.5
    max_iterations: int = 3000

    def __post_init__(self):
        if not 0 < self.min_update <= self.initial_update <= self.max_update:
            raise ConfigurationError(
                "rprop updates must satisfy 0 < min_update <= initial_update <= max_update, got "
                f"{self.min_update}, {self.initial_update}, {self.max_update}"
            )
        if not 0 < self.decrease_factor < 1 < self.increase_factor:
            raise ConfigurationError(
                "rprop factors must satisfy 0 < decrease_factor < 1 < increase_factor, got "
                f"{self.decrease_factor}, {self.increase_factor}"
            )
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ConfigurationError(f"max_iterations must be a count, got {self.max_iterations}")


@dataclass(frozen=True, eq=False)
class RpropState:
    step_sizes: np.ndarray
    prev_grad: np.ndarray
    prev_delta: np.ndarray = field(default=None)

    def __post_init__(self):
        steps = np.asarray(self.step_sizes, dtype=np.float64)
        prev_grad = np.asarray(self.prev_grad, dtype=np.float64)
        prev_delta = (
            np.zeros_like(steps)
            if self.prev_delta is None
            else np.asarray(self.prev_delta, dtype=np.float64)
        )
        if not (steps.ndim == 1 and steps.shape == prev_grad.shape == prev_delta.shape):
            raise StructureError(
                f"state shapes disagree: {steps.shape}, {prev_grad.shape}, {prev_delta.shape}"
            )
        object.__setattr__(self, "step_sizes", steps)
        object.__setattr__(self, "prev_grad", prev_grad)
        object.__setattr__(self, "prev_delta", prev_delta)

    @classmethod
    def initial(cls, cfg: RpropConfig, size: int = PARAM_COUNT) -> "RpropState":
        return cls(np.full(size, cfg.initial_update), np.zeros(size), np.zeros(size))


def rprop_update(
    weights: np.ndarray, state: RpropState, grad: np.ndarray, cfg: RpropConfig
) -> tuple[np.ndarray, RpropState]:
    """One update on flat weight and gradient vectors.

    Returns the new weights and state; the inputs are left untouched.
    """
    weights = np.asarray(weights, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not weights.shape == grad.shape == state.step_sizes.shape:
        raise StructureError(
            f"weights {weights.shape}, gradient {grad.shape} and state "
            f"{state.step_sizes.shape} must have the same shape"
        )

    agreement = state.prev_grad * grad
    grow = agreement > 0
    flip = agreement < 0

    steps = state.step_sizes.copy()
    steps[grow] = np.minimum(steps[grow] * cfg.increase_factor, cfg.max_update)
    steps[flip] = np.maximum(steps[flip] * cfg.decrease_factor, cfg.min_update)

    delta = -np.sign(grad) * steps
    # undo the previous change of every weight whose derivative flipped
    delta[flip] = -state.prev_delta[flip]
    # a zeroed derivative makes the next iteration skip the adaptation
    next_grad = np.where(flip, 0.0, grad)

    return weights + delta, RpropState(steps, next_grad, delta)


def rprop_step(
    params: NetParams, state: RpropState, grad: Gradient, cfg: RpropConfig
) -> tuple[NetParams, RpropState]:
    weights, state = rprop_update(params.to_vector(), state, grad.to_vector(), cfg)
    return NetParams.from_vector(weights), state


def train(
    data: Samples,
    cfg: RpropConfig,
    rng: np.random.Generator,
    on_iteration: Optional[Callable[[int, NetParams], None]] = None,
) -> NetParams:
    """Initialise the network from ``rng`` and run exactly ``max_iterations``
    full-batch RPROP iterations on ``data``."""
    batch = as_batch(data)
    if len(batch) == 0:
        raise SizeError("cannot train on an empty training set")

    params = init_params(rng)
    state = RpropState.initial(cfg)
    logger.debug(f"Initial training MSE {loss(params, batch):.6g}")
    for iteration in range(int(cfg.max_iterations)):
        params, state = rprop_step(params, state, gradient(params, batch), cfg)
        if on_iteration is not None:
            on_iteration(iteration, params)
    logger.debug(f"Final training MSE {loss(params, batch):.6g} after {cfg.max_iterations} iterations")
    return params
