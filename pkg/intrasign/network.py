"""The 10-6-1 feedforward network.

Hidden units use the logistic function, the output unit the bipolar sigmoid,
so predictions lie in (-1, 1). Training minimises the mean squared error of
the predicted return.

Weights have one canonical flat order shared with the optimizer: the hidden
weights unit by unit (bias b_{0,i} first, then b_{1,i}..b_{10,i}), followed by
the output weights a_0..a_6.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from intrasign.dataset import N_FEATURES, Samples, as_batch
from intrasign.errors import ParseError, SizeError, StructureError, ValidationError

logger = logging.getLogger(__name__)

N_HIDDEN = 6
HIDDEN_SHAPE = (N_FEATURES + 1, N_HIDDEN)
OUTPUT_SHAPE = (N_HIDDEN + 1,)
HIDDEN_COUNT = HIDDEN_SHAPE[0] * HIDDEN_SHAPE[1]
PARAM_COUNT = HIDDEN_COUNT + OUTPUT_SHAPE[0]


def hidden_act(n):
    """Logistic sigmoid, values in (0, 1)."""
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-np.asarray(n, dtype=np.float64)))


def output_act(n):
    """Bipolar sigmoid 2 / (1 + e^{-2n}) - 1, values in (-1, 1)."""
    # identical to tanh, which does not overflow for large |n|
    return np.tanh(n)


@dataclass(frozen=True, eq=False)
class Weights:
    """``hidden[k, i]`` is b_{k,i} (k = 0 is the bias), ``output[i]`` is a_i."""

    hidden: np.ndarray
    output: np.ndarray

    def __post_init__(self):
        hidden = np.array(self.hidden, dtype=np.float64)
        output = np.array(self.output, dtype=np.float64)
        if hidden.shape != HIDDEN_SHAPE or output.shape != OUTPUT_SHAPE:
            raise StructureError(
                f"expected hidden {HIDDEN_SHAPE} and output {OUTPUT_SHAPE}, "
                f"got {hidden.shape} and {output.shape}"
            )
        hidden.setflags(write=False)
        output.setflags(write=False)
        object.__setattr__(self, "hidden", hidden)
        object.__setattr__(self, "output", output)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.hidden.T.ravel(), self.output])

    @classmethod
    def from_vector(cls, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (PARAM_COUNT,):
            raise StructureError(f"expected {PARAM_COUNT} weights, got shape {vector.shape}")
        hidden = vector[:HIDDEN_COUNT].reshape(N_HIDDEN, N_FEATURES + 1).T
        return cls(hidden, vector[HIDDEN_COUNT:])

    @classmethod
    def zeros(cls):
        return cls(np.zeros(HIDDEN_SHAPE), np.zeros(OUTPUT_SHAPE))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.hidden, other.hidden) and np.array_equal(
            self.output, other.output
        )

    __hash__ = None


class NetParams(Weights):
    def __post_init__(self):
        super().__post_init__()
        if not (np.all(np.isfinite(self.hidden)) and np.all(np.isfinite(self.output))):
            raise ValidationError("network weights must be finite")


class Gradient(Weights):
    pass


def init_params(rng: np.random.Generator) -> NetParams:
    """All 73 weights drawn uniformly from [-1, 1]."""
    return NetParams.from_vector(rng.uniform(-1.0, 1.0, size=PARAM_COUNT))


def _with_bias(inputs: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(len(inputs)), inputs])


def _hidden_layer(params: NetParams, inputs: np.ndarray) -> np.ndarray:
    return hidden_act(_with_bias(inputs) @ params.hidden)


def predict(params: NetParams, inputs) -> np.ndarray:
    """Network outputs for every row of an (n, 10) input matrix."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != N_FEATURES:
        raise StructureError(f"inputs must have shape (n, {N_FEATURES}), got {inputs.shape}")
    hidden = _hidden_layer(params, inputs)
    return output_act(params.output[0] + hidden @ params.output[1:])


def forward(params: NetParams, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (N_FEATURES,):
        raise StructureError(f"x must hold {N_FEATURES} values, got shape {x.shape}")
    return float(predict(params, x[None, :])[0])


def _nonempty(samples: Samples):
    batch = as_batch(samples)
    if len(batch) == 0:
        raise SizeError("loss needs at least one sample")
    return batch


def loss(params: NetParams, samples: Samples) -> float:
    """Mean squared error of the predictions."""
    batch = _nonempty(samples)
    residual = predict(params, batch.inputs) - batch.targets
    return float(np.mean(residual * residual))


def gradient(params: NetParams, samples: Samples) -> Gradient:
    """Exact derivative of ``loss`` with respect to every weight (backpropagation)."""
    batch = _nonempty(samples)
    n = len(batch)
    biased = _with_bias(batch.inputs)
    hidden = hidden_act(biased @ params.hidden)
    out = output_act(params.output[0] + hidden @ params.output[1:])

    # d loss / d output pre-activation
    delta_out = (2.0 / n) * (out - batch.targets) * (1.0 - out * out)
    grad_output = np.concatenate([[delta_out.sum()], hidden.T @ delta_out])
    delta_hidden = np.outer(delta_out, params.output[1:]) * hidden * (1.0 - hidden)
    grad_hidden = biased.T @ delta_hidden
    return Gradient(grad_hidden, grad_output)


def save_params(params: NetParams, path) -> Path:
    """Snapshot the weights, one decimal per line in canonical order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "".join(f"{float(w)!r}\n" for w in params.to_vector())
    path.write_text(text, encoding="utf-8")
    return path


def load_params(path) -> NetParams:
    path = Path(path)
    values = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"malformed weight {line!r}", line=n, path=path) from None
    if len(values) != PARAM_COUNT:
        raise StructureError(f"{path}: expected {PARAM_COUNT} weights, found {len(values)}")
    return NetParams.from_vector(values)
