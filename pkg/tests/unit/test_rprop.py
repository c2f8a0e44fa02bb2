import numpy as np
import pytest

from intrasign.dataset import N_FEATURES, SampleBatch
from intrasign.errors import ConfigurationError, SizeError, StructureError
from intrasign.network import PARAM_COUNT, Gradient, init_params, loss, output_act
from intrasign.rprop import RpropConfig, RpropState, rprop_step, rprop_update, train

CFG = RpropConfig()


def _state(step, prev_grad, prev_delta=0.0):
    return RpropState(np.array([step]), np.array([prev_grad]), np.array([prev_delta]))


class TestConfig:
    def test_defaults(self):
        assert CFG.initial_update == 0.01
        assert CFG.min_update == 1e-6
        assert CFG.max_update == 50.0
        assert CFG.increase_factor == 1.2
        assert CFG.decrease_factor == 0.5
        assert CFG.max_iterations == 3000

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"min_update": 0.1},
            {"max_update": 0.001},
            {"increase_factor": 1.0},
            {"decrease_factor": 1.5},
            {"max_iterations": -1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            RpropConfig(**kwargs)


class TestUpdate:
    def test_same_sign_grows_step(self):
        w, state = rprop_update(np.array([0.5]), _state(0.01, 1.0, -0.01), np.array([1.0]), CFG)
        assert state.step_sizes[0] == pytest.approx(0.012, abs=1e-15)
        assert w[0] == pytest.approx(0.5 - 0.012, abs=1e-15)
        assert state.prev_grad[0] == 1.0

    def test_sign_flip_reverts(self):
        w, state = rprop_update(np.array([0.49]), _state(0.01, 1.0, -0.01), np.array([-1.0]), CFG)
        assert state.step_sizes[0] == 0.005
        assert w[0] == pytest.approx(0.5, abs=1e-15)
        assert state.prev_grad[0] == 0.0

    def test_after_flip_no_adaptation(self):
        w, state = rprop_update(np.array([0.49]), _state(0.01, 1.0, -0.01), np.array([-1.0]), CFG)
        w, state = rprop_update(w, state, np.array([-1.0]), CFG)
        assert state.step_sizes[0] == 0.005
        assert w[0] == pytest.approx(0.505, abs=1e-15)

    def test_zero_gradient(self):
        start = np.random.default_rng(0).uniform(-1, 1, PARAM_COUNT)
        state = RpropState.initial(CFG)
        w, new_state = rprop_update(start, state, np.zeros(PARAM_COUNT), CFG)
        assert np.array_equal(w, start)
        assert np.array_equal(new_state.step_sizes, state.step_sizes)

    def test_zero_gradient_is_fixed_point(self):
        w = np.linspace(-1, 1, PARAM_COUNT)
        state = RpropState.initial(CFG)
        for _ in range(20):
            w, state = rprop_update(w, state, np.zeros(PARAM_COUNT), CFG)
        assert np.array_equal(w, np.linspace(-1, 1, PARAM_COUNT))

    def test_inputs_untouched(self):
        w = np.array([0.3])
        state = _state(0.01, 1.0, -0.01)
        rprop_update(w, state, np.array([-2.0]), CFG)
        assert w[0] == 0.3
        assert state.step_sizes[0] == 0.01

    def test_shape_mismatch(self):
        with pytest.raises(StructureError):
            rprop_update(np.zeros(3), RpropState.initial(CFG, size=3), np.zeros(4), CFG)

    def test_step_on_network_params(self):
        params = init_params(np.random.default_rng(1))
        grad = Gradient.from_vector(np.ones(PARAM_COUNT))
        new, state = rprop_step(params, RpropState.initial(CFG), grad, CFG)
        assert np.allclose(new.to_vector(), params.to_vector() - 0.01)
        assert state.step_sizes.shape == (PARAM_COUNT,)


def test_randomized_contract():
    """Bounds, growth, the flip rule and the zero-gradient rule hold along a
    long random trajectory."""
    cfg = RpropConfig(max_update=0.5)
    rng = np.random.default_rng(123)
    w = rng.uniform(-1, 1, PARAM_COUNT)
    state = RpropState.initial(cfg)
    for _ in range(10_000):
        grad = rng.normal(size=PARAM_COUNT) * (rng.random(PARAM_COUNT) > 0.1)
        new_w, new_state = rprop_update(w, state, grad, cfg)

        steps = new_state.step_sizes
        assert np.all((steps >= cfg.min_update) & (steps <= cfg.max_update))
        assert np.all(np.abs(new_w - w) <= cfg.max_update + 1e-9)
        flip = state.prev_grad * grad < 0
        expected = np.maximum(state.step_sizes[flip] * cfg.decrease_factor, cfg.min_update)
        assert np.array_equal(steps[flip], expected)
        assert np.array_equal(new_w[flip], w[flip] - state.prev_delta[flip])
        same = state.prev_grad * grad > 0
        grown = np.minimum(state.step_sizes[same] * cfg.increase_factor, cfg.max_update)
        assert np.array_equal(steps[same], grown)
        assert np.array_equal(new_w[same], w[same] - np.sign(grad[same]) * grown)
        idle = state.prev_grad * grad == 0
        assert np.array_equal(steps[idle], state.step_sizes[idle])
        assert np.array_equal(new_w[grad == 0], w[grad == 0])

        w, state = new_w, new_state


def test_minimizes_quadratic():
    w = np.array([1.0])
    state = RpropState.initial(CFG, size=1)
    for _ in range(200):
        w, state = rprop_update(w, state, 2 * w, CFG)
        if abs(w[0]) < 1e-4:
            break
    assert abs(w[0]) < 1e-4


def _tanh_data(n=120, a=0.5, seed=0):
    rng = np.random.default_rng(seed)
    inputs = rng.normal(0, 1, (n, N_FEATURES))
    return SampleBatch(inputs, output_act(a * inputs[:, 0]))


class TestTrain:
    def test_deterministic(self):
        data = _tanh_data(40)
        cfg = RpropConfig(max_iterations=25)
        assert train(data, cfg, np.random.default_rng(9)) == train(
            data, cfg, np.random.default_rng(9)
        )

    def test_zero_iterations_returns_initial_params(self):
        data = _tanh_data(10)
        params = train(data, RpropConfig(max_iterations=0), np.random.default_rng(3))
        assert params == init_params(np.random.default_rng(3))

    def test_iteration_count(self):
        seen = []
        cfg = RpropConfig(max_iterations=7)
        train(_tanh_data(10), cfg, np.random.default_rng(0), on_iteration=lambda i, p: seen.append(i))
        assert seen == list(range(7))

    def test_loss_decreases(self):
        data = _tanh_data()
        cfg = RpropConfig(max_iterations=100)
        improved = 0
        for seed in range(30):
            initial = loss(init_params(np.random.default_rng(seed)), data)
            final = loss(train(data, cfg, np.random.default_rng(seed)), data)
            improved += final < initial
        assert improved >= 29

    def test_empty_training_set(self):
        empty = SampleBatch(np.empty((0, N_FEATURES)), np.empty(0))
        with pytest.raises(SizeError):
            train(empty, CFG, np.random.default_rng(0))
