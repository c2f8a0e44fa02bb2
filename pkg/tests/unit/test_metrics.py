import math

import numpy as np
import pytest

from intrasign.errors import SizeError, StructureError, ValidationError
from intrasign.metrics import (
    METRIC_NAMES,
    RunMetrics,
    aggregate,
    bh_test,
    bh_train,
    ideal_profit_ratio,
    max_return,
    run_metrics,
    sharpe_ratio,
    sign_prediction_ratio,
    total_return_rawsign,
)
from intrasign.trading import LONG, SHORT, ThresholdRule


def _run(total, spr=0.5, threshold=0.001):
    return RunMetrics(
        bh_train=0.01,
        bh_test=-0.02,
        return_rule_train=0.03,
        sign_prediction=spr,
        total_return_rule=total,
        total_return_rawsign=total / 2,
        max_return=0.5,
        ideal_profit_ratio=total / 0.5,
        threshold=threshold,
    )


class TestBuyAndHold:
    def test_zero(self):
        assert bh_train(np.zeros(5)) == 0.0

    def test_sum(self):
        assert bh_test([0.01, -0.01, 0.02]) == pytest.approx(0.02, abs=1e-15)

    def test_compensated_summation(self):
        targets = np.random.default_rng(0).normal(0, 0.01, 100)
        assert bh_train(targets) == pytest.approx(math.fsum(targets), abs=1e-12)

    def test_empty(self):
        with pytest.raises(SizeError):
            bh_train([])
        with pytest.raises(SizeError):
            bh_test([])


class TestSignPrediction:
    def test_all_match(self):
        targets = np.array([0.1, -0.2, 0.3])
        assert sign_prediction_ratio(targets, targets) == 1.0

    def test_all_mismatch(self):
        targets = np.array([0.1, -0.2, 0.3])
        assert sign_prediction_ratio(-targets, targets) == 0.0

    def test_zero_target_needs_zero_prediction(self):
        assert sign_prediction_ratio([0.0, 0.1], [0.0, 0.0]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(StructureError):
            sign_prediction_ratio([0.1], [0.1, 0.2])


def test_max_return():
    assert max_return([0.01, -0.02, 0.0]) == pytest.approx(0.03, abs=1e-15)


def test_total_return_rawsign():
    assert total_return_rawsign([0.5, -0.1, 0.0], [0.01, 0.02, 0.03]) == pytest.approx(
        -0.01, abs=1e-15
    )


class TestIdealProfitRatio:
    def test_ratio(self):
        assert ideal_profit_ratio(0.01, 0.04) == 0.25

    def test_zero_maximum(self):
        assert ideal_profit_ratio(0.0, 0.0) == 0.0

    def test_negative_maximum(self):
        with pytest.raises(ValidationError):
            ideal_profit_ratio(0.0, -1.0)


class TestSharpe:
    def test_two_runs(self):
        assert sharpe_ratio([0.0, 0.02]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_identical_runs(self):
        assert sharpe_ratio([0.013] * 30) is None

    def test_single_run(self):
        with pytest.raises(SizeError):
            sharpe_ratio([0.01])

    def test_sample_std(self):
        totals = np.random.default_rng(1).normal(0.01, 0.005, 30)
        expected = totals.mean() / totals.std(ddof=1)
        assert sharpe_ratio(totals) == pytest.approx(expected, rel=1e-12)


class TestRunMetrics:
    def test_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            n_train, n_test = rng.integers(1, 20, 2)
            train_preds, train_targets = rng.normal(0, 0.01, (2, n_train))
            test_preds, test_targets = rng.normal(0, 0.01, (2, n_test))
            x = float(rng.choice([0.0, 0.0005, 0.005, 0.01]))
            initial = int(rng.choice([LONG, SHORT]))
            m = run_metrics(
                train_preds, train_targets, test_preds, test_targets, ThresholdRule(x), initial
            )

            held, total = initial, 0.0
            for p, t in zip(test_preds, test_targets):
                held = 1 if p > x else -1 if p < -x else held
                total += held * t
            best = float(np.abs(test_targets).sum())

            assert m.total_return_rule == pytest.approx(total, abs=1e-12)
            assert m.max_return == best
            assert abs(m.total_return_rule) <= m.max_return
            assert abs(m.total_return_rawsign) <= m.max_return
            assert 0.0 <= m.sign_prediction <= 1.0
            assert -1.0 <= m.ideal_profit_ratio <= 1.0
            assert m.ideal_profit_ratio == m.total_return_rule / m.max_return
            assert m.threshold == x

    def test_test_half_starts_from_initial(self):
        rule = ThresholdRule(0.01)
        # the training half ends short, the test half opens inside the band
        m = run_metrics([-0.5], [0.1], [0.0], [0.2], rule, LONG)
        assert m.return_rule_train == pytest.approx(-0.1)
        assert m.total_return_rule == pytest.approx(0.2)

    def test_names(self):
        assert METRIC_NAMES[0] == "bh_train"
        assert "total_return_rawsign" in METRIC_NAMES
        assert len(METRIC_NAMES) == 9


class TestAggregate:
    def test_mean_and_std(self):
        runs = [_run(0.0, spr=0.5), _run(0.02, spr=0.7)]
        summary = aggregate(runs)
        assert summary.runs == 2
        assert summary.mean["total_return_rule"] == pytest.approx(0.01)
        assert summary.mean["sign_prediction"] == pytest.approx(0.6)
        assert summary.std["total_return_rule"] == pytest.approx(0.02 / math.sqrt(2))
        assert summary.std["bh_train"] == 0.0
        assert summary.sharpe_ratio == pytest.approx(1 / math.sqrt(2))

    def test_single_run(self):
        summary = aggregate([_run(0.01)])
        assert summary.single_run
        assert summary.sharpe_ratio is None
        assert all(v == 0.0 for v in summary.std.values())

    def test_constant_total_return(self):
        assert aggregate([_run(0.01)] * 3).sharpe_ratio is None

    def test_empty(self):
        with pytest.raises(SizeError):
            aggregate([])


def test_sign_prediction_enumeration():
    assert sign_prediction_ratio([0.1, -0.1, 0.1, 0.1], [0.2, 0.2, -0.2, 0.3]) == 0.5


def test_degenerate_market():
    assert max_return([0.0, 0.0]) == 0.0
    assert total_return_rawsign([0.0, 0.0], [0.01, -0.02]) == 0.0


def test_max_return_bounds_buy_and_hold():
    targets = np.random.default_rng(3).normal(0, 0.01, 40)
    assert max_return(targets) >= abs(bh_test(targets))


def test_perfect_forecast():
    targets = np.random.default_rng(4).normal(0, 0.01, 25)
    best = max_return(targets)
    assert total_return_rawsign(targets, targets) == best
    m = run_metrics(targets, targets, targets, targets, ThresholdRule(0.0))
    assert m.total_return_rule == best
    assert m.ideal_profit_ratio == 1.0


def test_perfect_forecast_is_exact_on_long_series():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        targets = rng.normal(0, 0.01, 496)
        m = run_metrics(targets, targets, targets, targets, ThresholdRule(0.0))
        assert m.total_return_rule == m.max_return
        assert m.total_return_rawsign == m.max_return
        assert m.ideal_profit_ratio == 1.0


def test_ideal_profit_ratio_division():
    assert ideal_profit_ratio(0.0052, 0.11) == pytest.approx(0.0472727272727, abs=1e-12)


def test_sharpe_is_odd():
    totals = np.array([0.01, 0.03, -0.005, 0.02])
    assert sharpe_ratio(-totals) == -sharpe_ratio(totals)


def test_band_that_never_binds():
    rng = np.random.default_rng(5)
    preds = rng.choice([-1, 1], 30) * rng.uniform(0.02, 0.5, 30)
    targets = rng.normal(0, 0.01, 30)
    m = run_metrics(preds, targets, preds, targets, ThresholdRule(0.01))
    assert m.total_return_rule == pytest.approx(m.total_return_rawsign, abs=1e-15)
