import numpy as np
import pytest

from meanfield.losses import (Dataset, Loss, empirical_risk, loss_derivative, loss_second_derivative,
                              loss_value, objective, objective_gradient, risk_gradient_weights)
from meanfield.model import RELU, Ensemble, predict, smooth

from .conftest import central_diff, random_instance, rel_err


def test_loss_values():
    assert loss_value(Loss.SQUARE, 1.0, 0.5) == 0.125
    assert loss_value(Loss.LOGISTIC, 1.0, 0.0) == pytest.approx(np.log(2.0), rel=1e-15)
    assert 0.0 <= loss_value(Loss.LOGISTIC, 1.0, 50.0) < 1e-20
    assert loss_value("logistic", -1.0, -50.0) < 1e-20


def test_loss_derivatives_match_finite_differences():
    for loss in Loss:
        for y in (-1.0, 1.0, 0.3):
            for h in np.linspace(-4, 4, 9):
                fd = (loss_value(loss, y, h + 1e-6) - loss_value(loss, y, h - 1e-6)) / 2e-6
                assert loss_derivative(loss, y, h) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_convexity_on_grid():
    grid = np.linspace(-30, 30, 601)
    for loss in Loss:
        for y in (-1.0, 1.0):
            assert np.all(loss_second_derivative(loss, y, grid) >= 0)


def test_logistic_derivative_stays_finite():
    assert np.isfinite(loss_derivative(Loss.LOGISTIC, 1.0, -1e4))
    assert loss_derivative(Loss.LOGISTIC, 1.0, -1e4) == pytest.approx(-1.0)


def test_risk_gradient_weights_formulas(rng):
    ys = rng.choice([-1.0, 1.0], size=6)
    h = rng.standard_normal(6)
    np.testing.assert_allclose(risk_gradient_weights(Loss.SQUARE, ys, h), (h - ys) / 6)
    np.testing.assert_allclose(risk_gradient_weights(Loss.LOGISTIC, ys, h),
                               -ys / (6 * (1 + np.exp(ys * h))), rtol=1e-14)


def test_weights_are_first_variation_of_risk(rng):
    ys = rng.standard_normal(5)
    h = rng.standard_normal(5)
    for loss in Loss:
        g = risk_gradient_weights(loss, ys, h)
        base = np.mean(loss_value(loss, ys, h))
        for i in range(5):
            errs = []
            for eps in (1e-3, 5e-4):
                hp = h.copy()
                hp[i] += eps
                errs.append(abs(np.mean(loss_value(loss, ys, hp)) - base - eps * g[i]))
            # linearization error is O(eps^2): halving eps quarters it
            assert errs[1] < 0.3 * errs[0] + 1e-15


def test_empirical_risk_examples():
    ens = Ensemble([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    X = np.array([[1.0, 0.0], [0.0, 2.0]])
    ds = Dataset(X, predict(ens, X))
    assert empirical_risk(ens, ds, Loss.SQUARE) == 0.0

    dead = Ensemble([[1.0, -1.0, -1.0]])
    ds2 = Dataset([[1.0, 1.0], [2.0, 1.0]], [1.0, -1.0])
    assert empirical_risk(dead, ds2, Loss.SQUARE) == 0.5


def test_ridge_increases_risk(rng):
    ens, ds = random_instance(rng)
    base = empirical_risk(ens, ds, Loss.SQUARE)
    assert empirical_risk(ens, ds, Loss.SQUARE, ridge=0.1) > base
    with pytest.raises(ValueError):
        empirical_risk(ens, ds, Loss.SQUARE, ridge=-1.0)


def test_objective_gradient_interpolating_is_zero():
    ens = Ensemble([[1.0, 1.0, 0.0], [-1.0, 0.5, 1.0]])
    X = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    ds = Dataset(X, predict(ens, X))
    np.testing.assert_array_equal(objective_gradient(ens, ds, Loss.SQUARE), np.zeros((2, 3)))


def test_objective_gradient_hand_computed():
    # w = (2, 1, 0.5), x = (1, 2), y = 1: b.x = 2, h = 4, g = 3 -> 3 * (2, 2*1, 2*2)
    ens = Ensemble([[2.0, 1.0, 0.5]])
    ds = Dataset([[1.0, 2.0]], [1.0])
    np.testing.assert_allclose(objective_gradient(ens, ds, Loss.SQUARE), [[6.0, 6.0, 12.0]])
    fd = central_diff(lambda W: objective(W, ds, Loss.SQUARE), ens.W)
    np.testing.assert_allclose(objective_gradient(ens, ds, Loss.SQUARE), fd, rtol=1e-8)


@pytest.mark.parametrize("loss", list(Loss))
def test_objective_gradient_finite_differences(rng, loss):
    act = smooth(0.2)
    for _ in range(10):
        ens, ds = random_instance(rng)
        if loss is Loss.LOGISTIC:
            ds = Dataset(ds.xs, np.sign(ds.ys) + (ds.ys == 0))
        fd = ens.m * central_diff(lambda W: objective(W, ds, loss, act), ens.W)
        assert rel_err(objective_gradient(ens, ds, loss, act), fd) < 1e-5


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2))
    assert Dataset([[1.0, 2.0]], [1.0]).d == 2
