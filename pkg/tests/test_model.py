import numpy as np
import pytest

from meanfield.model import RELU, Activation, Ensemble, init_ensemble, predict, psi_eval, psi_grad, smooth

from .conftest import central_diff, rel_err


def test_psi_eval_examples():
    w = np.array([2.0, 1.0, 0.0])
    assert psi_eval(w, [3.0, 0.0]) == 6.0
    assert psi_eval(2 * w, [3.0, 0.0]) == 24.0
    assert psi_eval([1.0, 1.0, 0.0], [-1.0, 0.0]) == 0.0


def test_psi_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        psi_eval([1.0, 1.0, 0.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        psi_grad([1.0, 1.0, 0.0], [1.0])


def test_psi_grad_examples():
    np.testing.assert_array_equal(psi_grad([2.0, 1.0, 0.0], [3.0, 0.0]), [3.0, 6.0, 0.0])
    np.testing.assert_array_equal(psi_grad([1.0, 1.0, 0.0], [-1.0, 0.0]), [0.0, 0.0, 0.0])


def test_relu_subgradient_at_zero():
    # b.x = 0 exactly: sigma'(0) = 0 and sigma(0) = 0
    np.testing.assert_array_equal(psi_grad([1.0, 1.0, 1.0], [1.0, -1.0]), [0.0, 0.0, 0.0])


def test_psi_grad_finite_differences_smooth(rng):
    act = smooth(0.3)
    for _ in range(20):
        d = int(rng.integers(1, 6))
        w = rng.standard_normal(d + 1)
        x = rng.standard_normal(d)
        fd = central_diff(lambda v: psi_eval(v, x, act), w, h=1e-5)
        assert rel_err(psi_grad(w, x, act), fd) < 1e-6


def test_smooth_activation_close_to_relu_away_from_kink():
    act = smooth(0.05)
    for t in (-2.0, -0.5, 0.5, 2.0):
        # unit particle norm: w = (0, 1) scaled to |w| = 1 keeps a = 0, so use a tiny a
        w = np.array([1e-8, 1.0])
        w /= np.linalg.norm(w)
        val = psi_eval(w, [t], act) / w[0]
        assert abs(val - max(t, 0.0)) < act.tau


def test_predict_examples():
    ens = Ensemble([[2.0, 1.0, 0.0], [1.0, -1.0, 0.0]])
    x = [3.0, 0.0]
    assert predict(ens, x) == 3.0
    assert predict(ens.scaled(3.0), x) == pytest.approx(9.0 * 3.0, rel=1e-15)
    single = Ensemble([[2.0, 1.0, 0.0]])
    assert predict(single, x) == psi_eval(single.W[0], x)


def test_empty_ensemble_rejected():
    with pytest.raises(ValueError):
        Ensemble(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        Ensemble([[1.0]])


def test_unknown_activation():
    with pytest.raises(ValueError):
        Activation("sigmoid")
    with pytest.raises(ValueError):
        Activation("smooth", 0.0)


@pytest.mark.parametrize("act", [RELU, smooth(0.1)])
def test_two_homogeneity(rng, act):
    for _ in range(50):
        d = int(rng.integers(1, 6))
        w = rng.standard_normal(d + 1)
        x = rng.standard_normal(d)
        lam = float(rng.uniform(0.1, 10.0))
        assert psi_eval(lam * w, x, act) == pytest.approx(lam ** 2 * psi_eval(w, x, act), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("act", [RELU, smooth(0.1)])
def test_euler_identity(rng, act):
    for _ in range(50):
        d = int(rng.integers(1, 6))
        w = rng.standard_normal(d + 1)
        x = rng.standard_normal(d)
        lhs = w @ psi_grad(w, x, act)
        rhs = 2 * psi_eval(w, x, act)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_predict_is_linear_in_the_measure(rng):
    a = Ensemble(rng.standard_normal((3, 4)))
    b = Ensemble(rng.standard_normal((5, 4)))
    X = rng.standard_normal((7, 3))
    merged = predict(a.merged(b), X)
    np.testing.assert_allclose(merged, (3 * predict(a, X) + 5 * predict(b, X)) / 8, rtol=1e-13)


def test_init_ensemble_on_unit_circle(rng):
    ens = init_ensemble(200, 2, rng)
    pos = np.abs(ens.W[:, :1]) * ens.W[:, 1:]
    np.testing.assert_allclose(np.linalg.norm(pos, axis=1), 1.0, rtol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(ens.W, axis=1), np.sqrt(2.0), rtol=1e-14)
    assert set(np.unique(ens.W[:, 0])) == {-1.0, 1.0}
