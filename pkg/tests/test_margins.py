import numpy as np
import pytest

from meanfield.flow import FlowConfig, run_flow
from meanfield.losses import Dataset, Loss
from meanfield.margins import (direction_distance, extract_boundary, margin_trace, marching_squares,
                               normalized_margin, particle_scale, turning_angle_variance, turning_angles)
from meanfield.model import Ensemble, init_ensemble


def test_normalized_margin_scale_invariant(rng):
    ens = Ensemble(rng.standard_normal((7, 3)))
    ds = Dataset(rng.standard_normal((9, 2)), np.where(rng.random(9) < 0.5, -1.0, 1.0))
    base = normalized_margin(ens, ds)
    for lam in (0.3, 2.0, 17.0):
        assert normalized_margin(ens.scaled(lam), ds) == pytest.approx(base, rel=1e-13, abs=1e-15)


def test_normalized_margin_sign():
    ens = Ensemble([[1.0, 1.0, 0.0]])
    ds = Dataset([[1.0, 0.0], [2.0, 0.0]], [1.0, -1.0])
    assert normalized_margin(ens, ds) < 0
    ok = Dataset([[1.0, 0.0]], [1.0])
    assert normalized_margin(ens, ok) == pytest.approx(1.0 / 2.0)
    with pytest.raises(ValueError):
        normalized_margin(Ensemble([[0.0, 0.0, 0.0]]), ok)


def test_particle_scale():
    assert particle_scale(Ensemble([[1.0, 1.0], [2.0, 0.0]])) == 3.0


def test_direction_distance_examples(rng):
    a = rng.standard_normal(4)
    assert direction_distance(a, 3 * a) == pytest.approx(0.0, abs=1e-15)
    assert direction_distance(a, -a) == pytest.approx(2.0, abs=1e-15)
    b = rng.standard_normal(4)
    assert direction_distance(a, b) == direction_distance(b, a)
    assert direction_distance(2 * a, 0.5 * b) == pytest.approx(direction_distance(a, b), rel=1e-12)
    with pytest.raises(ValueError):
        direction_distance(a, np.zeros(4))


def test_marching_squares_circle():
    xs = ys = np.linspace(-1, 1, 81)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    lines = marching_squares(xs, ys, gx ** 2 + gy ** 2 - 0.5 ** 2)
    assert len(lines) == 1
    loop = lines[0]
    np.testing.assert_allclose(loop[0], loop[-1])
    np.testing.assert_allclose(np.hypot(loop[:, 0], loop[:, 1]), 0.5, atol=2e-3)


def test_marching_squares_line():
    xs = ys = np.linspace(-1, 1, 21)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    lines = marching_squares(xs, ys, gx + 2 * gy - 0.1)
    assert len(lines) == 1
    np.testing.assert_allclose(lines[0][:, 0] + 2 * lines[0][:, 1], 0.1, atol=1e-12)
    assert turning_angle_variance(lines) < 1e-20


def test_single_neuron_boundary_is_straight():
    # h(x) = (x1)_+ - c with a bias coordinate: second neuron contributes -c
    c = 0.1
    ens = Ensemble([[np.sqrt(2.0), np.sqrt(2.0), 0.0, 0.0], [-np.sqrt(2 * c), 0.0, 0.0, np.sqrt(2 * c)]])
    grid = extract_boundary(ens, resolution=64, bias=True)
    assert len(grid.polylines) == 1
    np.testing.assert_allclose(grid.polylines[0][:, 0], c, atol=1e-12)
    assert np.all(np.isfinite(grid.values))


def test_sign_flip_keeps_geometry(rng):
    W = rng.standard_normal((30, 4))
    W[:, 3] *= 0.2  # small biases keep kinks inside the box
    ens = Ensemble(W)
    g1 = extract_boundary(ens, resolution=64, bias=True)
    g2 = extract_boundary(Ensemble(ens.W * np.array([-1.0, 1, 1, 1])), resolution=64, bias=True)
    np.testing.assert_array_equal(g2.values, -g1.values)
    assert g1.polylines
    p1 = np.vstack(g1.polylines)
    p2 = np.vstack(g2.polylines)
    key = lambda p: set(map(tuple, np.round(p, 12)))
    assert key(p1) == key(p2)


def test_extract_boundary_dimension_check(rng):
    with pytest.raises(ValueError):
        extract_boundary(Ensemble(rng.standard_normal((3, 4))))
    with pytest.raises(ValueError):
        extract_boundary(Ensemble(rng.standard_normal((3, 3))), resolution=1)


def test_turning_angles_square():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    np.testing.assert_allclose(turning_angles(sq), np.full(4, np.pi / 2))
    bent = np.array([[0, 0], [1, 0], [2, 0], [2, 1]], dtype=float)
    np.testing.assert_allclose(turning_angles(bent), [0.0, np.pi / 2])
    assert turning_angle_variance([]) == 0.0


def test_both_layer_margin_tail_non_decreasing():
    from meanfield.datagen import make_clusters

    bad = 0
    for seed in range(10):
        dist = make_clusters(2, 2, seed, bias=True)
        ds = dist.sample(30, np.random.default_rng(100 + seed))
        if np.unique(ds.ys).size < 2:
            continue
        e0 = init_ensemble(50, 3, np.random.default_rng(seed))
        traj = run_flow(e0, ds, Loss.LOGISTIC, cfg=FlowConfig(step=1.0, iterations=6000, record_every=300))
        tr = margin_trace(traj, ds)
        assert len(tr.times) == len(tr.normalized_margin)
        tail = np.array(tr.normalized_margin[len(tr.normalized_margin) // 2:])
        assert tail[-1] > 0
        bad += not np.all(np.diff(tail) >= -1e-12)
    assert bad == 0
