import math

import numpy as np
import pytest

from fd_oracle import max_relative_error

from adamwarmup.errors import ShapeError
from adamwarmup.train.mlp import MlpModel, forward_backward, init_mlp, loss_only, n_params


def test_default_shapes():
    m = init_mlp(784, 10, np.random.default_rng(0))
    shapes = [w.shape for w, _ in m.layers()]
    assert shapes == [(784, 200), (200, 100), (100, 50), (50, 10)]
    assert m.params.size == n_params((784, 200, 100, 50, 10)) == 182660


def test_init_bounds_and_zero_biases():
    m = init_mlp(64, 10, np.random.default_rng(1))
    for (w, b), fan_in in zip(m.layers(), m.layer_sizes[:-1]):
        assert np.abs(w).max() <= 1 / math.sqrt(fan_in)
        assert np.abs(w).max() > 0.9 / math.sqrt(fan_in)
        np.testing.assert_array_equal(b, 0.0)


def test_init_deterministic():
    a = init_mlp(20, 4, np.random.default_rng(5))
    b = init_mlp(20, 4, np.random.default_rng(5))
    np.testing.assert_array_equal(a.params, b.params)


def test_uniform_logits_give_log_k():
    m = init_mlp(16, 10, np.random.default_rng(0))
    w, b = m.layers()[-1]
    w[:] = 0.0
    x = np.random.default_rng(1).random((7, 16))
    y = np.arange(7)
    loss, grad = forward_backward(m, x, y)
    assert loss == pytest.approx(math.log(10), rel=1e-15)
    assert loss_only(m, x, y) == pytest.approx(loss, rel=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    assert max_relative_error(seed) < 1e-6


def test_duplicated_batch_gives_same_mean_loss_and_grad():
    rng = np.random.default_rng(2)
    m = init_mlp(6, 3, rng, hidden=(5,))
    x = rng.random((4, 6))
    y = np.array([0, 1, 2, 1])
    l1, g1 = forward_backward(m, x, y)
    l2, g2 = forward_backward(m, np.vstack([x, x]), np.concatenate([y, y]))
    assert l2 == pytest.approx(l1, rel=1e-14)
    np.testing.assert_allclose(g2, g1, rtol=1e-12, atol=1e-16)


def test_save_load(tmp_path):
    m = init_mlp(6, 3, np.random.default_rng(0), hidden=(4,))
    m.save(tmp_path / "m.npz")
    back = MlpModel.load(tmp_path / "m.npz")
    assert back.layer_sizes == m.layer_sizes
    np.testing.assert_array_equal(back.params, m.params)


def test_shape_errors():
    m = init_mlp(6, 3, np.random.default_rng(0), hidden=(4,))
    with pytest.raises(ShapeError):
        forward_backward(m, np.zeros((2, 6)), np.zeros(3, int))
    with pytest.raises(ShapeError):
        MlpModel((6, 4, 3), np.zeros(5))
