"""Central-difference gradient oracle for the small ReLU network."""
import numpy as np

from adamwarmup.train.mlp import MlpModel, forward_backward, n_params

MICRO_SIZES = (4, 3, 3, 3, 2)
# a stencil of width 4h can cross a ReLU kink closer than this; such draws are redrawn
KINK_MARGIN = 1e-2


def _min_preactivation(model, x):
    h = x
    low = np.inf
    layers = model.layers()
    for i, (w, b) in enumerate(layers):
        h = h @ w + b
        if i < len(layers) - 1:
            low = min(low, np.abs(h).min())
            h = np.maximum(h, 0.0)
    return low


def random_configuration(rng, batch=5):
    """Random parameters (biases included), inputs and labels away from kinks."""
    while True:
        model = MlpModel(MICRO_SIZES, rng.standard_normal(n_params(MICRO_SIZES)))
        x = rng.standard_normal((batch, MICRO_SIZES[0]))
        y = rng.integers(0, MICRO_SIZES[-1], batch)
        if _min_preactivation(model, x) > KINK_MARGIN:
            return model, x, y


def central_difference(model, x, y, h=2e-4):
    """Five-point stencil, O(h^4) truncation with little cancellation."""
    p = model.params
    out = np.empty_like(p)

    def f(i, d):
        q = p.copy()
        q[i] = p[i] + d
        return forward_backward(model, x, y, q)[0]

    for i in range(p.size):
        out[i] = (8 * (f(i, h) - f(i, -h)) - (f(i, 2 * h) - f(i, -2 * h))) / (12 * h)
    return out


def max_relative_error(seed, floor=1e-4):
    """Worst backprop vs finite-difference error, relative with an absolute floor."""
    model, x, y = random_configuration(np.random.default_rng(seed))
    _, g = forward_backward(model, x, y)
    fd = central_difference(model, x, y)
    return float((np.abs(g - fd) / np.maximum(np.abs(fd), floor)).max())
