"""Feed-forward ReLU classifier with hand-written backprop.

All parameters live in one flat float64 vector so the optimizers can treat
the model as a single ``p``-vector; per-layer weights and biases are views.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgumentError, NumericFailureError, ShapeError

HIDDEN_SIZES = (200, 100, 50)
CHECKPOINT_VERSION = 1


@dataclass
class MlpModel:
    layer_sizes: Tuple[int, ...]
    params: np.ndarray

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if self.params.size != n_params(self.layer_sizes):
            raise ShapeError(
                f"{self.params.size} params do not fit layers {self.layer_sizes}"
            )

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    def weight_slices(self) -> List[slice]:
        return [w for w, _ in _slices(self.layer_sizes)]

    def layers(self, params=None):
        """``[(W, b), ...]`` as views into ``params`` (default: own params)."""
        p = self.params if params is None else params
        out = []
        for (ws, bs), fan_in, fan_out in zip(
            _slices(self.layer_sizes), self.layer_sizes[:-1], self.layer_sizes[1:]
        ):
            out.append((p[ws].reshape(fan_in, fan_out), p[bs]))
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.layer_sizes, self.params.copy())

    def save(self, path) -> None:
        np.savez(
            path,
            version=CHECKPOINT_VERSION,
            layer_sizes=np.asarray(self.layer_sizes),
            params=self.params,
        )

    @classmethod
    def load(cls, path) -> "MlpModel":
        with np.load(path) as z:
            if int(z["version"]) != CHECKPOINT_VERSION:
                raise InvalidArgumentError(f"unsupported model checkpoint version {int(z['version'])}")
            return cls(tuple(z["layer_sizes"].tolist()), z["params"].copy())


def _slices(sizes):
    out = []
    pos = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        ws = slice(pos, pos + fan_in * fan_out)
        pos = ws.stop
        bs = slice(pos, pos + fan_out)
        pos = bs.stop
        out.append((ws, bs))
    return out


def n_params(sizes: Sequence[int]) -> int:
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def init_mlp(
    input_dim: int,
    n_classes: int,
    rng: np.random.Generator,
    hidden: Sequence[int] = HIDDEN_SIZES,
) -> MlpModel:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero."""
    sizes = (int(input_dim), *map(int, hidden), int(n_classes))
    if min(sizes) < 1:
        raise InvalidArgumentError(f"layer sizes must be positive, got {sizes}")
    params = np.zeros(n_params(sizes))
    for (ws, _), fan_in in zip(_slices(sizes), sizes[:-1]):
        bound = 1.0 / np.sqrt(fan_in)
        params[ws] = rng.uniform(-bound, bound, size=ws.stop - ws.start)
    return MlpModel(sizes, params)


def forward_backward(model: MlpModel, x: np.ndarray, y: np.ndarray, params=None):
    """Mean softmax cross-entropy over the batch and its gradient.

    ``x`` is ``(batch, input_dim)`` with pixels already in [0, 1]; ``y`` holds
    integer class ids.  Returns ``(loss, flat_grad)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(x) == 0 or len(x) != len(y):
        raise ShapeError(f"bad batch shapes x={x.shape} y={y.shape}")
    layers = model.layers(params)
    acts = [x]
    h = x
    for i, (w, b) in enumerate(layers):
        h = h @ w + b
        if i < len(layers) - 1:
            h = np.maximum(h, 0.0)
        acts.append(h)

    logits = acts[-1]
    n = len(x)
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(n), y]))
    if not np.isfinite(loss):
        raise NumericFailureError(f"non-finite loss {loss}")

    grad = np.empty_like(model.params)
    delta = np.exp(z - log_norm[:, None])
    delta[np.arange(n), y] -= 1.0
    delta /= n
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        ws, bs = _slices(model.layer_sizes)[i]
        grad[ws] = (acts[i].T @ delta).ravel()
        grad[bs] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ w.T) * (acts[i] > 0)
    return loss, grad


def loss_only(model: MlpModel, x, y) -> float:
    layers = model.layers()
    h = np.asarray(x, dtype=np.float64)
    for i, (w, b) in enumerate(layers):
        h = h @ w + b
        if i < len(layers) - 1:
            h = np.maximum(h, 0.0)
    z = h - h.max(axis=1, keepdims=True)
    loss = float(np.mean(np.log(np.exp(z).sum(axis=1)) - z[np.arange(len(z)), y]))
    if not np.isfinite(loss):
        raise NumericFailureError(f"non-finite loss {loss}")
    return loss
