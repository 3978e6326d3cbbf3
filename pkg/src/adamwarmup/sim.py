"""Adam update magnitudes at a simulated local minimum.

Every parameter sees i.i.d. zero-mean Gaussian gradients.  Parameters are
grouped into fixed-size blocks, each with its own child of the seed's
``SeedSequence``; the trajectory therefore does not depend on how many
worker threads draw the blocks.  Memory is O(n_params): only the moment
estimates and a short buffer of draws are kept.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .optim import AdamHyperparams
from .stats import _check_qs

BLOCK_SIZE = 1000
# iterations drawn per buffer refill
_BUFFER_ITERS = 16

DEFAULT_QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


def _default_hp():
    return AdamHyperparams(alpha=1.0, beta1=0.9, beta2=0.999, epsilon=0.0)


@dataclass(frozen=True)
class SimConfig:
    n_params: int = 25000
    n_iters: int = 1000
    grad_variance: float = 1e-9
    hp: AdamHyperparams = field(default_factory=_default_hp)
    quantiles: Sequence[float] = DEFAULT_QUANTILES
    seed: int = 0

    def __post_init__(self):
        if int(self.n_params) < 1:
            raise InvalidArgumentError("n_params must be positive")
        if int(self.n_iters) < 1:
            raise InvalidArgumentError("n_iters must be positive")
        if not self.grad_variance > 0:
            raise InvalidArgumentError("grad_variance must be positive")
        _check_qs(self.quantiles)
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))

    def to_dict(self) -> dict:
        return {
            "n_params": self.n_params,
            "n_iters": self.n_iters,
            "grad_variance": self.grad_variance,
            "beta1": self.hp.beta1,
            "beta2": self.hp.beta2,
            "epsilon": self.hp.epsilon,
            "quantiles": list(self.quantiles),
            "seed": self.seed,
        }


def quantile_label(q: float) -> str:
    return f"q{100 * q:g}"


@dataclass
class SimTrajectory:
    """Per-iteration quantiles of ``|update| / alpha`` across parameters."""

    t: np.ndarray
    values: np.ndarray
    quantiles: tuple

    def column(self, q: float) -> np.ndarray:
        return self.values[:, self.quantiles.index(q)]

    def row(self, t: int) -> np.ndarray:
        return self.values[t - 1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t"] + [quantile_label(q) for q in self.quantiles])
            for t, row in zip(self.t, self.values):
                w.writerow([int(t)] + [f"{x:.9g}" for x in row])


class _BlockStreams:
    def __init__(self, n_params, seed, workers):
        n_blocks = -(-n_params // BLOCK_SIZE)
        children = np.random.SeedSequence(seed).spawn(n_blocks)
        self.gens = [np.random.default_rng(c) for c in children]
        self.sizes = [min(BLOCK_SIZE, n_params - i * BLOCK_SIZE) for i in range(n_blocks)]
        self.workers = workers

    def draw(self, n_iters):
        def one(i):
            return self.gens[i].standard_normal((self.sizes[i], n_iters))

        idx = range(len(self.gens))
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                parts = list(pool.map(one, idx))
        else:
            parts = [one(i) for i in idx]
        # rows: iterations, columns: parameters
        return np.concatenate(parts, axis=0).T


def _simulate(config: SimConfig, qs, workers):
    hp = config.hp
    sigma = np.sqrt(config.grad_variance)
    streams = _BlockStreams(config.n_params, config.seed, workers)
    m_hat = np.zeros(config.n_params)
    v_hat = np.zeros(config.n_params)
    rows = np.empty((config.n_iters, len(qs)))
    mags = None
    t = 0
    while t < config.n_iters:
        buf = streams.draw(min(_BUFFER_ITERS, config.n_iters - t))
        for z in buf:
            t += 1
            g = sigma * z
            g2 = g * g
            k1 = (1.0 - hp.beta1) / (1.0 - hp.beta1**t)
            k2 = (1.0 - hp.beta2) / (1.0 - hp.beta2**t)
            m_hat += k1 * (g - m_hat)
            v_hat += k2 * (g2 - v_hat)
            denom = np.sqrt(v_hat) + hp.epsilon
            mags = np.zeros_like(denom)
            np.divide(np.abs(m_hat), denom, out=mags, where=denom != 0)
            rows[t - 1] = np.quantile(mags, qs, method="linear")
    return rows, mags


def run_local_minimum_sim(config: SimConfig, workers: int = 1) -> SimTrajectory:
    """Simulate Adam (no warmup) on pure-noise gradients.

    Magnitudes are reported in units of alpha; ``config.hp.alpha`` is ignored.
    """
    qs = np.asarray(config.quantiles)
    rows, _ = _simulate(config, qs, workers)
    return SimTrajectory(np.arange(1, config.n_iters + 1), rows, config.quantiles)


def stationary_median(config: Optional[SimConfig] = None, workers: int = 1) -> float:
    """Median ``|update| / alpha`` across parameters at the last iteration."""
    if config is None:
        config = SimConfig(n_iters=10000)
    _, mags = _simulate(config, np.asarray([0.5]), workers)
    return float(np.median(mags))
