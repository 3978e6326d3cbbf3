"""Minibatch training with optional gradient-statistics probes.

A probe at iteration ``t`` draws ``grad_samples`` independent minibatches
and records gradients of a fixed random subset of weight entries (biases
excluded) without touching the parameters.  The regular optimizer step
follows, and the record for ``t`` combines

* the median coefficient of variation of the sampled gradients,
* the Pearson correlation of ``|m_t|`` and ``sqrt(v_t)`` from the
  optimizer's own state after the step, and
* the median of ``|m_hat_t| / sqrt(v_hat_t)``, the update magnitude in
  units of the learning rate with epsilon and warmup left out.

Batch order, probe batches, initialisation and the probed subset each use
their own child of the seed's ``SeedSequence``, so probing does not change
the training trajectory and different optimizers see the same data order.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import InvalidArgumentError, InvalidConfigurationError, UndefinedStatisticError
from ..optim import AdamHyperparams, Optimizer, OptimizerKind
from ..schedules import WarmupSchedule
from ..stats import coefficients_of_variation, pearson_correlation
from .idx import IdxDataset
from .mlp import HIDDEN_SIZES, MlpModel, forward_backward, init_mlp, loss_only

log = logging.getLogger(__name__)

WARMUP_METHODS = ("expo-untuned", "linear-untuned", "radam")


def _default_hp():
    return AdamHyperparams(alpha=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8, weight_decay=1e-4)


@dataclass(frozen=True)
class ProbeSettings:
    every: int = 10
    grad_samples: int = 64
    params_per_matrix: int = 500


@dataclass(frozen=True)
class TrainConfig:
    hp: AdamHyperparams = field(default_factory=_default_hp)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    warmup: WarmupSchedule = field(default_factory=WarmupSchedule.constant)
    batch_size: int = 256
    n_iters: int = 2000
    hidden: Sequence[int] = HIDDEN_SIZES
    probe: Optional[ProbeSettings] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "optimizer", OptimizerKind(self.optimizer))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.batch_size < 1 or self.n_iters < 1:
            raise InvalidArgumentError("batch_size and n_iters must be positive")

    def to_dict(self) -> dict:
        return {
            "hp": asdict(self.hp),
            "optimizer": self.optimizer.value,
            "warmup": self.warmup.to_dict(),
            "batch_size": self.batch_size,
            "n_iters": self.n_iters,
            "hidden": list(self.hidden),
            "probe": None if self.probe is None else asdict(self.probe),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            hp=AdamHyperparams(**d["hp"]),
            optimizer=OptimizerKind(d["optimizer"]),
            warmup=WarmupSchedule.from_dict(d["warmup"]),
            batch_size=d["batch_size"],
            n_iters=d["n_iters"],
            hidden=d["hidden"],
            probe=None if d.get("probe") is None else ProbeSettings(**d["probe"]),
            seed=d["seed"],
        )


def method_config(method: str, **overrides) -> TrainConfig:
    """Config for one of the three compared warmup methods."""
    base = TrainConfig(**overrides)
    beta2 = base.hp.beta2
    if method == "expo-untuned":
        return _replace(base, optimizer=OptimizerKind.ADAM, warmup=WarmupSchedule.untuned_exponential(beta2))
    if method == "linear-untuned":
        return _replace(base, optimizer=OptimizerKind.ADAM, warmup=WarmupSchedule.untuned_linear(beta2))
    if method == "radam":
        return _replace(base, optimizer=OptimizerKind.RADAM, warmup=WarmupSchedule.constant())
    raise InvalidArgumentError(f"unknown warmup method {method!r}; choose from {WARMUP_METHODS}")


def _replace(cfg, **kw):
    d = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    d.update(kw)
    return TrainConfig(**d)


@dataclass
class ProbeRecord:
    t: int
    median_cv: float
    moment_correlation: float
    median_update_magnitude: float
    cv_skipped: int = 0


@dataclass
class TrainResult:
    model: MlpModel
    optimizer: Optimizer
    losses: np.ndarray
    initial_loss: float
    final_loss: float
    probes: List[ProbeRecord]

    def write_loss_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "loss"])
            for t, loss in enumerate(self.losses, start=1):
                w.writerow([t, f"{loss:.9g}"])

    def write_probe_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "median_cv", "moment_corr", "median_update_mag"])
            for r in self.probes:
                w.writerow(
                    [r.t, f"{r.median_cv:.9g}", f"{r.moment_correlation:.9g}",
                     f"{r.median_update_magnitude:.9g}"]
                )


def _probe_positions(model, per_matrix, rng):
    picks = []
    for ws in model.weight_slices():
        size = ws.stop - ws.start
        k = min(per_matrix, size)
        picks.append(ws.start + np.sort(rng.choice(size, k, replace=False)))
    return np.concatenate(picks)


def collect_gradient_samples(model, dataset, batch_size, n_samples, positions, rng) -> np.ndarray:
    """``(n_samples, len(positions))`` gradients from independent minibatches."""
    out = np.empty((n_samples, len(positions)))
    for k in range(n_samples):
        idx = rng.choice(len(dataset), batch_size, replace=False)
        _, g = forward_backward(model, dataset.features(idx), dataset.labels[idx])
        out[k] = g[positions]
    return out


def _probe_after_step(t, state, positions, cvs):
    m = np.abs(state.m[positions])
    sv = np.sqrt(state.v[positions])
    try:
        corr = pearson_correlation(m, sv)
    except UndefinedStatisticError:
        corr = float("nan")
    m_hat = np.abs(state.m_hat[positions])
    v_hat = state.v_hat[positions]
    seen = v_hat > 0
    mag = float(np.median(m_hat[seen] / np.sqrt(v_hat[seen]))) if seen.any() else float("nan")
    valid = np.isfinite(cvs)
    median_cv = float(np.median(cvs[valid])) if valid.any() else float("nan")
    return ProbeRecord(t, median_cv, corr, mag, int((~valid).sum()))


def train(config: TrainConfig, dataset: IdxDataset) -> TrainResult:
    if config.batch_size > len(dataset):
        raise InvalidConfigurationError(
            f"batch size {config.batch_size} exceeds dataset size {len(dataset)}"
        )
    init_ss, batch_ss, probe_ss, pick_ss = np.random.SeedSequence(config.seed).spawn(4)
    model = init_mlp(dataset.input_dim, dataset.n_classes, np.random.default_rng(init_ss), config.hidden)
    batch_rng = np.random.default_rng(batch_ss)
    probe_rng = np.random.default_rng(probe_ss)
    opt = Optimizer(config.optimizer, config.hp, config.warmup)

    x_all = dataset.features()
    initial_loss = loss_only(model, x_all, dataset.labels)

    probe = config.probe
    positions = None
    if probe is not None:
        positions = _probe_positions(model, probe.params_per_matrix, np.random.default_rng(pick_ss))

    losses = np.empty(config.n_iters)
    records = []
    for t in range(1, config.n_iters + 1):
        probing = probe is not None and (t - 1) % probe.every == 0
        if probing:
            samples = collect_gradient_samples(
                model, dataset, config.batch_size, probe.grad_samples, positions, probe_rng
            )
            cvs = coefficients_of_variation(samples)

        idx = batch_rng.choice(len(dataset), config.batch_size, replace=False)
        loss, grad = forward_backward(model, x_all[idx], dataset.labels[idx])
        losses[t - 1] = loss
        model.params = opt.step(model.params, grad).new_params

        if probing:
            rec = _probe_after_step(t, opt.state, positions, cvs)
            if rec.cv_skipped:
                log.info("t=%d: %d zero-mean coordinates skipped for CV", t, rec.cv_skipped)
            records.append(rec)

    final_loss = loss_only(model, x_all, dataset.labels)
    return TrainResult(model, opt, losses, initial_loss, final_loss, records)


def compare_warmups(
    dataset: IdxDataset,
    seeds: Sequence[int],
    methods: Sequence[str] = WARMUP_METHODS,
    **overrides,
) -> Dict[str, List[float]]:
    """Final full-dataset loss for every ``(method, seed)`` pair."""
    table = {}
    for method in methods:
        table[method] = []
        for seed in seeds:
            res = train(method_config(method, seed=seed, **overrides), dataset)
            table[method].append(res.final_loss)
    return table


def interchangeability(table: Dict[str, List[float]]) -> tuple:
    """``(max cross-method gap of mean loss, max within-method seed std)``."""
    means = [np.mean(v) for v in table.values()]
    stds = [np.std(v, ddof=1) for v in table.values()]
    return float(max(means) - min(means)), float(max(stds))
