"""SGD, Adam and RAdam update rules with warmup and decoupled weight decay.

The step functions are stateless apart from the :class:`OptimizerState`
they advance.  :func:`scheduled_optimizer` wraps them into a stepper that
owns its state and applies a warmup schedule.

Besides the raw moment estimates ``m`` and ``v`` the state carries the
bias-corrected estimates as running averages,
``m_hat <- m_hat + k_t (g - m_hat)`` with ``k_t = (1 - beta) / (1 - beta^t)``.
This is algebraically the same as dividing ``m`` by ``1 - beta^t`` but
``k_1`` is exactly 1, so the first Adam step is exactly ``+-alpha``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigurationError, ShapeError
from .schedules import RHO_THRESHOLD, ScheduleKind, WarmupSchedule, radam_rho, radam_warmup_factor

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class AdamHyperparams:
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0.0 < b < 1.0:
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {b}")
        if not self.epsilon >= 0:
            raise InvalidArgumentError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.weight_decay >= 0:
            raise InvalidArgumentError(f"weight_decay must be non-negative, got {self.weight_decay}")

    def replace(self, **changes) -> "AdamHyperparams":
        return AdamHyperparams(**{**asdict(self), **changes})


@dataclass
class OptimizerState:
    t: int
    m: np.ndarray
    v: np.ndarray
    m_hat: np.ndarray
    v_hat: np.ndarray

    @classmethod
    def zeros(cls, p: int) -> "OptimizerState":
        z = np.zeros(p)
        return cls(0, z.copy(), z.copy(), z.copy(), z.copy())

    @property
    def size(self) -> int:
        return self.m.size

    def copy(self) -> "OptimizerState":
        return OptimizerState(
            self.t, self.m.copy(), self.v.copy(), self.m_hat.copy(), self.v_hat.copy()
        )


@dataclass
class StepResult:
    new_params: np.ndarray
    # subtracted from params together with the weight-decay term, which it excludes
    update: np.ndarray
    warmup_factor_applied: float


class RadamAblation(enum.Enum):
    """How RAdam treats its momentum phase (the first four iterations)."""

    STANDARD = "standard"
    DO_NOTHING = "do-nothing"
    JUMP_TO_OMEGA5 = "jump-to-omega5"
    LINEAR_TO_OMEGA5 = "linear-to-omega5"


class OptimizerKind(enum.Enum):
    SGD = "sgd"
    ADAM = "adam"
    RADAM = "radam"


def _check_shapes(params, grad, state=None):
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape or params.ndim != 1:
        raise ShapeError(f"params {params.shape} and grad {grad.shape} must be equal 1-D shapes")
    if state is not None and state.size != params.size:
        raise ShapeError(f"state holds {state.size} slots, params have {params.size}")
    return params, grad


def advance_moments(state: OptimizerState, grad: np.ndarray, beta1: float, beta2: float) -> None:
    """Advance ``state`` by one iteration with gradient ``grad``, in place."""
    t = state.t + 1
    g2 = grad * grad
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * g2
    k1 = (1.0 - beta1) / (1.0 - beta1**t)
    k2 = (1.0 - beta2) / (1.0 - beta2**t)
    state.m_hat = state.m_hat + k1 * (grad - state.m_hat)
    state.v_hat = state.v_hat + k2 * (g2 - state.v_hat)
    state.t = t


def adaptive_direction(state: OptimizerState, epsilon: float) -> np.ndarray:
    """``m_hat / (sqrt(v_hat) + eps)`` with 0/0 defined as 0."""
    denom = np.sqrt(state.v_hat) + epsilon
    out = np.zeros_like(denom)
    np.divide(state.m_hat, denom, out=out, where=denom != 0)
    return out


def _finish(params, update, hp, omega):
    new = params - update
    if hp.weight_decay > 0:
        new = new - (hp.alpha * omega * hp.weight_decay) * params
    return StepResult(new, update, float(omega))


def sgd_step(params, grad, alpha: float) -> StepResult:
    """Plain gradient step ``params - alpha * grad``."""
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    params, grad = _check_shapes(params, grad)
    update = alpha * grad
    return StepResult(params - update, update, 1.0)


def adam_step(
    params,
    grad,
    state: OptimizerState,
    hp: AdamHyperparams,
    warmup_factor: float = 1.0,
) -> StepResult:
    """One Adam iteration with the learning rate scaled by ``warmup_factor``.

    Advances ``state`` in place.  Decoupled weight decay, if any, is applied
    as ``alpha * omega * weight_decay * params`` and kept out of ``update``.
    """
    if not 0.0 <= warmup_factor <= 1.0:
        raise InvalidArgumentError(f"warmup factor must lie in [0, 1], got {warmup_factor}")
    params, grad = _check_shapes(params, grad, state)
    advance_moments(state, grad, hp.beta1, hp.beta2)
    update = (hp.alpha * warmup_factor) * adaptive_direction(state, hp.epsilon)
    return _finish(params, update, hp, warmup_factor)


def _omega5(beta2):
    w5 = radam_warmup_factor(5, beta2)
    if w5 is None:
        raise InvalidConfigurationError(
            f"rectifier is still inactive at t=5 for beta2={beta2}; ablation undefined"
        )
    return w5


def radam_step(
    params,
    grad,
    state: OptimizerState,
    hp: AdamHyperparams,
    ablation: RadamAblation = RadamAblation.STANDARD,
) -> StepResult:
    """One RAdam iteration.

    While ``rho_t <= 4`` the standard rule takes a bias-corrected heavy-ball
    step ``alpha * m_t / (1 - beta1^t)``; the ablation modes replace only that
    phase.  Afterwards the step is Adam scaled by the rectifier.
    """
    params, grad = _check_shapes(params, grad, state)
    t = state.t + 1
    if radam_rho(t, hp.beta2).rho_t > RHO_THRESHOLD:
        return adam_step(params, grad, state, hp, radam_warmup_factor(t, hp.beta2))

    if ablation is RadamAblation.JUMP_TO_OMEGA5:
        return adam_step(params, grad, state, hp, _omega5(hp.beta2))
    if ablation is RadamAblation.LINEAR_TO_OMEGA5:
        return adam_step(params, grad, state, hp, min(1.0, t / 5.0) * _omega5(hp.beta2))

    advance_moments(state, grad, hp.beta1, hp.beta2)
    if ablation is RadamAblation.DO_NOTHING:
        return _finish(params, np.zeros_like(params), hp, 0.0)
    update = hp.alpha * state.m / (1.0 - hp.beta1**t)
    return _finish(params, update, hp, 1.0)


class Optimizer:
    """Stateful stepper applying ``schedule(t)`` on its ``t``-th call."""

    def __init__(
        self,
        kind: OptimizerKind,
        hp: AdamHyperparams,
        schedule: Optional[WarmupSchedule] = None,
        ablation: RadamAblation = RadamAblation.STANDARD,
    ):
        self.kind = OptimizerKind(kind)
        self.hp = hp
        self.schedule = schedule or WarmupSchedule.constant()
        self.ablation = RadamAblation(ablation)
        self.state: Optional[OptimizerState] = None
        if self.kind is OptimizerKind.RADAM and self.schedule.kind is not ScheduleKind.CONSTANT_ONE:
            raise InvalidConfigurationError("RAdam carries its own warmup; use a constant schedule")

    @property
    def t(self) -> int:
        return 0 if self.state is None else self.state.t

    def step(self, params, grad) -> StepResult:
        params = np.asarray(params, dtype=np.float64)
        if self.state is None:
            self.state = OptimizerState.zeros(params.size)
        if self.kind is OptimizerKind.RADAM:
            return radam_step(params, grad, self.state, self.hp, self.ablation)
        omega = float(self.schedule(self.state.t + 1))
        if self.kind is OptimizerKind.ADAM:
            return adam_step(params, grad, self.state, self.hp, omega)
        params, grad = _check_shapes(params, grad, self.state)
        self.state.t += 1
        update = (self.hp.alpha * omega) * grad
        return _finish(params, update, self.hp, omega)

    def state_dict(self) -> dict:
        s = self.state
        return {
            "version": CHECKPOINT_VERSION,
            "kind": self.kind.value,
            "ablation": self.ablation.value,
            "hyperparams": asdict(self.hp),
            "schedule": self.schedule.to_dict(),
            "t": self.t,
            "m": None if s is None else s.m.tolist(),
            "v": None if s is None else s.v.tolist(),
            "m_hat": None if s is None else s.m_hat.tolist(),
            "v_hat": None if s is None else s.v_hat.tolist(),
        }

    @classmethod
    def from_state_dict(cls, d: dict) -> "Optimizer":
        if d.get("version") != CHECKPOINT_VERSION:
            raise InvalidConfigurationError(f"unsupported checkpoint version {d.get('version')!r}")
        opt = cls(
            OptimizerKind(d["kind"]),
            AdamHyperparams(**d["hyperparams"]),
            WarmupSchedule.from_dict(d["schedule"]),
            RadamAblation(d["ablation"]),
        )
        if d["m"] is not None:
            arrs = [np.asarray(d[k], dtype=np.float64) for k in ("m", "v", "m_hat", "v_hat")]
            opt.state = OptimizerState(int(d["t"]), *arrs)
        return opt

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.state_dict(), f)

    @classmethod
    def load(cls, path) -> "Optimizer":
        with open(path) as f:
            return cls.from_state_dict(json.load(f))


def scheduled_optimizer(
    kind,
    hp: AdamHyperparams,
    schedule: Optional[WarmupSchedule] = None,
    ablation: RadamAblation = RadamAblation.STANDARD,
) -> Optimizer:
    return Optimizer(kind, hp, schedule, ablation)
