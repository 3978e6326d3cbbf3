"""Warmup schedules, RAdam's rho terms and the effective warmup period.

Every schedule maps an iteration ``t >= 1`` to a factor ``omega_t`` in
[0, 1] which multiplies the global learning rate.  All functions here are
pure and accept either Python scalars or numpy arrays for ``t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InvalidArgumentError

ArrayLike = Union[int, float, np.ndarray]

# RAdam's momentum phase ends once rho_t exceeds this threshold.
RHO_THRESHOLD = 4.0

DEFAULT_TOLERANCE = 1e-8
_CHUNK = 1 << 16


def _check_tau(tau):
    if not tau > 0 or not math.isfinite(tau):
        raise InvalidArgumentError(f"warmup period tau must be positive, got {tau!r}")


def _check_beta2(beta2):
    if not 0.0 < beta2 < 1.0:
        raise InvalidArgumentError(f"beta2 must lie in (0, 1), got {beta2!r}")


def _check_t(t):
    if np.any(np.asarray(t) < 1):
        raise InvalidArgumentError("iteration t must be >= 1")


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def linear_warmup(t: ArrayLike, tau: float) -> ArrayLike:
    """``min(1, t / tau)``."""
    _check_tau(tau)
    _check_t(t)
    out = np.minimum(1.0, np.asarray(t, dtype=np.float64) / tau)
    return _scalar_or_array(out, t)


def exponential_warmup(t: ArrayLike, tau: float) -> ArrayLike:
    """``1 - exp(-t / tau)``; approaches but never reaches 1 in exact arithmetic."""
    _check_tau(tau)
    _check_t(t)
    out = -np.expm1(-np.asarray(t, dtype=np.float64) / tau)
    return _scalar_or_array(out, t)


def untuned_exponential_tau(beta2: float) -> float:
    """Rule-of-thumb exponential warmup constant, ``1 / (1 - beta2)``."""
    _check_beta2(beta2)
    return 1.0 / (1.0 - beta2)


def untuned_linear_tau(beta2: float) -> float:
    """Rule-of-thumb linear warmup period, ``2 / (1 - beta2)``."""
    _check_beta2(beta2)
    return 2.0 / (1.0 - beta2)


@dataclass(frozen=True)
class RhoTerms:
    rho_inf: float
    rho_t: ArrayLike


def _rho_gap(t, beta2):
    # rho_inf - rho_t = 2 t beta2^t / (1 - beta2^t), with beta2^t = exp(t ln beta2)
    t = np.asarray(t, dtype=np.float64)
    log_b = math.log(beta2)
    return 2.0 * t * np.exp(t * log_b) / -np.expm1(t * log_b)


def rho_inf(beta2: float) -> float:
    _check_beta2(beta2)
    return 2.0 / (1.0 - beta2) - 1.0


def radam_rho(t: ArrayLike, beta2: float) -> RhoTerms:
    """Return ``rho_inf`` and ``rho_t`` for iteration(s) ``t``.

    For large ``t`` the correction term underflows and ``rho_t`` saturates at
    ``rho_inf`` in double precision.
    """
    _check_beta2(beta2)
    _check_t(t)
    r_inf = rho_inf(beta2)
    r_t = r_inf - _rho_gap(t, beta2)
    return RhoTerms(r_inf, _scalar_or_array(r_t, t))


def _rectifier(rho_t, r_inf):
    return np.sqrt(
        (rho_t - 4.0) * (rho_t - 2.0) * r_inf / ((r_inf - 4.0) * (r_inf - 2.0) * rho_t)
    )


def radam_warmup_factor(t: int, beta2: float) -> Optional[float]:
    """RAdam's rectification factor at iteration ``t``.

    Returns ``None`` while the rectifier is inactive (``rho_t <= 4``), i.e.
    during the momentum phase.
    """
    terms = radam_rho(int(t), beta2)
    if terms.rho_t <= RHO_THRESHOLD:
        return None
    return float(_rectifier(terms.rho_t, terms.rho_inf))


def radam_rectifier_factors(t: ArrayLike, beta2: float) -> ArrayLike:
    """Vectorised rectifier with inactive iterations mapped to 0."""
    terms = radam_rho(t, beta2)
    rho_t = np.asarray(terms.rho_t, dtype=np.float64)
    active = rho_t > RHO_THRESHOLD
    out = np.zeros_like(rho_t)
    out[active] = _rectifier(rho_t[active], terms.rho_inf)
    return _scalar_or_array(out, t)


class ScheduleKind(enum.Enum):
    CONSTANT_ONE = "constant"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    RADAM_RECTIFIER = "radam"


@dataclass(frozen=True)
class WarmupSchedule:
    """A named warmup schedule.

    ``tau`` is used by the linear and exponential kinds, ``beta2`` by the
    RAdam rectifier.  The rectifier evaluates to 0 during RAdam's momentum
    phase so that Adam composed with it leaves parameters untouched there.
    """

    kind: ScheduleKind
    tau: Optional[float] = None
    beta2: Optional[float] = None

    def __post_init__(self):
        if self.kind in (ScheduleKind.LINEAR, ScheduleKind.EXPONENTIAL):
            if self.tau is None:
                raise InvalidArgumentError(f"{self.kind.value} schedule needs tau")
            _check_tau(self.tau)
        elif self.kind is ScheduleKind.RADAM_RECTIFIER:
            if self.beta2 is None:
                raise InvalidArgumentError("radam schedule needs beta2")
            _check_beta2(self.beta2)

    @classmethod
    def constant(cls) -> "WarmupSchedule":
        return cls(ScheduleKind.CONSTANT_ONE)

    @classmethod
    def linear(cls, tau: float) -> "WarmupSchedule":
        return cls(ScheduleKind.LINEAR, tau=float(tau))

    @classmethod
    def exponential(cls, tau: float) -> "WarmupSchedule":
        return cls(ScheduleKind.EXPONENTIAL, tau=float(tau))

    @classmethod
    def radam(cls, beta2: float) -> "WarmupSchedule":
        return cls(ScheduleKind.RADAM_RECTIFIER, beta2=float(beta2))

    @classmethod
    def untuned_linear(cls, beta2: float) -> "WarmupSchedule":
        return cls.linear(untuned_linear_tau(beta2))

    @classmethod
    def untuned_exponential(cls, beta2: float) -> "WarmupSchedule":
        return cls.exponential(untuned_exponential_tau(beta2))

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self.kind is ScheduleKind.CONSTANT_ONE:
            _check_t(t)
            return _scalar_or_array(np.ones(np.shape(t)), t)
        if self.kind is ScheduleKind.LINEAR:
            return linear_warmup(t, self.tau)
        if self.kind is ScheduleKind.EXPONENTIAL:
            return exponential_warmup(t, self.tau)
        if np.ndim(t) == 0:
            w = radam_warmup_factor(int(t), self.beta2)
            return 0.0 if w is None else w
        return radam_rectifier_factors(t, self.beta2)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "tau": self.tau, "beta2": self.beta2}

    @classmethod
    def from_dict(cls, d: dict) -> "WarmupSchedule":
        return cls(ScheduleKind(d["kind"]), tau=d.get("tau"), beta2=d.get("beta2"))


def _truncated_sum(terms_fn, tail_bound_fn, tolerance):
    # Sum chunk by chunk; stop at the first t whose own term and whole tail
    # are both below tolerance.
    total = 0.0
    start = 1
    while True:
        t = np.arange(start, start + _CHUNK, dtype=np.float64)
        terms = terms_fn(t)
        done = (terms < tolerance) & (tail_bound_fn(t) < tolerance)
        if done.any():
            stop = int(np.argmax(done))
            return total + math.fsum(terms[: stop + 1])
        total += math.fsum(terms)
        start += _CHUNK


def _radam_dampening(t, beta2):
    # 1 - omega_t rewritten to avoid cancellation as omega_t -> 1:
    # 1 - omega^2 = gap * (1 - 8 / (rho_inf * rho_t)) / f(rho_inf),
    # with f(rho) = (rho - 4)(rho - 2) / rho.
    r_inf = rho_inf(beta2)
    gap = _rho_gap(t, beta2)
    rho_t = r_inf - gap
    out = np.ones_like(t)
    active = rho_t > RHO_THRESHOLD
    f_inf = (r_inf - 4.0) * (r_inf - 2.0) / r_inf
    one_minus_sq = gap[active] * (1.0 - 8.0 / (r_inf * rho_t[active])) / f_inf
    omega = np.sqrt(1.0 - one_minus_sq)
    out[active] = one_minus_sq / (1.0 + omega)
    return out


def _radam_tail_bound(t, beta2):
    # sum_{s>t} (1 - omega_s) <= sum_{s>t} gap_s / f(rho_inf), and
    # sum_{s>t} s b^s = b^(t+1) ((t+1) - t b) / (1 - b)^2.
    r_inf = rho_inf(beta2)
    f_inf = (r_inf - 4.0) * (r_inf - 2.0) / r_inf
    b = beta2
    log_b = math.log(b)
    geo = np.exp((t + 1.0) * log_b) * ((t + 1.0) - t * b) / (1.0 - b) ** 2
    return 2.0 * geo / (-np.expm1((t + 1.0) * log_b)) / f_inf


def effective_warmup_period(
    schedule: WarmupSchedule, tolerance: float = DEFAULT_TOLERANCE
) -> float:
    """Total dampening ``sum_{t>=1} (1 - omega_t)`` of a schedule.

    Linear warmup uses the exact finite sum.  Exponential and RAdam sums are
    truncated once both the current term and an analytic bound on the
    remaining tail fall below ``tolerance``.  RAdam's momentum-phase factors
    count as zero.
    """
    if not tolerance > 0:
        raise InvalidArgumentError("tolerance must be positive")
    kind = schedule.kind
    if kind is ScheduleKind.CONSTANT_ONE:
        return 0.0
    if kind is ScheduleKind.LINEAR:
        n = math.floor(schedule.tau)
        return n - n * (n + 1) / (2.0 * schedule.tau)
    if kind is ScheduleKind.EXPONENTIAL:
        tau = schedule.tau
        ratio = -math.expm1(-1.0 / tau)
        return _truncated_sum(
            lambda t: np.exp(-t / tau),
            lambda t: np.exp(-(t + 1.0) / tau) / ratio,
            tolerance,
        )
    beta2 = schedule.beta2
    if rho_inf(beta2) <= RHO_THRESHOLD:
        raise InvalidArgumentError(
            f"RAdam never leaves its momentum phase for beta2={beta2}; period diverges"
        )
    return _truncated_sum(
        lambda t: _radam_dampening(t, beta2),
        lambda t: _radam_tail_bound(t, beta2),
        tolerance,
    )
