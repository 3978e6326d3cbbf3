"""Sample statistics used by the simulation and the training probes."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, UndefinedStatisticError


def _as_samples(values, min_len=1):
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        x = x.ravel()
    if x.size < min_len:
        raise InvalidArgumentError(f"need at least {min_len} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("samples must be finite")
    return x


def _check_qs(qs):
    q = np.asarray(qs, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise InvalidArgumentError("quantile levels must be a non-empty list")
    if np.any((q <= 0) | (q >= 1)):
        raise InvalidArgumentError("quantile levels must lie in (0, 1)")
    if np.any(np.diff(q) < 0):
        raise InvalidArgumentError("quantile levels must be sorted ascending")
    return q


def quantiles(samples, qs: Sequence[float]) -> np.ndarray:
    """Linear-interpolation ("type 7") quantiles of ``samples``."""
    x = _as_samples(samples)
    q = _check_qs(qs)
    return np.quantile(x, q, method="linear")


def pearson_correlation(x, y) -> float:
    x = _as_samples(x, min_len=2)
    y = _as_samples(y, min_len=2)
    if x.size != y.size:
        raise InvalidArgumentError(f"length mismatch: {x.size} vs {y.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedStatisticError("correlation undefined for a constant input")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def coefficient_of_variation(samples) -> float:
    """Sample standard deviation (n - 1) over the absolute mean."""
    x = _as_samples(samples, min_len=2)
    mean = x.mean()
    if mean == 0.0:
        raise UndefinedStatisticError("coefficient of variation undefined for zero mean")
    return float(x.std(ddof=1) / abs(mean))


def coefficients_of_variation(samples: np.ndarray) -> np.ndarray:
    """Column-wise CV of a ``(n_samples, n_params)`` matrix.

    Columns with exactly zero mean come back as NaN.
    """
    s = np.asarray(samples, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 2:
        raise InvalidArgumentError("need a 2-D array with at least two rows")
    mean = s.mean(axis=0)
    std = s.std(axis=0, ddof=1)
    out = np.full(mean.shape, np.nan)
    ok = mean != 0.0
    out[ok] = std[ok] / np.abs(mean[ok])
    return out
