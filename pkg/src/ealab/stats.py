"""Small statistics toolkit: means with errors, block jackknife, log-log fits, trend test."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np
from scipy import stats as _sps


def mean_se(x: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n == 0:
        return math.nan, math.nan
    m = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return m, se


def jackknife(data: np.ndarray, estimator: Callable[[np.ndarray], float], n_blocks: int = 50) -> tuple[float, float]:
    """Delete-one-block jackknife of ``estimator`` over the first axis of ``data``.

    Returns the full-sample estimate and its jackknife standard error. Blocks
    are contiguous, so the result only depends on the data order.
    """
    data = np.asarray(data)
    n = len(data)
    full = float(estimator(data))
    n_blocks = min(n_blocks, n)
    if n_blocks < 2:
        return full, math.nan
    edges = np.linspace(0, n, n_blocks + 1).astype(int)
    keep = np.ones(n, dtype=bool)
    est = np.empty(n_blocks)
    for k in range(n_blocks):
        keep[edges[k]:edges[k + 1]] = False
        est[k] = estimator(data[keep])
        keep[edges[k]:edges[k + 1]] = True
    var = (n_blocks - 1) / n_blocks * float(np.sum((est - est.mean()) ** 2))
    return full, math.sqrt(var)


def sample_variance(x: np.ndarray) -> float:
    return float(np.var(x, ddof=1)) if len(x) > 1 else 0.0


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares slope of log y against log x."""

    exponent: float
    se: float
    r2: float
    intercept: float
    fit_range: tuple
    method: str = "least squares on log-log"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fit_range"] = list(self.fit_range)
        return out


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float, float]:
    """(slope, slope SE, intercept, R^2) by ordinary least squares.

    R^2 is 1 when the residuals vanish, including for constant ``y``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two points")
    xm = x.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        raise ValueError("x values are all equal")
    slope = float(np.sum((x - xm) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_res == 0 else (1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0)
    se = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else math.nan
    return slope, se, intercept, r2


def loglog_fit(x: Sequence[float], y: Sequence[float], sign: float = 1.0, fit_range=None) -> ExponentFit:
    """Exponent ``sign * slope`` of log y vs log x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    slope, se, icpt, r2 = linear_fit(np.log(x), np.log(y))
    rng = tuple(fit_range) if fit_range is not None else tuple(float(v) for v in x)
    # 0.0 rather than -0.0 for exactly flat data
    return ExponentFit(sign * slope + 0.0, se, r2, icpt, rng)


@dataclass(frozen=True)
class TrendTest:
    tau: float
    p_value: float
    increasing: bool


def mann_kendall(x: Sequence[float], y: Sequence[float], level: float = 0.05) -> TrendTest:
    """Kendall rank correlation of y against x; significant increase at ``level``."""
    res = _sps.kendalltau(np.asarray(x), np.asarray(y))
    tau = float(res.statistic) if not np.isnan(res.statistic) else 0.0
    p = float(res.pvalue) if not np.isnan(res.pvalue) else 1.0
    return TrendTest(tau, p, bool(tau > 0 and p < level))


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else math.nan


__all__ = [
    "mean_se",
    "jackknife",
    "sample_variance",
    "ExponentFit",
    "linear_fit",
    "loglog_fit",
    "TrendTest",
    "mann_kendall",
    "binomial_se",
]
