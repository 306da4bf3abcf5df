"""Finite-size proxies for stochastic domination and exponent regressions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .errors import InvalidParameterError

DEFAULT_EPSILONS = (0.05, 0.1, 0.2)


@dataclass(frozen=True, eq=False)
class DominationProbe:
    """Samples of ``|X|`` against a control ``bound`` (scalar or per sample)."""
    name: str
    samples: np.ndarray = field(repr=False)
    bound: object
    N: int
    epsilon_grid: tuple = DEFAULT_EPSILONS


@dataclass(frozen=True)
class ExceedanceRow:
    epsilon: float
    factor: float
    count: int
    n: int
    frequency: float
    ci_lo: float
    ci_hi: float


def wilson_interval(k, n, confidence=0.95):
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def exceedance(probe, confidence=0.95):
    """Frequency of ``|X| > N^eps * bound`` for every ``eps`` in the grid."""
    x = np.abs(np.asarray(probe.samples, dtype=float).ravel())
    if x.size == 0:
        raise InvalidParameterError(f"probe {probe.name!r} has no samples")
    bound = np.asarray(probe.bound, dtype=float)
    if np.any(bound <= 0):
        raise InvalidParameterError("bound must be positive")
    if probe.N <= 1:
        raise InvalidParameterError("N must exceed 1")
    rows = []
    for eps in sorted(probe.epsilon_grid):
        fac = float(probe.N) ** eps
        k = int(np.count_nonzero(x > fac * bound))
        lo, hi = wilson_interval(k, x.size, confidence)
        rows.append(ExceedanceRow(float(eps), fac, k, x.size, k / x.size, lo, hi))
    return rows


@dataclass(frozen=True, eq=False)
class ScalingFit:
    observable: str
    abscissa: np.ndarray
    medians: np.ndarray
    slope: float
    intercept: float
    ci_lo: float
    ci_hi: float

    def to_dict(self):
        return {
            "observable": self.observable, "abscissa": [float(v) for v in self.abscissa],
            "medians": [float(v) for v in self.medians], "slope": self.slope,
            "ci_lo": self.ci_lo, "ci_hi": self.ci_hi,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _loglog(x, y):
    slope, icept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(icept)


def scaling_fit(abscissa, samples, observable="observable", n_boot=2000, rng=None,
                confidence=0.95, min_points=4, min_samples=100):
    """Least-squares slope of ``log median`` against ``log abscissa``.

    ``samples`` holds one array of observations per abscissa point.  The
    confidence interval is the percentile bootstrap, resampling within each
    point independently.
    """
    x = np.asarray(abscissa, dtype=float)
    groups = [np.abs(np.asarray(s, dtype=float).ravel()) for s in samples]
    if len(groups) != x.size:
        raise InvalidParameterError("one sample array per abscissa point is required")
    if x.size < min_points:
        raise InvalidParameterError(f"need at least {min_points} abscissa points")
    if min(g.size for g in groups) < min_samples:
        raise InvalidParameterError(f"need at least {min_samples} samples per point")
    if np.any(x <= 0):
        raise InvalidParameterError("abscissa values must be positive")
    med = np.array([np.median(g) for g in groups])
    if np.any(med <= 0):
        raise InvalidParameterError("medians must be positive for a log-log fit")
    slope, icept = _loglog(x, med)
    rng = np.random.default_rng(0) if rng is None else rng
    boot = np.empty(n_boot)
    for b in range(n_boot):
        mb = np.array([np.median(g[rng.integers(0, g.size, g.size)]) for g in groups])
        boot[b] = _loglog(x, np.maximum(mb, np.finfo(float).tiny))[0]
    a = (1 - confidence) / 2
    lo, hi = np.quantile(boot, [a, 1 - a])
    return ScalingFit(observable=observable, abscissa=x, medians=med, slope=slope,
                      intercept=icept, ci_lo=float(lo), ci_hi=float(hi))


@dataclass(frozen=True)
class LinearFit:
    c0: float
    c1: float
    r2: float


def log_growth_fit(L_values, y):
    """Fit ``y = c0 + c1 log L`` and report the coefficient of determination."""
    t = np.log(np.asarray(L_values, dtype=float))
    y = np.asarray(y, dtype=float)
    c1, c0 = np.polyfit(t, y, 1)
    resid = y - (c0 + c1 * t)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return LinearFit(c0=float(c0), c1=float(c1), r2=r2)


__all__ = [
    "DEFAULT_EPSILONS", "DominationProbe", "ExceedanceRow", "wilson_interval", "exceedance",
    "ScalingFit", "scaling_fit", "LinearFit", "log_growth_fit",
]
