"""Parameter and nuisance-function estimation.

Moment estimators of the gamma shape/scale pair (complete and censored
data), gamma maximum likelihood as an alternative fit, and the
Kaplan-Meier estimator of the *censoring* survival function, where the
roles of events and censorings are swapped: the curve jumps at censoring
times and treats failures as censored-for-the-curve.

Conventions fixed once for the whole package:

* Inverse-probability-of-censoring weights always evaluate the censoring
  survival curve at the left limit ``K(t-)``, which keeps the largest
  observation usable when it is uncensored.
* At tied times, failures are processed before censoring events, so tied
  failures have already left the risk set of a censoring event.
* Moment estimators use the n-denominator variance (mean of squares minus
  squared mean).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .distributions import GammaParams

__all__ = [
    "CensoredSample",
    "KaplanMeierCurve",
    "as_sample",
    "moment_estimates",
    "mle_estimates",
    "km_censoring_survival",
    "ipcw_weights",
    "ipcw_mean",
    "moment_estimates_censored",
]


def as_sample(x) -> np.ndarray:
    """Validate and return a 1-d array of strictly positive lifetimes."""
    xs = np.asarray(x, dtype=float)
    if xs.ndim != 1:
        xs = np.ravel(xs)
    if xs.size == 0:
        raise ValueError("sample is empty")
    if np.any(~np.isfinite(xs)) or np.any(xs <= 0.0):
        raise ValueError("lifetimes must be strictly positive finite reals")
    return xs


@dataclass(frozen=True)
class CensoredSample:
    """Right-censored observations ``(Y, delta)``.

    ``time`` holds Y = min(X, C) and ``event`` the indicator delta = I(X <= C),
    1 for an observed failure and 0 for a censored lifetime.  At least two
    failures are required; with fewer, none of the estimators downstream
    are defined.
    """

    time: np.ndarray
    event: np.ndarray

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float)
        event = np.asarray(self.event)
        if time.ndim != 1 or event.shape != time.shape:
            raise ValueError("time and event must be 1-d arrays of equal length")
        if time.size == 0:
            raise ValueError("censored sample is empty")
        if np.any(~np.isfinite(time)) or np.any(time <= 0.0):
            raise ValueError("times must be strictly positive finite reals")
        if not np.all((event == 0) | (event == 1)):
            raise ValueError("event indicators must be 0 (censored) or 1 (failure)")
        event = event.astype(np.int8)
        if int(event.sum()) < 2:
            raise ValueError("need at least two uncensored observations")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def n_censored(self) -> int:
        return int(self.n - self.event.sum())


@dataclass(frozen=True)
class KaplanMeierCurve:
    """Right-continuous product-limit step function with left-limit access.

    ``survival[i]`` is the curve value on ``[times[i], times[i+1])``; the
    value before the first jump is 1.
    """

    times: np.ndarray
    survival: np.ndarray

    def at(self, t):
        """Survival value at ``t`` (right-continuous)."""
        idx = np.searchsorted(self.times, t, side="right")
        padded = np.concatenate(([1.0], self.survival))
        out = padded[idx]
        return float(out) if np.ndim(t) == 0 else out

    def at_left(self, t):
        """Left limit of the survival value at ``t``."""
        idx = np.searchsorted(self.times, t, side="left")
        padded = np.concatenate(([1.0], self.survival))
        out = padded[idx]
        return float(out) if np.ndim(t) == 0 else out


def moment_estimates(x) -> GammaParams:
    """Gamma fit from the first two moments: k = m1^2/v, scale = v/m1.

    The variance is the plug-in form ``mean(x^2) - mean(x)^2``.  A sample
    with no spread has no gamma moment fit and raises ``ValueError``.
    """
    xs = as_sample(x)
    if xs.size < 2:
        raise ValueError("moment estimation needs at least two observations")
    m1 = float(np.mean(xs))
    m2 = float(np.mean(xs * xs))
    var = m2 - m1 * m1
    if var <= 0.0:
        raise ValueError("degenerate sample: plug-in variance is not positive")
    return GammaParams(m1 * m1 / var, var / m1)


def mle_estimates(x) -> GammaParams:
    """Gamma maximum likelihood fit.

    Solves ``log k - digamma(k) = log(mean) - mean(log)`` for the shape and
    sets scale = mean/k.  Used for the real-data illustrations; the test
    statistics default to :func:`moment_estimates`.
    """
    xs = as_sample(x)
    if xs.size < 2:
        raise ValueError("maximum likelihood needs at least two observations")
    s = float(np.log(np.mean(xs)) - np.mean(np.log(xs)))
    if s <= 0.0:
        raise ValueError("degenerate sample: all values identical")
    k = float(optimize.brentq(
        lambda k: np.log(k) - special.digamma(k) - s, 1e-10, 1e10,
        xtol=1e-14, rtol=8.9e-16,
    ))
    return GammaParams(k, float(np.mean(xs)) / k)


def km_censoring_survival(cs: CensoredSample) -> KaplanMeierCurve:
    """Kaplan-Meier estimate of the censoring survival function.

    Censoring indicators (delta = 0) are the events of this curve.  At a
    tied time, failures leave the risk set first, so the at-risk count for
    the censoring events at ``t`` is ``#{Y >= t} - #{Y == t, delta == 1}``.
    """
    order = np.argsort(cs.time, kind="stable")
    times = cs.time[order]
    event = cs.event[order]

    uniq, start = np.unique(times, return_index=True)
    # counts per distinct time
    n_at = cs.n - start  # #{Y >= t}, times sorted ascending
    fail_cum = np.concatenate(([0], np.cumsum(event == 1)))
    cens_cum = np.concatenate(([0], np.cumsum(event == 0)))
    end = np.concatenate((start[1:], [cs.n]))
    fails = fail_cum[end] - fail_cum[start]
    cens = cens_cum[end] - cens_cum[start]

    has_jump = cens > 0
    risk = n_at[has_jump] - fails[has_jump]
    factors = 1.0 - cens[has_jump] / risk
    return KaplanMeierCurve(times=uniq[has_jump], survival=np.cumprod(factors))


def ipcw_weights(cs: CensoredSample, km: KaplanMeierCurve) -> np.ndarray:
    """Per-observation weights ``delta_i / K(Y_i-)``; zero for censored rows.

    Raises if the curve has already hit zero at an uncensored observation,
    naming the first offending index.
    """
    k_left = km.at_left(cs.time)
    uncensored = cs.event == 1
    singular = uncensored & (k_left <= 0.0)
    if np.any(singular):
        idx = int(np.flatnonzero(singular)[0])
        raise ValueError(
            f"IPCW weight singular at index {idx}: censoring survival K(Y-) = 0 "
            f"for uncensored time {cs.time[idx]!r}"
        )
    weights = np.zeros(cs.n)
    weights[uncensored] = 1.0 / k_left[uncensored]
    return weights


def ipcw_mean(cs: CensoredSample, power: int, km: KaplanMeierCurve) -> float:
    """IPCW estimate of ``E(X^power)``: ``mean(Y^power * delta / K(Y-))``.

    Reduces to the ordinary sample moment when nothing is censored.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    weights = ipcw_weights(cs, km)
    yp = cs.time if power == 1 else cs.time * cs.time
    return float(np.mean(yp * weights))


def moment_estimates_censored(cs: CensoredSample, km: KaplanMeierCurve | None = None) -> GammaParams:
    """Gamma moment fit from IPCW first and second moments.

    With all observations uncensored this equals :func:`moment_estimates`
    on the times exactly.
    """
    if km is None:
        km = km_censoring_survival(cs)
    m1 = ipcw_mean(cs, 1, km)
    m2 = ipcw_mean(cs, 2, km)
    var = m2 - m1 * m1
    if var <= 0.0:
        raise ValueError("degenerate censored sample: implied variance is not positive")
    return GammaParams(m1 * m1 / var, var / m1)
