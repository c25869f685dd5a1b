"""Parametric-bootstrap decision rules and Monte-Carlo size/power studies.

The complete-data test draws its critical values from the bootstrap
distribution of the statistic under the fitted gamma law; the censored
test is normal-based and needs no resampling.  Replications of the power
studies run on independent RNG streams derived from a master seed and a
replication index, so results are identical for any degree of parallelism.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .censored import censored_gamma_test
from .distributions import AlternativeSpec, GammaParams, alternative_cdf, sample
from .estimators import CensoredSample, moment_estimates, mle_estimates
from .statistics import (
    SteinStatistic,
    _be_rows,
    _cvm_rows,
    _hme_rows,
    _ks_rows,
    _stein_rows,
    stein_statistic,
)

__all__ = [
    "CriticalValues",
    "TestReport",
    "PowerEstimate",
    "bootstrap_critical_values",
    "complete_gamma_test",
    "power_study",
    "calibrate_censoring_rate",
    "power_study_censored",
]

THREADS_ENV_VAR = "GAMMAGOF_THREADS"

# statistic name -> (row-batched evaluator, rejects on both tails)
_STATISTICS = {
    "delta": (_stein_rows, True),
    "ks": (_ks_rows, False),
    "cvm": (_cvm_rows, False),
    "hme": (_hme_rows, False),
    "be": (_be_rows, False),
}


@dataclass(frozen=True)
class CriticalValues:
    """Empirical bootstrap quantile pair at levels alpha/2 and 1 - alpha/2."""

    lower: float
    upper: float
    alpha: float
    n_bootstrap: int
    seed: int | None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower critical value exceeds upper")


@dataclass(frozen=True)
class TestReport:
    """Bootstrap test outcome for a complete sample."""

    statistic: SteinStatistic
    critical_values: CriticalValues
    reject: bool
    n: int
    fit: str


@dataclass(frozen=True)
class PowerEstimate:
    """Monte-Carlo rejection rate of a test under a sampling model."""

    alternative: AlternativeSpec
    n: int
    replications: int
    n_bootstrap: int
    alpha: float
    rejections: int
    excluded: int
    rate: float
    se: float
    seed: int
    statistic: str
    censoring: float | None


def _resolve_seed(seed) -> int:
    if seed is None:
        return int(np.random.SeedSequence().entropy)
    return int(seed)


def _resolve_jobs(n_jobs) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV_VAR, "1"))
    return max(1, int(n_jobs))


def _rep_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _mle_fit_rows(rows: np.ndarray):
    """Row-wise gamma MLE by vectorized Newton iteration on the shape."""
    m1 = rows.mean(axis=1)
    s = np.log(m1) - np.mean(np.log(rows), axis=1)
    valid = s > 0.0
    s_safe = np.where(valid, s, 1.0)
    k = (3.0 - s_safe + np.sqrt((s_safe - 3.0) ** 2 + 24.0 * s_safe)) / (12.0 * s_safe)
    for _ in range(60):
        f = np.log(k) - special.digamma(k) - s_safe
        fp = 1.0 / k - special.polygamma(1, k)
        step = f / fp
        k = np.maximum(k - step, k * 0.1)
        if np.all(np.abs(step) <= 1e-13 * np.abs(k) + 1e-300):
            break
    return np.where(valid, k, np.nan), np.where(valid, m1 / k, np.nan), valid


def _stein_rows_mle(rows: np.ndarray):
    """Fixed-point statistic per row with row-wise MLE shape/scale."""
    m, n = rows.shape
    xs = np.sort(rows, axis=1)
    k, lam, ok = _mle_fit_rows(xs)
    counts = np.arange(n - 1, -1, -1, dtype=float)
    u1 = 2.0 * (xs @ counts) / (n * (n - 1))
    cum = np.concatenate([np.zeros((m, 1)), np.cumsum(xs, axis=1)], axis=1)
    idx = np.arange(n)
    boundary = np.concatenate(
        [np.zeros((m, 1), dtype=int),
         np.where(xs[:, 1:] != xs[:, :-1], idx[1:], 0)], axis=1)
    first = np.maximum.accumulate(boundary, axis=1)
    prefix = np.take_along_axis(cum, first, axis=1)
    u2 = np.sum(prefix / xs, axis=1) / (n * (n - 1))
    with np.errstate(invalid="ignore"):
        vals = u1 / lam + (1.0 - k) * u2 - 0.5 * k
    return np.where(ok, vals, np.nan), ok


def _bootstrap_statistic_values(
    params: GammaParams, n: int, n_bootstrap: int,
    rng: np.random.Generator, rows_fn,
) -> np.ndarray:
    """``n_bootstrap`` statistic values under gamma(params), resampling
    degenerate draws up to a 10x attempt budget."""
    collected: list[np.ndarray] = []
    have = 0
    attempts = 0
    while have < n_bootstrap:
        want = n_bootstrap - have
        attempts += want
        if attempts > 10 * n_bootstrap:
            raise RuntimeError("bootstrap exceeded its resampling budget on degenerate draws")
        rows = params.scale * rng.standard_gamma(params.shape, (want, n))
        values, valid = rows_fn(rows)
        good = values[valid]
        collected.append(good)
        have += good.size
    return np.concatenate(collected)[:n_bootstrap]


def bootstrap_critical_values(
    params: GammaParams, n: int, n_bootstrap: int, alpha: float, seed,
    fit: str = "moment",
) -> CriticalValues:
    """Two-sided bootstrap critical values for the fixed-point statistic.

    Draws ``n_bootstrap`` gamma samples of size ``n`` at ``params``,
    evaluates the statistic on each and returns the empirical ``alpha/2``
    and ``1 - alpha/2`` quantiles (linear interpolation between order
    statistics).
    """
    if n < 2:
        raise ValueError("sample size must be at least 2")
    if n_bootstrap < 100:
        raise ValueError("need at least 100 bootstrap samples")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    rows_fn = _stein_rows_mle if fit == "mle" else _stein_rows
    resolved = _resolve_seed(seed)
    rng = np.random.default_rng(resolved)
    values = _bootstrap_statistic_values(params, n, n_bootstrap, rng, rows_fn)
    lower, upper = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0], method="linear")
    return CriticalValues(
        lower=float(lower), upper=float(upper), alpha=float(alpha),
        n_bootstrap=int(n_bootstrap), seed=resolved,
    )


def complete_gamma_test(
    x, alpha: float = 0.05, n_bootstrap: int = 10000, seed=None,
    fit: str = "moment",
) -> TestReport:
    """Bootstrap test of the gamma hypothesis on a complete sample.

    Fits the shape/scale pair (``fit="moment"`` by default, ``"mle"``
    optionally), computes the fixed-point statistic at the fitted pair,
    bootstraps its null distribution at the same pair and rejects when the
    observed value falls outside the two-sided critical interval.
    """
    if fit not in ("moment", "mle"):
        raise ValueError("fit must be 'moment' or 'mle'")
    xs = np.asarray(x, dtype=float)
    fitted = moment_estimates(xs) if fit == "moment" else mle_estimates(xs)
    stat = stein_statistic(xs, params=fitted)
    crits = bootstrap_critical_values(fitted, xs.size, n_bootstrap, alpha, seed, fit=fit)
    reject = stat.value < crits.lower or stat.value > crits.upper
    return TestReport(
        statistic=stat, critical_values=crits, reject=bool(reject),
        n=int(xs.size), fit=fit,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo studies


def _power_chunk_complete(args) -> tuple[int, int]:
    (family, params, n, n_bootstrap, alpha, statistic, seed, start, stop) = args
    spec = AlternativeSpec(family, params)
    rows_fn, two_sided = _STATISTICS[statistic]
    rejections = excluded = 0
    for rep in range(start, stop):
        rng = _rep_rng(seed, rep)
        x = sample(spec, n, rng)
        values, valid = rows_fn(x[None, :])
        if not valid[0]:
            excluded += 1
            continue
        observed = float(values[0])
        try:
            fitted = moment_estimates(x)
            boot = _bootstrap_statistic_values(fitted, n, n_bootstrap, rng, rows_fn)
        except (ValueError, RuntimeError):
            excluded += 1
            continue
        if two_sided:
            lo, hi = np.quantile(boot, [alpha / 2.0, 1.0 - alpha / 2.0], method="linear")
            rejected = observed < lo or observed > hi
        else:
            hi = np.quantile(boot, 1.0 - alpha, method="linear")
            rejected = observed > hi
        rejections += int(rejected)
    return rejections, excluded


def _power_chunk_censored(args) -> tuple[int, int]:
    (family, params, n, alpha, censoring_scale, seed, start, stop) = args
    spec = AlternativeSpec(family, params)
    rejections = excluded = 0
    for rep in range(start, stop):
        rng = _rep_rng(seed, rep)
        lifetimes = sample(spec, n, rng)
        censor_times = censoring_scale * rng.standard_exponential(n)
        observed = np.minimum(lifetimes, censor_times)
        events = (lifetimes <= censor_times).astype(np.int8)
        if int(events.sum()) < 3:
            excluded += 1
            continue
        try:
            report = censored_gamma_test(CensoredSample(observed, events), alpha)
        except ValueError:
            excluded += 1
            continue
        rejections += int(report.reject)
    return rejections, excluded


def _run_chunks(worker, base_args, replications: int, n_jobs: int):
    jobs = _resolve_jobs(n_jobs)
    if jobs == 1:
        return [worker(base_args + (0, replications))]
    bounds = np.linspace(0, replications, jobs + 1).astype(int)
    chunks = [base_args + (int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, chunks))


def _assemble_estimate(results, spec, n, replications, n_bootstrap, alpha,
                       seed, statistic, censoring) -> PowerEstimate:
    rejections = sum(r for r, _ in results)
    excluded = sum(e for _, e in results)
    effective = replications - excluded
    if effective <= 0:
        raise RuntimeError("every replication was excluded as degenerate")
    rate = rejections / effective
    se = float(np.sqrt(rate * (1.0 - rate) / effective))
    return PowerEstimate(
        alternative=spec, n=int(n), replications=int(replications),
        n_bootstrap=int(n_bootstrap), alpha=float(alpha),
        rejections=int(rejections), excluded=int(excluded),
        rate=float(rate), se=se, seed=int(seed), statistic=statistic,
        censoring=censoring,
    )


def power_study(
    alt: AlternativeSpec, n: int, replications: int, n_bootstrap: int,
    alpha: float, seed=None, statistic: str = "delta", n_jobs: int | None = 1,
) -> PowerEstimate:
    """Rejection rate of the bootstrap test under a sampling model.

    Each replication draws a sample from ``alt``, fits a gamma law by
    moments, bootstraps the statistic's null distribution at the fitted
    pair and records the rejection.  With ``alt`` gamma this estimates the
    empirical size of the test.  Replications with a degenerate moment fit
    are excluded and counted in ``excluded``.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    if statistic not in _STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; expected one of {sorted(_STATISTICS)}")
    resolved = _resolve_seed(seed)
    base = (alt.family, dict(alt.params), int(n), int(n_bootstrap),
            float(alpha), statistic, resolved)
    results = _run_chunks(_power_chunk_complete, base, replications, n_jobs)
    return _assemble_estimate(results, alt, n, replications, n_bootstrap,
                              alpha, resolved, statistic, None)


def calibrate_censoring_rate(lifetime: AlternativeSpec, target: float) -> float:
    """Exponential censoring scale b with ``P(T > C) = target``.

    ``C`` is exponential with scale b; the censored fraction
    ``P(T > C) = integral of S_T(b u) e^{-u} du`` decreases monotonically
    in b, so the equation is solved by bracketed root search.  The
    achieved fraction matches ``target`` to 1e-4 or better.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target censoring fraction must lie in (0, 1)")
    support_lo = lifetime.params["scale"] if lifetime.family == "pareto" else 0.0

    def prob_censored(b: float) -> float:
        kink = support_lo / b
        head = -float(np.expm1(-kink)) if kink > 0.0 else 0.0
        tail, _ = integrate.quad(
            lambda u: (1.0 - alternative_cdf(lifetime, b * u)) * np.exp(-u),
            kink, np.inf, limit=200,
        )
        return head + tail

    def gap(b: float) -> float:
        return prob_censored(b) - target

    lo = hi = 1.0
    while gap(hi) > 0.0:
        hi *= 4.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the censoring scale from above")
    while gap(lo) < 0.0:
        lo /= 4.0
        if lo < 1e-12:
            raise RuntimeError("failed to bracket the censoring scale from below")
    b = float(optimize.brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12))
    if abs(prob_censored(b) - target) > 1e-4:
        raise RuntimeError("censoring calibration did not reach the requested accuracy")
    return b


def power_study_censored(
    alt: AlternativeSpec, n: int, replications: int, alpha: float,
    censoring: float, seed=None, n_jobs: int | None = 1,
) -> PowerEstimate:
    """Rejection rate of the normal-based censored test under ``alt``.

    Lifetimes are drawn from ``alt`` and censored by independent
    exponential times calibrated so the expected censored fraction equals
    ``censoring``.  Replications with fewer than three uncensored points
    (or any degenerate estimate) are excluded and counted.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    scale = calibrate_censoring_rate(alt, censoring)
    resolved = _resolve_seed(seed)
    base = (alt.family, dict(alt.params), int(n), float(alpha), scale, resolved)
    results = _run_chunks(_power_chunk_censored, base, replications, n_jobs)
    return _assemble_estimate(results, alt, n, replications, 0, alpha,
                              resolved, "delta", float(censoring))
