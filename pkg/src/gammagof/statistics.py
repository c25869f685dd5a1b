"""Complete-data goodness-of-fit statistics for the gamma family.

The primary statistic measures departure from the fixed-point identity
``F(t) = E[((1-k)/X + 1/lambda) * min(X, t)]``, which holds exactly if and
only if X follows a gamma law.  It reduces to two degree-2 U-statistics
(pairwise minimum and pairwise half-ratio) combined with estimates of the
shape/scale pair:

    value = U_min / scale + (1 - shape) * U_ratio - shape / 2

Also provided: Kolmogorov-Smirnov and Cramer-von Mises distances to a
fitted gamma CDF, and two weighted-integral statistics (``hme``, the
empirical-Laplace-transform test of Henze et al., and ``be``, the
fixed-point integral test of Betsch and Ebner) with weight exp(-a*t).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import GammaParams, gamma_cdf
from .estimators import as_sample, moment_estimates

__all__ = [
    "SteinStatistic",
    "kernel_min",
    "kernel_ratio",
    "u_statistic",
    "stein_statistic",
    "ks_statistic",
    "cvm_statistic",
    "hme_statistic",
    "be_statistic",
]


def kernel_min(x1, x2):
    """Pairwise minimum; the kernel behind ``U_min``."""
    out = np.minimum(x1, x2)
    return float(out) if np.ndim(out) == 0 else out


def kernel_ratio(x1, x2):
    """Symmetric half-ratio kernel: ``(min/max)/2`` for distinct arguments.

    Exact ties contribute 0: both strict-inequality indicators in the
    defining form ``(x1/x2) I(x1<x2) + (x2/x1) I(x2<x1)`` are false.
    """
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    out = np.where(a == b, 0.0, 0.5 * np.minimum(a, b) / np.maximum(a, b))
    return float(out) if out.ndim == 0 else out


def u_statistic(x, kernel) -> float:
    """Degree-2 U-statistic: average of ``kernel`` over all unordered pairs.

    ``kernel`` must be symmetric and broadcast over numpy arrays.
    """
    xs = as_sample(x)
    n = xs.size
    if n < 2:
        raise ValueError("a degree-2 U-statistic needs at least two observations")
    total = 0.0
    for i in range(n - 1):
        total += float(np.sum(kernel(xs[i], xs[i + 1:])))
    return 2.0 * total / (n * (n - 1))


def _pair_min_mean(xs_sorted: np.ndarray) -> float:
    # each sorted value is the minimum in its pairs with all later values
    n = xs_sorted.size
    counts = np.arange(n - 1, -1, -1, dtype=float)
    return 2.0 * float(xs_sorted @ counts) / (n * (n - 1))


def _strict_prefix_sums(xs_sorted: np.ndarray, values: np.ndarray) -> np.ndarray:
    # sum of `values` over entries strictly smaller than each sorted entry
    cum = np.concatenate(([0.0], np.cumsum(values)))
    first = np.searchsorted(xs_sorted, xs_sorted, side="left")
    return cum[first]


def _pair_ratio_mean(xs_sorted: np.ndarray) -> float:
    n = xs_sorted.size
    prefix = _strict_prefix_sums(xs_sorted, xs_sorted)
    return float(np.sum(prefix / xs_sorted)) / (n * (n - 1))


@dataclass(frozen=True)
class SteinStatistic:
    """Fixed-point departure statistic with its building blocks."""

    value: float
    u_min: float
    u_ratio: float
    params: GammaParams


def stein_statistic(x, params: GammaParams | None = None) -> SteinStatistic:
    """Fixed-point departure statistic on a complete sample.

    Parameters
    ----------
    x : array_like
        Strictly positive lifetimes, at least two.
    params : GammaParams, optional
        Shape/scale pair to plug in.  By default the moment estimates of
        the sample itself are used.
    """
    xs = np.sort(as_sample(x))
    if xs.size < 2:
        raise ValueError("the statistic needs at least two observations")
    p = moment_estimates(xs) if params is None else params
    u1 = _pair_min_mean(xs)
    u2 = _pair_ratio_mean(xs)
    value = u1 / p.scale + (1.0 - p.shape) * u2 - 0.5 * p.shape
    return SteinStatistic(value=float(value), u_min=u1, u_ratio=u2, params=p)


def ks_statistic(x, params: GammaParams) -> float:
    """Kolmogorov-Smirnov distance ``max(D+, D-)`` to the gamma CDF at ``params``."""
    xs = np.sort(as_sample(x))
    n = xs.size
    f = np.atleast_1d(gamma_cdf(xs, params))
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus))


def cvm_statistic(x, params: GammaParams) -> float:
    """Cramer-von Mises distance ``1/(12n) + sum((F(x_(i)) - (2i-1)/(2n))^2)``."""
    xs = np.sort(as_sample(x))
    n = xs.size
    f = np.atleast_1d(gamma_cdf(xs, params))
    i = np.arange(1, n + 1)
    return float(1.0 / (12.0 * n) + np.sum((f - (2.0 * i - 1.0) / (2.0 * n)) ** 2))


# ---------------------------------------------------------------------------
# weighted-integral statistics


def _hme_curves(t: np.ndarray, y_rows: np.ndarray, shapes: np.ndarray) -> np.ndarray:
    """``Z(t)/sqrt(n)`` rows for the Laplace-transform statistic.

    ``Z(t) = sqrt(n) [ (1+t) L'(t) + k L(t) ]`` with L the empirical Laplace
    transform of the scale-normalized sample and L' its exact derivative
    ``-mean(y * exp(-t y))``.
    """
    e = np.exp(-t[None, :, None] * y_rows[:, None, :])
    lap = e.mean(axis=2)
    dlap = -(y_rows[:, None, :] * e).mean(axis=2)
    return (1.0 + t[None, :]) * dlap + shapes[:, None] * lap


def _poly_exp_tail(alpha, beta, decay, t0):
    """``integral_{t0}^inf (alpha + beta t)^2 exp(-decay t) dt`` (vectorized)."""
    p = (alpha + beta * t0) ** 2
    p1 = 2.0 * beta * (alpha + beta * t0)
    p2 = 2.0 * beta * beta
    return np.exp(-decay * t0) * (p / decay + p1 / decay**2 + p2 / decay**3)


def _panel_rule(upper: float, n_panels: int, order: int = 12):
    nodes_ref, weights_ref = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * nodes_ref[None, :]).ravel()
    weights = (half[:, None] * weights_ref[None, :]).ravel()
    return nodes, weights


def _hme_quadrature(y_rows, shapes, decay, nodes, weights):
    m = y_rows.shape[0]
    out = np.empty(m)
    # chunk rows to bound the (rows, nodes, n) working set
    chunk = max(1, int(4_000_000 // max(1, nodes.size * y_rows.shape[1])))
    wexp = weights * np.exp(-decay * nodes)
    for start in range(0, m, chunk):
        z = _hme_curves(nodes, y_rows[start:start + chunk], shapes[start:start + chunk])
        out[start:start + chunk] = (z * z) @ wexp
    return out


def _hme_batch(y_rows: np.ndarray, shapes: np.ndarray, decay: float) -> np.ndarray:
    """Laplace-transform statistic per row of scale-normalized samples."""
    m, n = y_rows.shape
    ymin = y_rows.min(axis=1)
    ybar = y_rows.mean(axis=1)
    ymax = float(y_rows.max())

    # truncation point: the analytic tail bound of n*(Z/sqrt(n))^2*exp(-a t)
    # must fall below 1e-12 of the accumulated integral for every row
    row_decay = decay + 2.0 * ymin
    upper = max(2.0, 12.0 / float(row_decay.min()))
    panels = int(np.clip(np.ceil(upper * (decay + ymax) / 3.0), 16, 512))
    nodes, weights = _panel_rule(upper, panels)
    vals = _hme_quadrature(y_rows, shapes, decay, nodes, weights)
    for _ in range(60):
        tails = _poly_exp_tail(ybar + shapes, ybar, row_decay, upper)
        if np.all(tails <= 1e-12 * np.maximum(vals, 1e-300)):
            break
        upper *= 1.5
        panels = int(np.clip(np.ceil(upper * (decay + ymax) / 3.0), 16, 512))
        nodes, weights = _panel_rule(upper, panels)
        vals = _hme_quadrature(y_rows, shapes, decay, nodes, weights)

    # refine until two successive panel counts agree to 1e-7 relative
    for _ in range(6):
        panels *= 2
        nodes, weights = _panel_rule(upper, panels)
        finer = _hme_quadrature(y_rows, shapes, decay, nodes, weights)
        if np.all(np.abs(finer - vals) <= 1e-7 * np.maximum(np.abs(finer), 1e-300)):
            return n * finer
        vals = finer
    raise RuntimeError("quadrature for the Laplace-transform statistic did not converge")


def _be_batch(y_rows_sorted: np.ndarray, shapes: np.ndarray, decay: float) -> np.ndarray:
    """Fixed-point integral statistic per row, by exact segment integration.

    The integrand is piecewise ``(A + B t)^2 exp(-a t)`` between order
    statistics, so each segment has a closed-form integral.
    """
    m, n = y_rows_sorted.shape
    y = y_rows_sorted
    a = decay
    coef = (1.0 - shapes[:, None]) / y + 1.0
    cy = np.cumsum(coef * y, axis=1)
    cc = np.cumsum(coef, axis=1)
    ctot = cc[:, -1:]

    counts = np.arange(1, n + 1, dtype=float)
    slope_a = np.concatenate([np.zeros((m, 1)), (cy[:, :-1] - counts[:-1]) / n], axis=1)
    slope_b = np.concatenate([ctot, ctot - cc[:, :-1]], axis=1) / n
    lo = np.concatenate([np.zeros((m, 1)), y[:, :-1]], axis=1)
    hi = y

    def antiderivative(t, alpha, beta):
        q = alpha + beta * t
        return -np.exp(-a * t) * (q * q / a + 2.0 * beta * q / a**2 + 2.0 * beta * beta / a**3)

    finite = antiderivative(hi, slope_a, slope_b) - antiderivative(lo, slope_a, slope_b)
    tail_alpha = (cy[:, -1] - n) / n
    tail = tail_alpha * tail_alpha * np.exp(-a * y[:, -1]) / a
    return n * np.maximum(finite.sum(axis=1) + tail, 0.0)


def hme_statistic(x, weight_decay: float = 1.0, params: GammaParams | None = None) -> float:
    """Empirical-Laplace-transform statistic with weight ``exp(-a t)``.

    The sample is normalized by the estimated scale before the transform;
    by default the moment estimates are used.
    """
    if weight_decay <= 0.0:
        raise ValueError("weight_decay must be positive")
    xs = as_sample(x)
    if xs.size < 2:
        raise ValueError("the statistic needs at least two observations")
    p = moment_estimates(xs) if params is None else params
    y = np.sort(xs) / p.scale
    return float(_hme_batch(y[None, :], np.array([p.shape]), weight_decay)[0])


def be_statistic(x, weight_decay: float = 1.0, params: GammaParams | None = None) -> float:
    """Fixed-point integral statistic with weight ``exp(-a t)``, exact in t."""
    if weight_decay <= 0.0:
        raise ValueError("weight_decay must be positive")
    xs = as_sample(x)
    if xs.size < 2:
        raise ValueError("the statistic needs at least two observations")
    p = moment_estimates(xs) if params is None else params
    y = np.sort(xs) / p.scale
    return float(_be_batch(y[None, :], np.array([p.shape]), weight_decay)[0])


# ---------------------------------------------------------------------------
# row-batched internals shared with the resampling module


def _moment_fit_rows(rows: np.ndarray):
    """Moment fits per row: (shape, scale, valid) with valid = positive variance."""
    m1 = rows.mean(axis=1)
    m2 = np.mean(rows * rows, axis=1)
    var = m2 - m1 * m1
    valid = var > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        shape = np.where(valid, m1 * m1 / var, np.nan)
        scale = np.where(valid, var / m1, np.nan)
    return shape, scale, valid


def _stein_rows(rows: np.ndarray):
    """Fixed-point statistic per row; rows with no moment fit come back NaN."""
    m, n = rows.shape
    xs = np.sort(rows, axis=1)
    shape, scale, valid = _moment_fit_rows(xs)

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
        values = u1 / scale + (1.0 - shape) * u2 - 0.5 * shape
    values = np.where(valid, values, np.nan)
    return values, valid


def _ks_rows(rows: np.ndarray):
    m, n = rows.shape
    xs = np.sort(rows, axis=1)
    shape, scale, valid = _moment_fit_rows(xs)
    with np.errstate(invalid="ignore"):
        f = special.gammainc(shape[:, None], xs / scale[:, None])
    i = np.arange(1, n + 1)
    values = np.maximum(np.max(i / n - f, axis=1), np.max(f - (i - 1) / n, axis=1))
    return np.where(valid, values, np.nan), valid


def _cvm_rows(rows: np.ndarray):
    m, n = rows.shape
    xs = np.sort(rows, axis=1)
    shape, scale, valid = _moment_fit_rows(xs)
    with np.errstate(invalid="ignore"):
        f = special.gammainc(shape[:, None], xs / scale[:, None])
    i = np.arange(1, n + 1)
    values = 1.0 / (12.0 * n) + np.sum((f - (2.0 * i - 1.0) / (2.0 * n)) ** 2, axis=1)
    return np.where(valid, values, np.nan), valid


def _hme_rows(rows: np.ndarray, weight_decay: float = 1.0):
    xs = np.sort(rows, axis=1)
    shape, scale, valid = _moment_fit_rows(xs)
    values = np.full(rows.shape[0], np.nan)
    if np.any(valid):
        y = xs[valid] / scale[valid, None]
        values[valid] = _hme_batch(y, shape[valid], weight_decay)
    return values, valid


def _be_rows(rows: np.ndarray, weight_decay: float = 1.0):
    xs = np.sort(rows, axis=1)
    shape, scale, valid = _moment_fit_rows(xs)
    values = np.full(rows.shape[0], np.nan)
    if np.any(valid):
        y = xs[valid] / scale[valid, None]
        values[valid] = _be_batch(y, shape[valid], weight_decay)
    return values, valid
