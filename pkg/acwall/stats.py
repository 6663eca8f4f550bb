"""Estimators and tests that connect simulated paths to their limit laws."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats as scipy_stats
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.special import kolmogorov

from acwall.errors import InputError, ResolutionError
from acwall.settings import load_runner_settings

if TYPE_CHECKING:
    from acwall.sdelab import Path, PathEnsemble


FloatArray = NDArray[np.float64]

DRIFT_FIT_COLUMNS = ('bin', 'mean', 'se', 'count')


def linear_fit(x: ArrayLike, y: ArrayLike, weights: ArrayLike | None = None) -> tuple[float, float, float]:
    """Least squares ``y = slope * x + intercept``; returns ``(slope, intercept, slope_se)``.

    ``weights`` are inverse variances of ``y``; without them the standard
    error comes from the residual scatter.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError('fit inputs must be 1-D arrays of equal length', details={'x': x.shape, 'y': y.shape})
    if x.size < 2 or np.ptp(x) == 0:
        raise InputError('a linear fit needs at least two distinct abscissae')
    if weights is None:
        result = scipy_stats.linregress(x, y)
        stderr = float(result.stderr) if x.size > 2 else float('nan')
        return float(result.slope), float(result.intercept), stderr
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != x.shape or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise InputError('weights must be positive, finite and match the data')
    (slope, intercept), covariance = np.polyfit(x, y, 1, w=np.sqrt(w), cov='unscaled')
    return float(slope), float(intercept), math.sqrt(covariance[0, 0])


@dataclass(frozen=True, slots=True, eq=False)
class DriftFit:
    """Binned conditional mean increment per unit time."""

    bin_centers: FloatArray
    mean: FloatArray
    standard_error: FloatArray
    counts: NDArray[np.int64]
    lag: int
    dt: float
    min_count: int

    def linear_fit(self) -> tuple[float, float, float]:
        """Weighted fit of the drift against the bin center."""
        return linear_fit(self.bin_centers, self.mean, 1.0 / self.standard_error**2)

    def log_linear_fit(self) -> tuple[float, float, float]:
        """Weighted fit of ``log drift`` against the bin center over bins with positive drift."""
        keep = self.mean > 0
        if int(keep.sum()) < 2:
            raise InputError('fewer than two bins with positive drift')
        relative = self.standard_error[keep] / self.mean[keep]
        return linear_fit(self.bin_centers[keep], np.log(self.mean[keep]), 1.0 / relative**2)

    def rows(self) -> list[tuple[float, float, float, int]]:
        return [
            (float(c), float(m), float(se), int(n))
            for c, m, se, n in zip(self.bin_centers, self.mean, self.standard_error, self.counts, strict=True)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            'lag': self.lag,
            'dt': self.dt,
            'min_count': self.min_count,
            'bins': len(self.counts),
        }


def _ensemble_arrays(paths: PathEnsemble | Sequence[Path]) -> tuple[list[FloatArray], float]:
    values = getattr(paths, 'values', None)
    if isinstance(values, np.ndarray) and values.ndim == 2:
        rows = list(values)
        dt = float(paths.dt)  # type: ignore[union-attr]
    else:
        sequence = list(paths)  # type: ignore[arg-type]
        if not sequence:
            raise InputError('ensemble is empty')
        dt = float(sequence[0].dt)
        if any(not math.isclose(p.dt, dt, rel_tol=1e-12) for p in sequence):
            raise InputError('ensemble paths have different time steps')
        rows = [np.asarray(p.values, dtype=np.float64) for p in sequence]
    if not rows:
        raise InputError('ensemble is empty')
    return rows, dt


def estimate_drift(
    paths: PathEnsemble | Sequence[Path],
    lag: int = 1,
    bins: int = 20,
    *,
    value_range: tuple[float, float] | None = None,
    min_count: int | None = None,
) -> DriftFit:
    """``E[Y(t + lag dt) - Y(t) | Y(t) in bin] / (lag dt)`` pooled over the ensemble.

    Bins are equal width over ``value_range`` (default: the observed range);
    bins with fewer than ``min_count`` samples are dropped.
    """
    if lag < 1:
        raise InputError('lag must be >= 1', details={'lag': lag})
    if bins < 1:
        raise InputError('bins must be >= 1', details={'bins': bins})
    rows, dt = _ensemble_arrays(paths)
    min_count = load_runner_settings().min_bin_count if min_count is None else min_count
    if any(row.size < lag + 1 for row in rows):
        raise InputError('every path needs more than lag samples', details={'lag': lag})
    starts = np.concatenate([row[:-lag] for row in rows])
    increments = np.concatenate([row[lag:] - row[:-lag] for row in rows])

    lo, hi = value_range if value_range is not None else (float(starts.min()), float(starts.max()))
    if not hi > lo:
        raise InputError('drift bins need a non-empty value range', details={'range': (lo, hi)})
    inside = (starts >= lo) & (starts <= hi)
    index = np.minimum(((starts[inside] - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    increments = increments[inside]
    counts = np.bincount(index, minlength=bins)
    sums = np.bincount(index, weights=increments, minlength=bins)
    squares = np.bincount(index, weights=increments * increments, minlength=bins)

    keep = counts >= max(min_count, 2)
    n = counts[keep].astype(np.float64)
    mean = sums[keep] / n
    variance = np.maximum(squares[keep] - n * mean * mean, 0.0) / (n - 1.0)
    scale = lag * dt
    edges = np.linspace(lo, hi, bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return DriftFit(
        bin_centers=centers[keep],
        mean=mean / scale,
        standard_error=np.sqrt(variance / n) / scale,
        counts=counts[keep],
        lag=lag,
        dt=dt,
        min_count=min_count,
    )


def estimate_diffusion(path: Path) -> float:
    """Realized quadratic variation over the horizon."""
    values = np.asarray(path.values, dtype=np.float64)
    if values.size - 1 < 100:
        raise InputError('diffusion estimate needs at least 100 increments', details={'increments': values.size - 1})
    increments = np.diff(values)
    return float(increments @ increments) / ((values.size - 1) * path.dt)


def _kolmogorov_p_value(statistic: float, effective_n: float) -> float:
    return float(np.clip(kolmogorov((effective_n + 0.12 + 0.11 / effective_n) * statistic), 0.0, 1.0))


def _samples(values: ArrayLike, name: str) -> FloatArray:
    array = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if array.size == 0:
        raise InputError(f'{name} sample is empty')
    if not np.all(np.isfinite(array)):
        raise InputError(f'{name} sample has non-finite values')
    return array


def ks_two_sample(x: ArrayLike, y: ArrayLike) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value."""
    xs = _samples(x, 'first')
    ys = _samples(y, 'second')
    pooled = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, pooled, side='right') / xs.size
    cdf_y = np.searchsorted(ys, pooled, side='right') / ys.size
    statistic = float(np.max(np.abs(cdf_x - cdf_y)))
    return statistic, _kolmogorov_p_value(statistic, math.sqrt(xs.size * ys.size / (xs.size + ys.size)))


def ks_one_sample(x: ArrayLike, cdf: Callable[[FloatArray], ArrayLike]) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic against a continuous ``cdf``."""
    xs = _samples(x, 'first')
    n = xs.size
    reference = np.asarray(cdf(xs), dtype=np.float64)
    above = np.arange(1, n + 1) / n - reference
    below = reference - np.arange(0, n) / n
    statistic = float(max(above.max(), below.max()))
    return statistic, _kolmogorov_p_value(statistic, math.sqrt(n))


def sup_distance(p: Path, q: Path) -> float:
    p_values = np.asarray(p.values, dtype=np.float64)
    q_values = np.asarray(q.values, dtype=np.float64)
    if p_values.shape != q_values.shape or not math.isclose(p.dt, q.dt, rel_tol=1e-12):
        raise InputError(
            'paths must share step and length',
            details={'p': (p_values.shape, p.dt), 'q': (q_values.shape, q.dt)},
        )
    return float(np.max(np.abs(p_values - q_values)))


def _window_steps(delta: float, dt: float) -> int:
    ratio = delta / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        # |t - s| < delta excludes the exact lag
        return int(nearest) - 1
    return math.floor(ratio)


def modulus_of_continuity(p: Path, delta: float, T: float | None = None) -> float:
    """``max |p(t) - p(s)|`` over ``|t - s| < delta`` with ``s, t`` in ``[0, T]``.

    Sliding window maximum and minimum in O(n).
    """
    values = np.asarray(p.values, dtype=np.float64)
    if delta < p.dt * (1.0 - 1e-12):
        raise ResolutionError('delta is below the path resolution', details={'delta': delta, 'dt': p.dt})
    horizon = (values.size - 1) * p.dt
    if T is None:
        T = horizon
    if T > horizon * (1.0 + 1e-12):
        raise InputError('T exceeds the path horizon', details={'T': T, 'horizon': horizon})
    values = values[: math.floor(T / p.dt + 1e-9) + 1]
    steps = _window_steps(delta, p.dt)
    if steps <= 0 or values.size < 2:
        return 0.0
    size = steps + 1
    upper = maximum_filter1d(values, size=size, mode='nearest')
    lower = minimum_filter1d(values, size=size, mode='nearest')
    return float(np.max(upper - lower))


def total_variation(p: ArrayLike, q: ArrayLike) -> float:
    """Total variation distance between two discrete distributions (normalized first)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise InputError('distributions must have the same support', details={'p': p.shape, 'q': q.shape})
    if np.any(p < 0) or np.any(q < 0) or p.sum() <= 0 or q.sum() <= 0:
        raise InputError('distributions must be non-negative with positive mass')
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())
