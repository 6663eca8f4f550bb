"""Interface center of a magnetization profile and the paths it traces.

The center of ``f`` is the root of ``g(zeta) = <f - wave_zeta, wave'_zeta>``,
the point at which the residual is orthogonal to the translation mode.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path as FilePath
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from acwall import observability
from acwall.errors import (
    BracketingError,
    ConvergenceError,
    InitializationError,
    InputError,
    ResolutionError,
    TubeError,
    ValidationError,
)
from acwall.io import Table, write_series, write_sidecar
from acwall.profiles import FloatArray, Profile, eval_wave, eval_wave_second, trapezoid_weights
from acwall.sdelab import Path
from acwall.settings import StoppingSettings, load_stopping_settings
from acwall.spde import FieldTrajectory
from acwall.stats import DriftFit, estimate_drift, linear_fit


logger = logging.getLogger('acwall.Interface')

FIRST_ORDER = 0.75
SECOND_ORDER = 9.0 / 16.0
BRACKET_HALF_WIDTH = 1.0
FLAT_DERIVATIVE = 0.1
MAX_ITERATIONS = 200


@dataclass(frozen=True, slots=True)
class StoppingSpec:
    """Tube radius ``delta``, wall margin ``ell`` and the center fraction ``alpha``."""

    tube_radius: float = 0.3
    wall_margin: float = 1.0
    center_fraction: float = 0.8

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tube_radius) and self.tube_radius > 0):
            raise ValidationError('tube_radius must be > 0', details={'tube_radius': self.tube_radius})
        if not (math.isfinite(self.wall_margin) and self.wall_margin > 0):
            raise ValidationError('wall_margin must be > 0', details={'wall_margin': self.wall_margin})
        if not 0.0 < self.center_fraction < 1.0:
            raise ValidationError(
                'center_fraction must lie in (0, 1)', details={'center_fraction': self.center_fraction}
            )

    @classmethod
    def from_settings(cls, settings: StoppingSettings | None = None) -> StoppingSpec:
        settings = settings or load_stopping_settings()
        return cls(settings.tube_radius, settings.wall_margin, settings.center_fraction)

    def to_dict(self) -> dict[str, float]:
        return {
            'tube_radius': self.tube_radius,
            'wall_margin': self.wall_margin,
            'center_fraction': self.center_fraction,
        }


class TimeScale(StrEnum):
    RAW = 'raw'
    SOFT = 'soft'
    HARD = 'hard'


@dataclass(frozen=True, slots=True, eq=False)
class InterfacePath:
    """Centers ``X(t)`` on strictly increasing times, possibly rescaled.

    ``source`` keeps the raw path a rescaled one was built from.
    """

    times: FloatArray
    centers: FloatArray
    tag: TimeScale = TimeScale.RAW
    eps: float | None = None
    lam: float | None = None
    stopped_at: float | None = None
    source: InterfacePath | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        centers = np.asarray(self.centers, dtype=np.float64)
        if times.ndim != 1 or times.shape != centers.shape:
            raise ValidationError(
                'times and centers must be 1-D arrays of equal length',
                details={'times': times.shape, 'centers': centers.shape},
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValidationError('interface times must be strictly increasing')
        if self.stopped_at is not None and times.size and times[-1] > self.stopped_at:
            raise ValidationError('interface path has entries after its stopping time')
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'centers', centers)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def spacing(self) -> float:
        if self.times.size < 2:
            raise InputError('a path with fewer than two samples has no spacing')
        return float(np.median(np.diff(self.times)))

    def to_table(self) -> Table:
        return Table.from_columns(time=self.times, center=self.centers)

    def meta(self) -> dict[str, Any]:
        return {'eps': self.eps, 'mode': str(self.tag), 'lambda': self.lam, 'stopped_at': self.stopped_at}


def _residual(f: Profile, zeta: float, x: FloatArray, weights: FloatArray) -> tuple[float, float, float]:
    """``(g, g', ||wave'||^2)`` at ``zeta``."""
    wave, slope = eval_wave(zeta, x)
    curvature = eval_wave_second(zeta, x)
    deviation = f.values - wave
    weighted_slope = weights * slope
    energy = float(weighted_slope @ slope)
    g = float(weighted_slope @ deviation)
    derivative = energy - float((weights * curvature) @ deviation)
    return g, derivative, energy


def tube_distance(f: Profile, zeta: float) -> float:
    """``||f - wave_zeta||_inf`` on the grid."""
    wave, _ = eval_wave(zeta, f.domain.grid())
    return float(np.max(np.abs(f.values - wave)))


def _require_tube(f: Profile, zeta: float, spec: StoppingSpec) -> None:
    dom = f.domain
    distance = tube_distance(f, zeta)
    if not distance < spec.tube_radius:
        raise TubeError(
            'profile lies outside the tube around the wave',
            details={'zeta': zeta, 'distance': distance, 'tube_radius': spec.tube_radius},
        )
    if not (-dom.a + spec.wall_margin < zeta < dom.b - spec.wall_margin):
        raise TubeError(
            'center is closer to a wall than the margin allows',
            details={'zeta': zeta, 'a': dom.a, 'b': dom.b, 'wall_margin': spec.wall_margin},
        )


def solve_center(f: Profile, guess: float, tol: float = 1e-12, *, spec: StoppingSpec | None = None) -> float:
    """Root of ``<f - wave_zeta, wave'_zeta>`` near ``guess``.

    Newton steps inside a bracket of half-width one around ``guess``; a step
    that leaves the bracket, or a derivative below 0.1 in magnitude, falls
    back to bisection. Converged when ``|g| <= tol * ||wave'||^2``.
    """
    spec = spec or StoppingSpec.from_settings()
    dom = f.domain
    _require_tube(f, guess, spec)
    x = dom.grid()
    weights = trapezoid_weights(dom)

    lo = max(guess - BRACKET_HALF_WIDTH, -dom.a)
    hi = min(guess + BRACKET_HALF_WIDTH, dom.b)
    g_lo = _residual(f, lo, x, weights)[0]
    g_hi = _residual(f, hi, x, weights)[0]
    if g_lo == 0.0:
        return _accept(f, lo, spec)
    if g_hi == 0.0:
        return _accept(f, hi, spec)
    if (g_lo > 0) == (g_hi > 0):
        raise BracketingError(
            'center equation has no sign change on the bracket',
            details={'lo': lo, 'hi': hi, 'g_lo': g_lo, 'g_hi': g_hi},
        )
    increasing = g_hi > 0

    zeta = guess
    for _ in range(MAX_ITERATIONS):
        g, derivative, energy = _residual(f, zeta, x, weights)
        if abs(g) <= tol * energy:
            return _accept(f, zeta, spec)
        if (g > 0) == increasing:
            hi = zeta
        else:
            lo = zeta
        candidate = zeta - g / derivative if abs(derivative) >= FLAT_DERIVATIVE else math.nan
        zeta = candidate if lo < candidate < hi else 0.5 * (lo + hi)
        if hi - lo <= 4.0 * np.finfo(np.float64).eps * max(1.0, abs(zeta)):
            break
    g, _, energy = _residual(f, zeta, x, weights)
    if abs(g) <= tol * energy:
        return _accept(f, zeta, spec)
    raise ConvergenceError(
        'center iteration stalled before meeting the tolerance',
        details={'zeta': zeta, 'residual': g, 'tol': tol},
    )


def _accept(f: Profile, zeta: float, spec: StoppingSpec) -> float:
    _require_tube(f, zeta, spec)
    return float(zeta)


def center_expansion(z: float, f: Profile) -> tuple[float, float]:
    """First and second order corrections to ``z`` from the residual ``f - wave_z``."""
    dom = f.domain
    x = dom.grid()
    weights = trapezoid_weights(dom)
    wave, slope = eval_wave(z, x)
    curvature = eval_wave_second(z, x)
    deviation = weights * (f.values - wave)
    along_slope = float(deviation @ slope)
    along_curvature = float(deviation @ curvature)
    return -FIRST_ORDER * along_slope, -SECOND_ORDER * along_slope * along_curvature


def _zero_crossing(f: Profile) -> float:
    values = f.values
    x = f.domain.grid()
    above = np.flatnonzero(values >= 0.0)
    if above.size == 0 or above[0] == 0:
        return 0.0
    i = int(above[0])
    span = values[i] - values[i - 1]
    if span == 0.0:
        return float(x[i])
    return float(x[i - 1] - values[i - 1] * (x[i] - x[i - 1]) / span)


def track_centers(traj: FieldTrajectory, spec: StoppingSpec | None = None, tol: float = 1e-12) -> InterfacePath:
    """Centers of every snapshot until the profile leaves the tube or ``|X| >= alpha a``.

    A tube exit excludes the offending snapshot; reaching ``alpha a`` keeps
    it. Either way ``stopped_at`` is the time of that snapshot.
    """
    spec = spec or StoppingSpec.from_settings()
    dom = traj.domain
    times: list[float] = []
    centers: list[float] = []
    stopped_at: float | None = None
    reason: str | None = None
    guess = _zero_crossing(traj.profile(0))

    for index, t in enumerate(traj.times):
        profile = traj.profile(index)
        try:
            center = solve_center(profile, guess, tol, spec=spec)
        except (TubeError, BracketingError) as exc:
            if index == 0:
                raise InitializationError(
                    'first snapshot has no center inside the tube',
                    details={'cause': exc.__class__.__name__, **exc.details},
                ) from exc
            stopped_at, reason = float(t), 'tube_exit'
            break
        times.append(float(t))
        centers.append(center)
        guess = center
        if abs(center) >= spec.center_fraction * dom.a:
            stopped_at, reason = float(t), 'center_fraction'
            break

    if stopped_at is not None:
        attributes = {'reason': reason, 'stopped_at': stopped_at, 'snapshots': len(times)}
        logger.info('Interface tracking stopped', extra=attributes)
        observability.lifecycle('interface.stopped', attributes)
    return InterfacePath(np.asarray(times), np.asarray(centers), stopped_at=stopped_at)


def rescale_path(path: InterfacePath, eps: float, mode: TimeScale | str) -> InterfacePath:
    """Soft: ``Y(tau) = X(tau / eps)``. Hard: ``Z(theta) = lam**-0.5 X(lam theta / eps)``, ``lam = log(1/eps)``."""
    if path.tag is not TimeScale.RAW:
        raise ValidationError('only raw paths can be rescaled', details={'tag': str(path.tag)})
    if not (math.isfinite(eps) and 0.0 < eps < 1.0):
        raise ValidationError('eps must lie in (0, 1)', details={'eps': eps})
    mode = TimeScale(mode)
    stopped = path.stopped_at
    if mode is TimeScale.SOFT:
        return InterfacePath(
            path.times * eps,
            path.centers.copy(),
            TimeScale.SOFT,
            eps=eps,
            stopped_at=None if stopped is None else stopped * eps,
            source=path,
        )
    if mode is TimeScale.HARD:
        lam = math.log(1.0 / eps)
        return InterfacePath(
            path.times * (eps / lam),
            path.centers / math.sqrt(lam),
            TimeScale.HARD,
            eps=eps,
            lam=lam,
            stopped_at=None if stopped is None else stopped * (eps / lam),
            source=path,
        )
    raise ValidationError('raw is not a rescaling mode')


def unscale_path(path: InterfacePath) -> InterfacePath:
    """Inverse of :func:`rescale_path`."""
    if path.tag is TimeScale.RAW:
        return path
    if path.source is not None:
        return path.source
    eps = float(path.eps)  # type: ignore[arg-type]
    if path.tag is TimeScale.SOFT:
        factor, scale = eps, 1.0
    else:
        lam = float(path.lam)  # type: ignore[arg-type]
        factor, scale = eps / lam, math.sqrt(lam)
    stopped = None if path.stopped_at is None else path.stopped_at / factor
    return InterfacePath(path.times / factor, path.centers * scale, stopped_at=stopped)


def block_sequence(path: InterfacePath, T: float) -> list[tuple[int, float]]:
    """``(n, X(t_n))`` with ``t_n`` the sample time nearest to ``t_0 + n T``."""
    spacing = path.spacing
    if not (math.isfinite(T) and T >= spacing * (1.0 - 1e-9)):
        raise ResolutionError('block length is shorter than the snapshot spacing', details={'T': T, 'spacing': spacing})
    start = float(path.times[0])
    count = math.floor((float(path.times[-1]) - start) / T * (1.0 + 1e-12)) + 1
    targets = start + T * np.arange(count)
    right = np.clip(np.searchsorted(path.times, targets), 1, len(path) - 1)
    left = right - 1
    nearer_left = np.abs(path.times[left] - targets) <= np.abs(path.times[right] - targets)
    indices = np.where(nearer_left, left, right)
    return [(n, float(path.centers[i])) for n, i in enumerate(indices)]


def block_path(blocks: Sequence[tuple[int, float]], T: float) -> Path:
    """Block centers as a path with step ``T``."""
    if not blocks:
        raise InputError('block sequence is empty')
    return Path(T, np.asarray([center for _, center in blocks], dtype=np.float64))


def binned_increment_means(
    blocks: Sequence[Sequence[tuple[int, float]]],
    T: float,
    bins: int = 10,
    *,
    value_range: tuple[float, float] | None = None,
    min_count: int | None = None,
) -> DriftFit:
    """Mean block increment per unit time, binned by the center at the block start."""
    paths = [block_path(sequence, T) for sequence in blocks if len(sequence) > 1]
    if not paths:
        raise InputError('no block sequence has an increment')
    return estimate_drift(paths, 1, bins, value_range=value_range, min_count=min_count)


def center_velocity(path: InterfacePath, window: int = 1) -> tuple[FloatArray, FloatArray]:
    """Central differences ``(X[i+w] - X[i-w]) / (t[i+w] - t[i-w])`` at the centers ``X[i]``."""
    if window < 1:
        raise InputError('velocity window must be >= 1', details={'window': window})
    if len(path) < 2 * window + 1:
        raise InputError('path is too short for the velocity window', details={'samples': len(path), 'window': window})
    ahead = slice(2 * window, None)
    behind = slice(None, -2 * window)
    velocities = (path.centers[ahead] - path.centers[behind]) / (path.times[ahead] - path.times[behind])
    return path.centers[window:-window].copy(), velocities


def velocity_law_fit(zetas: ArrayLike, velocities: ArrayLike, a: float) -> tuple[float, float]:
    """Fit ``log|v| = log(K exp(-4a)) + slope * zeta``; returns ``(slope, K)``."""
    speeds = np.abs(np.asarray(velocities, dtype=np.float64))
    if np.any(speeds == 0) or not np.all(np.isfinite(speeds)):
        raise InputError('velocities must be non-zero and finite for a log fit')
    slope, intercept, _ = linear_fit(zetas, np.log(speeds))
    return slope, math.exp(intercept + 4.0 * a)


def write_interface_path(target: str | FilePath, path: InterfacePath, *, config_hash: str | None = None) -> FilePath:
    written = write_series(target, path.to_table())
    write_sidecar(written, path.meta(), config_hash=config_hash)
    return written