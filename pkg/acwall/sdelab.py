"""One-dimensional limit SDEs and wall constructions.

Drifts: the soft wall ``12 exp(-4y)``, the two-wall ``-24 sinh(4y)``, the
penalized wall ``gamma max(0, -y)`` and the exponential wall
``12 gamma exp(-4 gamma y)``. Every comparison integrates its processes on one
shared noise path, so inequalities between them are checked pathwise.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from acwall.errors import BlowUpError, ValidationError
from acwall.rng import NoiseStream, Stream
from acwall.stats import modulus_of_continuity, sup_distance, total_variation


logger = logging.getLogger('acwall.SdeLab')

FloatArray = NDArray[np.float64]

# substeps shorter than dt / 2**40 mean the drift has run away
_MAX_HALVINGS = 40


@dataclass(frozen=True, slots=True, eq=False)
class Path:
    """Uniformly sampled scalar series starting at time ``origin``."""

    dt: float
    values: FloatArray
    diffusion: float = 0.0
    origin: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ValidationError('path values must be a non-empty 1-D array', details={'shape': values.shape})
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError('path step must be > 0', details={'dt': self.dt})
        object.__setattr__(self, 'values', values)

    @property
    def horizon(self) -> float:
        return (self.values.size - 1) * self.dt

    def times(self) -> FloatArray:
        return self.origin + self.dt * np.arange(self.values.size)

    def increments(self) -> FloatArray:
        return np.diff(self.values)

    def with_values(self, values: ArrayLike) -> Path:
        return Path(self.dt, np.asarray(values, dtype=np.float64), self.diffusion, self.origin)


@dataclass(frozen=True, slots=True, eq=False)
class PathEnsemble:
    """Equal-length paths stored row-wise."""

    dt: float
    values: FloatArray
    diffusion: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValidationError('ensemble values must be a non-empty 2-D array', details={'shape': values.shape})
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __iter__(self):  # type: ignore[no-untyped-def]
        return (self.path(index) for index in range(len(self)))

    def path(self, index: int) -> Path:
        return Path(self.dt, self.values[index], self.diffusion)

    def times(self) -> FloatArray:
        return self.dt * np.arange(self.values.shape[1])


class DriftKind(StrEnum):
    SOFT_WALL = 'soft_wall'
    SINH = 'sinh'
    PENALIZED = 'penalized'
    EXP_WALL = 'exp_wall'
    CUSTOM = 'custom'


@dataclass(frozen=True, slots=True)
class DriftSpec:
    kind: DriftKind
    gamma: float | None = None
    function: Callable[[Any], Any] | None = None

    def __post_init__(self) -> None:
        kind = DriftKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind in (DriftKind.PENALIZED, DriftKind.EXP_WALL):
            if self.gamma is None or not (math.isfinite(self.gamma) and self.gamma > 0):
                raise ValidationError(f'{kind.value} drift needs gamma > 0', details={'gamma': self.gamma})
        if kind is DriftKind.CUSTOM and not callable(self.function):
            raise ValidationError('custom drift needs a callable')

    @classmethod
    def soft_wall(cls) -> DriftSpec:
        return cls(DriftKind.SOFT_WALL)

    @classmethod
    def sinh(cls) -> DriftSpec:
        return cls(DriftKind.SINH)

    @classmethod
    def penalized(cls, gamma: float) -> DriftSpec:
        return cls(DriftKind.PENALIZED, gamma=gamma)

    @classmethod
    def exp_wall(cls, gamma: float) -> DriftSpec:
        return cls(DriftKind.EXP_WALL, gamma=gamma)

    @classmethod
    def custom(cls, function: Callable[[Any], Any]) -> DriftSpec:
        return cls(DriftKind.CUSTOM, function=function)

    def step_limit(self) -> float | None:
        """Largest accepted ``|drift| * h`` per substep; ``None`` disables the guard."""
        if self.kind is DriftKind.SINH:
            return 0.5
        if self.kind is DriftKind.SOFT_WALL:
            return 0.125
        if self.kind is DriftKind.EXP_WALL:
            return 0.125 / float(self.gamma)  # type: ignore[arg-type]
        return None


def drift_eval(spec: DriftSpec, x: ArrayLike) -> Any:
    """Drift at ``x``; floats in give a float out."""
    values = np.asarray(x, dtype=np.float64)
    with np.errstate(over='ignore'):
        if spec.kind is DriftKind.SOFT_WALL:
            out = 12.0 * np.exp(-4.0 * values)
        elif spec.kind is DriftKind.SINH:
            out = -24.0 * np.sinh(4.0 * values)
        elif spec.kind is DriftKind.PENALIZED:
            out = spec.gamma * np.maximum(0.0, -values)
        elif spec.kind is DriftKind.EXP_WALL:
            gamma = float(spec.gamma)  # type: ignore[arg-type]
            out = 12.0 * gamma * np.exp(-4.0 * gamma * values)
        else:
            out = np.asarray(spec.function(values), dtype=np.float64)  # type: ignore[misc]
    return float(out) if np.ndim(x) == 0 else out


def _scalar_drift(spec: DriftSpec) -> Callable[[float], float]:
    def guarded(function: Callable[[float], float]) -> Callable[[float], float]:
        def evaluate(y: float) -> float:
            try:
                return function(y)
            except OverflowError:
                return math.copysign(math.inf, function(math.copysign(1.0, y)))

        return evaluate

    if spec.kind is DriftKind.SOFT_WALL:
        return guarded(lambda y: 12.0 * math.exp(-4.0 * y))
    if spec.kind is DriftKind.SINH:
        return guarded(lambda y: -24.0 * math.sinh(4.0 * y))
    if spec.kind is DriftKind.PENALIZED:
        gamma = float(spec.gamma)  # type: ignore[arg-type]
        return lambda y: gamma * -y if y < 0.0 else 0.0
    if spec.kind is DriftKind.EXP_WALL:
        gamma = float(spec.gamma)  # type: ignore[arg-type]
        return guarded(lambda y: 12.0 * gamma * math.exp(-4.0 * gamma * y))
    function = spec.function
    return lambda y: float(function(y))  # type: ignore[misc]


def _advance_scalar(
    drift: Callable[[float], float],
    limit: float | None,
    y: float,
    dw: float,
    dt: float,
    step: int,
) -> float:
    remaining = dt
    while remaining > 0.0:
        d = drift(y)
        h = remaining
        if limit is not None:
            halvings = 0
            while abs(d) * h > limit:
                h *= 0.5
                halvings += 1
                if halvings > _MAX_HALVINGS:
                    raise BlowUpError('drift step guard could not stabilize the step', step=step)
        y = y + d * h + dw * (h / dt)
        remaining = 0.0 if h == remaining else remaining - h
    if not math.isfinite(y):
        raise BlowUpError('non-finite SDE state', step=step)
    return y


def _advance(spec: DriftSpec, y: FloatArray, dw: FloatArray, dt: float, step: int) -> FloatArray:
    """One Euler-Maruyama step for a vector of independent paths with per-path substeps."""
    limit = spec.step_limit()
    if limit is None:
        return y + np.asarray(drift_eval(spec, y)) * dt + dw
    y = y.copy()
    remaining = np.full(y.shape, dt)
    active = np.ones(y.shape, dtype=bool)
    while np.any(active):
        d = np.asarray(drift_eval(spec, y[active]))
        r = remaining[active]
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            ratio = np.abs(d) * r / limit
            halvings = np.where(ratio <= 1.0, 0.0, np.ceil(np.log2(ratio)))
        halvings = np.where(np.isfinite(ratio), halvings, np.inf)
        if np.any(halvings > _MAX_HALVINGS):
            raise BlowUpError('drift step guard could not stabilize the step', step=step)
        h = r / np.exp2(halvings)
        y[active] = y[active] + d * h + dw[active] * (h / dt)
        remaining[active] = np.where(h == r, 0.0, r - h)
        active = remaining > 0.0
    if not np.all(np.isfinite(y)):
        raise BlowUpError('non-finite SDE state', step=step)
    return y


def _warn_stiff_step(spec: DriftSpec, dt: float) -> None:
    if spec.kind is DriftKind.PENALIZED:
        limit = min(1e-4, 0.1 / float(spec.gamma))  # type: ignore[arg-type]
        if dt > limit:
            logger.warning(
                'Time step above the penalized-drift accuracy limit',
                extra={'gamma': spec.gamma, 'dt': dt, 'limit': limit},
            )


def sample_brownian(sigma2: float, dt: float, steps: int, seed: int) -> Path:
    """Brownian path with variance rate ``sigma2`` started at 0, drawn from the Brownian stream of ``seed``."""
    if not (math.isfinite(sigma2) and sigma2 >= 0):
        raise ValidationError('sigma2 must be >= 0', details={'sigma2': sigma2})
    if steps < 0:
        raise ValidationError('steps must be >= 0', details={'steps': steps})
    values = np.zeros(steps + 1)
    if steps:
        increments = NoiseStream(seed, Stream.BROWNIAN).normal(0, steps) * math.sqrt(sigma2 * dt)
        np.cumsum(increments, out=values[1:])
    return Path(dt, values, sigma2)


def euler_maruyama(spec: DriftSpec, y0: float, noise: Path) -> Path:
    """``y_{k+1} = y_k + drift(y_k) dt + (B_{k+1} - B_k)`` on the increments of ``noise``.

    Stiff drifts take proportional substeps inside a step, so the noise
    increment over each full step is always used exactly once.
    """
    _warn_stiff_step(spec, noise.dt)
    drift = _scalar_drift(spec)
    limit = spec.step_limit()
    dt = noise.dt
    increments = noise.increments().tolist()
    out = [float(y0)]
    y = float(y0)
    for step, dw in enumerate(increments, start=1):
        if limit is None:
            y = y + drift(y) * dt + dw
            if not math.isfinite(y):
                raise BlowUpError('non-finite SDE state', step=step, last_good=out[-1])
        else:
            try:
                y = _advance_scalar(drift, limit, y, dw, dt, step)
            except BlowUpError as exc:
                raise BlowUpError(str(exc), step=step, last_good=out[-1]) from exc
        out.append(y)
    return Path(dt, np.asarray(out), noise.diffusion, noise.origin)


def simulate_ensemble(
    spec: DriftSpec,
    y0: float,
    sigma2: float,
    dt: float,
    steps: int,
    paths: int,
    seed: int,
    record_every: int = 1,
) -> PathEnsemble:
    """Vectorized Euler-Maruyama for ``paths`` independent copies.

    Step ``k`` draws its ``paths`` increments at counter ``k`` of the ensemble
    stream, so nothing but the recorded samples is held in memory.
    """
    if paths < 1 or steps < 0 or record_every < 1:
        raise ValidationError(
            'ensemble needs paths >= 1, steps >= 0 and record_every >= 1',
            details={'paths': paths, 'steps': steps, 'record_every': record_every},
        )
    if not (math.isfinite(sigma2) and sigma2 >= 0):
        raise ValidationError('sigma2 must be >= 0', details={'sigma2': sigma2})
    _warn_stiff_step(spec, dt)
    stream = NoiseStream(seed, Stream.ENSEMBLE)
    scale = math.sqrt(sigma2 * dt)
    recorded = np.empty((paths, steps // record_every + 1))
    y = np.full(paths, float(y0))
    recorded[:, 0] = y
    for step in range(1, steps + 1):
        y = _advance(spec, y, stream.normal(step, paths) * scale, dt, step)
        if step % record_every == 0:
            recorded[:, step // record_every] = y
    return PathEnsemble(dt * record_every, recorded, sigma2)


def skorokhod_map(b: Path) -> tuple[Path, Path]:
    """Reflection at the origin: ``(b + L, L)`` with ``L(t) = max_{s<=t} (-b(s))^+``."""
    if b.values[0] != 0.0:
        raise ValidationError('Skorokhod map expects a path started at 0', details={'start': float(b.values[0])})
    local_time = np.maximum.accumulate(np.maximum(-b.values, 0.0))
    return b.with_values(b.values + local_time), b.with_values(local_time)


def envelope_upper(delta: float, gamma: float, b: Path) -> Path:
    """``delta + B(t) + c t + max_{s<=t} (-B(s) - c s)`` with ``c = 12 gamma exp(-4 gamma delta)``."""
    if not (delta > 0 and gamma > 0):
        raise ValidationError('envelope needs delta > 0 and gamma > 0', details={'delta': delta, 'gamma': gamma})
    c = 12.0 * gamma * math.exp(-4.0 * gamma * delta)
    t = b.dt * np.arange(b.values.size)
    running = np.maximum.accumulate(-b.values - c * t)
    return b.with_values(delta + b.values + c * t + running)


@dataclass(frozen=True, slots=True, eq=False)
class WallComparison:
    gamma: float
    delta: float
    penalized: Path
    exp_wall: Path
    envelope: Path
    lower_violation: float
    upper_violation: float
    squeeze_width: float

    def to_dict(self) -> dict[str, Any]:
        return {
            'gamma': self.gamma,
            'delta': self.delta,
            'lower_violation': self.lower_violation,
            'upper_violation': self.upper_violation,
            'squeeze_width': self.squeeze_width,
        }


def wall_comparison(gamma: float, delta: float, b: Path) -> WallComparison:
    """Integrate the penalized and exponential walls on ``b`` and measure ``Y <= X <= Z`` violations.

    ``squeeze_width`` is ``max (Z - Y)``, the room left for ``X`` between the walls.
    """
    if not gamma > 1:
        raise ValidationError('wall comparison needs gamma > 1', details={'gamma': gamma})
    penalized = euler_maruyama(DriftSpec.penalized(gamma), 0.0, b)
    exp_wall = euler_maruyama(DriftSpec.exp_wall(gamma), 0.0, b)
    envelope = envelope_upper(delta, gamma, b)
    return WallComparison(
        gamma=gamma,
        delta=delta,
        penalized=penalized,
        exp_wall=exp_wall,
        envelope=envelope,
        lower_violation=float(np.max(np.maximum(penalized.values - exp_wall.values, 0.0))),
        upper_violation=float(np.max(np.maximum(exp_wall.values - envelope.values, 0.0))),
        squeeze_width=float(np.max(envelope.values - penalized.values)),
    )


def diffusive_rescale(path: Path, lam: float) -> Path:
    """``X(t) = lam^(-1/2) Y(lam t)``: values scaled by ``lam^(-1/2)``, step by ``1/lam``."""
    if not (math.isfinite(lam) and lam > 0):
        raise ValidationError('rescaling factor must be > 0', details={'lambda': lam})
    return Path(path.dt / lam, path.values / math.sqrt(lam), path.diffusion, path.origin / lam)


@dataclass(frozen=True, slots=True)
class AprioriReport:
    infimum: float
    lower_bound: float
    modulus: float
    modulus_bound: float

    @property
    def lower_holds(self) -> bool:
        return self.infimum >= self.lower_bound

    @property
    def modulus_holds(self) -> bool:
        return self.modulus <= self.modulus_bound


def apriori_bounds(y: Path, b: Path, delta: float, gamma: float, T: float) -> AprioriReport:
    """Pathwise lower bound on ``inf Y`` and modulus bound for a penalized path ``y`` driven by ``b``."""
    omega_b = modulus_of_continuity(b, delta, T)
    count = math.floor(T / b.dt + 1e-9) + 1
    sup_b = float(np.max(np.abs(b.values[:count])))
    decay = math.exp(-delta * gamma)
    return AprioriReport(
        infimum=float(np.min(y.values[:count])),
        lower_bound=-2.0 * omega_b - 4.0 * decay * sup_b,
        modulus=modulus_of_continuity(y, delta, T),
        modulus_bound=8.0 * (omega_b + decay * sup_b),
    )


def penalization_sweep(b: Path, gammas: Sequence[float]) -> list[float]:
    """``sup |Y_gamma - Skorokhod(b)|`` for each ``gamma`` on the shared path ``b``."""
    reflected, _ = skorokhod_map(b)
    return [sup_distance(euler_maruyama(DriftSpec.penalized(gamma), 0.0, b), reflected) for gamma in gammas]


def monotonicity_gap(b: Path, gammas: Sequence[float]) -> float:
    """Largest ``Y_low(t) - Y_high(t)`` over consecutive ``gammas`` on ``b``, floored at 0.

    Zero means the penalized paths are ordered in ``gamma``; the Euler map is
    monotone while ``gamma * dt <= 1``.
    """
    ordered = sorted(float(gamma) for gamma in gammas)
    if len(ordered) < 2:
        raise ValidationError('monotonicity needs at least two gammas', details={'gammas': ordered})
    paths = [euler_maruyama(DriftSpec.penalized(gamma), 0.0, b).values for gamma in ordered]
    return max(float(np.max(np.maximum(low - high, 0.0))) for low, high in zip(paths, paths[1:]))


def stationary_density(x: ArrayLike, sigma2: float) -> FloatArray:
    """Normalized stationary density of the sinh-drift SDE on the grid ``x``: ``exp(-(12/sigma2) cosh 4x)``."""
    x = np.asarray(x, dtype=np.float64)
    if not sigma2 > 0:
        raise ValidationError('sigma2 must be > 0', details={'sigma2': sigma2})
    with np.errstate(over='ignore'):
        weight = np.exp(-(12.0 / sigma2) * (np.cosh(4.0 * x) - 1.0))
    return weight / np.trapezoid(weight, x)


def histogram_tv(samples: ArrayLike, edges: ArrayLike, density: Callable[[FloatArray], ArrayLike]) -> float:
    """Total variation between the sample histogram on ``edges`` and the bin masses of ``density``.

    Samples outside the edges form an extra bin whose reference mass is zero.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    edges = np.asarray(edges, dtype=np.float64)
    counts, _ = np.histogram(samples, bins=edges)
    outside = samples.size - int(counts.sum())
    fine = np.linspace(edges[0], edges[-1], 8 * (edges.size - 1) + 1)
    cumulative = cumulative_trapezoid(np.asarray(density(fine), dtype=np.float64), fine, initial=0.0)
    masses = np.diff(np.interp(edges, fine, cumulative))
    return total_variation(np.append(counts, outside), np.append(masses, 0.0))


def half_normal_cdf(x: ArrayLike, sigma2: float) -> Any:
    """CDF of ``|N(0, sigma2)|``."""
    values = np.asarray(x, dtype=np.float64)
    out = np.where(values > 0, erf(np.maximum(values, 0.0) / math.sqrt(2.0 * sigma2)), 0.0)
    return float(out) if np.ndim(x) == 0 else out


def soft_wall_offset(sigma2: float) -> float:
    """Effective reflection point of the soft wall, ``(gamma_E + ln(6 / sigma2)) / 4``.

    The drift ``12 exp(-4y)`` is ``-U'`` with ``U = 3 exp(-4y)``, so near the wall the
    law relaxes to the local equilibrium ``w(y) = exp(-2U / sigma2) = exp(-k exp(-4y))``,
    ``k = 6 / sigma2``, while far from it the density is flat. With
    ``u = k exp(-4y)`` the layer mass up to ``Y`` is ``E1(k exp(-4Y)) / 4``, and
    ``E1(u) = -gamma_E - ln u + O(u)`` gives ``Y - (gamma_E + ln k) / 4``: the layer
    holds as much mass as a flat density reflected at that point.
    """
    if not sigma2 > 0:
        raise ValidationError('sigma2 must be > 0', details={'sigma2': sigma2})
    return 0.25 * (float(np.euler_gamma) + math.log(6.0 / sigma2))


def soft_wall_marginal_cdf(
    x: ArrayLike,
    lam: float,
    sigma2: float,
    theta: float = 1.0,
    *,
    grid_points: int = 20_001,
) -> Any:
    """Finite-``lam`` law of ``lam^(-1/2) Y(lam theta)`` for the soft-wall SDE started at 0.

    Density proportional to ``w(sqrt(lam) x) * exp(-((x - x*)^+)^2 / (2 sigma2 theta))``
    with the boundary layer ``w(y) = exp(-(6 / sigma2) exp(-4y))`` and
    ``x* = soft_wall_offset(sigma2) / sqrt(lam)``. Tends to the half-normal
    as ``lam`` grows.
    """
    if not (lam > 0 and sigma2 > 0 and theta > 0):
        raise ValidationError(
            'lam, sigma2 and theta must be > 0',
            details={'lambda': lam, 'sigma2': sigma2, 'theta': theta},
        )
    root = math.sqrt(lam)
    offset = soft_wall_offset(sigma2) / root
    # below this the boundary-layer weight is under exp(-60)
    lowest = -0.25 * math.log(60.0 * sigma2 / 6.0) / root
    highest = offset + 12.0 * math.sqrt(sigma2 * theta)
    grid = np.linspace(lowest, highest, grid_points)
    with np.errstate(over='ignore'):
        layer = np.exp(-(6.0 / sigma2) * np.exp(-4.0 * root * grid))
    excess = np.maximum(grid - offset, 0.0)
    density = layer * np.exp(-(excess**2) / (2.0 * sigma2 * theta))
    cumulative = cumulative_trapezoid(density, grid, initial=0.0)
    cumulative /= cumulative[-1]
    out = np.interp(np.asarray(x, dtype=np.float64), grid, cumulative, left=0.0, right=1.0)
    return float(out) if np.ndim(x) == 0 else out
