"""Semi-implicit finite-difference integrator for the stochastic Allen-Cahn equation.

``dm = (1/2 m'' - V'(m)) dt + sqrt(eps) dW`` on ``[-a, b]`` with ``m(-a) = -1``
and ``m(b) = +1``. The Laplacian is implicit (one tridiagonal solve per step),
reaction and noise are explicit. Noise for step ``k`` is read from counter
``k`` of the replica's Philox stream.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_banded

from acwall import observability
from acwall.errors import BlowUpError, ConvergenceError, ResourceError, ValidationError
from acwall.io import Table, read_series, write_binary, write_series, write_sidecar
from acwall.profiles import Domain, FloatArray, Profile, eval_potential, trapezoid_weights, wave_profile
from acwall.rng import NoiseStream, Stream
from acwall.settings import GridSettings, SolverSettings, load_grid_settings, load_solver_settings
from acwall.spectral.eigen import SpectralPair


logger = logging.getLogger('acwall.Spde')

RELAX_TIME_STEP = 0.05


def build_domain(a: float, b: float, dx_target: float, *, settings: GridSettings | None = None) -> Domain:
    """Smallest uniform grid on ``[-a, b]`` whose spacing does not exceed ``dx_target``."""
    if not (math.isfinite(dx_target) and dx_target > 0):
        raise ValidationError('dx must be > 0', details={'dx': dx_target})
    settings = settings or load_grid_settings()
    intervals = math.ceil((a + b) / dx_target - 1e-9)
    n = max(intervals, 2) + 1
    if n > settings.max_grid_points:
        raise ResourceError(
            'grid would exceed the configured point cap',
            details={'n': n, 'max_grid_points': settings.max_grid_points},
        )
    return Domain(a, b, n)


def sample_noise_increment(dom: Domain, dt: float, noise: NoiseStream, step: int) -> FloatArray:
    """Independent ``N(0, dt/dx)`` draws on the interior nodes for time step ``step``."""
    return noise.normal(step, dom.interior_size) * math.sqrt(dt / dom.dx)


@dataclass(frozen=True, slots=True, eq=False)
class SpdeConfig:
    domain: Domain
    eps: float
    dt: float
    horizon: float
    stride: int
    seed: int
    initial: Profile
    heat_only: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise ValidationError('eps must be >= 0', details={'eps': self.eps})
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError('dt must be > 0', details={'dt': self.dt})
        if not (math.isfinite(self.horizon) and self.horizon >= self.dt):
            raise ValidationError('horizon must be >= dt', details={'horizon': self.horizon, 'dt': self.dt})
        if self.stride < 1:
            raise ValidationError('snapshot stride must be >= 1', details={'stride': self.stride})
        if self.initial.domain != self.domain:
            raise ValidationError('initial profile lives on a different domain')
        if not self.heat_only and not self.initial.is_dirichlet():
            raise ValidationError(
                'initial profile must equal -1 and +1 at the endpoints',
                details={'left': float(self.initial.values[0]), 'right': float(self.initial.values[-1])},
            )

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def boundary(self) -> tuple[float, float]:
        if self.heat_only:
            return float(self.initial.values[0]), float(self.initial.values[-1])
        return -1.0, 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            'a': self.domain.a,
            'b': self.domain.b,
            'n': self.domain.n,
            'dx': self.domain.dx,
            'eps': self.eps,
            'dt': self.dt,
            'horizon': self.horizon,
            'stride': self.stride,
            'seed': self.seed,
            'heat_only': self.heat_only,
        }


@dataclass(frozen=True, slots=True, eq=False)
class FieldTrajectory:
    """Snapshots ``values[k]`` of the field at ``times[k]``."""

    times: FloatArray
    values: NDArray[np.float64]
    config: SpdeConfig

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def domain(self) -> Domain:
        return self.config.domain

    def profile(self, index: int) -> Profile:
        return Profile(self.config.domain, self.values[index])

    @property
    def snapshots(self) -> list[tuple[float, Profile]]:
        return [(float(t), self.profile(index)) for index, t in enumerate(self.times)]

    @property
    def final(self) -> Profile:
        return self.profile(len(self) - 1)


@dataclass(slots=True)
class _Stepper:
    """Semi-implicit step; the band matrix is built once per run."""

    config: SpdeConfig
    noise: NoiseStream
    threshold: float
    band: FloatArray = field(init=False)
    coupling: float = field(init=False)

    def __post_init__(self) -> None:
        dom = self.config.domain
        self.coupling = self.config.dt / (2.0 * dom.dx**2)
        size = dom.interior_size
        self.band = np.zeros((3, size))
        self.band[0, 1:] = -self.coupling
        self.band[1, :] = 1.0 + 2.0 * self.coupling
        self.band[2, :-1] = -self.coupling

    def __call__(self, values: FloatArray, step: int) -> FloatArray:
        cfg = self.config
        left, right = cfg.boundary
        interior = values[1:-1]
        rhs = interior.copy()
        if not cfg.heat_only:
            _, dv, _ = eval_potential(interior)
            rhs -= cfg.dt * dv
        if cfg.eps > 0:
            rhs += math.sqrt(cfg.eps) * sample_noise_increment(cfg.domain, cfg.dt, self.noise, step)
        rhs[0] += self.coupling * left
        rhs[-1] += self.coupling * right
        out = np.empty_like(values)
        out[1:-1] = solve_banded((1, 1), self.band, rhs, check_finite=False)
        out[0], out[-1] = left, right
        if not np.all(np.isfinite(out)) or float(np.max(np.abs(out))) > self.threshold:
            raise BlowUpError('field left the admissible range', step=step)
        return out


def step_semi_implicit(
    state: Profile,
    cfg: SpdeConfig,
    noise: NoiseStream | None = None,
    step: int = 1,
    *,
    settings: GridSettings | None = None,
) -> Profile:
    """One step ``(I - dt D2/2) m_new = m - dt V'(m) + sqrt(eps) xi``, endpoints re-pinned."""
    if state.domain != cfg.domain:
        raise ValidationError('state lives on a different domain than the config')
    settings = settings or load_grid_settings()
    noise = noise or NoiseStream(cfg.seed, Stream.SPDE)
    stepper = _Stepper(cfg, noise, settings.blowup_threshold)
    try:
        return state.with_values(stepper(state.values, step))
    except BlowUpError as exc:
        raise BlowUpError(str(exc), step=step, last_good=state) from exc


def simulate(cfg: SpdeConfig, *, settings: GridSettings | None = None) -> FieldTrajectory:
    """Step to the horizon, keeping the initial profile and every ``stride``-th state."""
    settings = settings or load_grid_settings()
    stepper = _Stepper(cfg, NoiseStream(cfg.seed, Stream.SPDE), settings.blowup_threshold)
    steps = cfg.steps
    count = steps // cfg.stride + 1
    values = np.empty((count, cfg.domain.n))
    times = cfg.dt * cfg.stride * np.arange(count)
    values[0] = cfg.initial.values
    current = cfg.initial.values.copy()
    with observability.start_span('spde.simulate', cfg.to_dict()):
        for step in range(1, steps + 1):
            try:
                current = stepper(current, step)
            except BlowUpError as exc:
                last = (step - 1) // cfg.stride
                observability.lifecycle('spde.blowup', {'step': step, 'seed': cfg.seed, 'eps': cfg.eps})
                logger.error('SPDE run blew up', extra={'step': step, 'seed': cfg.seed, 'eps': cfg.eps})
                raise BlowUpError(
                    str(exc),
                    step=step,
                    last_good=Profile(cfg.domain, values[last].copy()),
                    details={'last_good_time': float(times[last])},
                ) from exc
            if step % cfg.stride == 0:
                values[step // cfg.stride] = current
    return FieldTrajectory(times, values, cfg)


def relax_deterministic(
    dom: Domain,
    tol: float = 1e-10,
    *,
    dt: float = RELAX_TIME_STEP,
    settings: SolverSettings | None = None,
) -> Profile:
    """Stationary profile ``m*`` by noiseless stepping from the wave centered at the midpoint."""
    if not tol > 0:
        raise ValidationError('tolerance must be > 0', details={'tol': tol})
    settings = settings or load_solver_settings()
    initial = wave_profile(0.5 * (dom.b - dom.a), dom)
    cfg = SpdeConfig(dom, 0.0, dt, dt, 1, 0, initial)
    stepper = _Stepper(cfg, NoiseStream(0, Stream.SPDE), math.inf)
    current = initial.values
    for step in range(1, settings.relax_max_steps + 1):
        following = stepper(current, step)
        residual = float(np.max(np.abs(following - current))) / dt
        current = following
        if residual <= tol:
            logger.debug('Relaxed to stationary profile', extra={'a': dom.a, 'b': dom.b, 'step': step})
            return Profile(dom, current)
    raise ConvergenceError(
        'stationary profile did not converge within the step cap',
        details={'steps': settings.relax_max_steps, 'residual': residual, 'tol': tol},
    )


def initial_profile(spec: str, dom: Domain) -> Profile:
    """Initial data from ``wave:<zeta>`` or ``file:<path>`` (CSV whose last column holds the values)."""
    kind, _, argument = spec.partition(':')
    if kind == 'wave':
        try:
            zeta = float(argument)
        except ValueError as exc:
            raise ValidationError(f'invalid wave center in {spec!r}') from exc
        dom.require_center(zeta)
        return wave_profile(zeta, dom)
    if kind == 'file':
        table = read_series(Path(argument))
        values = table.rows[:, -1] if table.rows.shape[0] else np.empty(0)
        if values.shape != (dom.n,):
            raise ValidationError(
                'initial profile file does not match the grid',
                details={'path': argument, 'expected': dom.n, 'actual': values.shape},
            )
        values = values.copy()
        values[0], values[-1] = -1.0, 1.0
        return Profile(dom, values)
    raise ValidationError(f'initial profile must be wave:<zeta> or file:<path>, got {spec!r}')


def project_modes(traj: FieldTrajectory, base: Profile, pairs: Sequence[SpectralPair], k: int) -> FloatArray:
    """Coordinates ``<m(t) - base, Psi_i>`` for ``i < k``, one row per snapshot."""
    if k > len(pairs):
        raise ValidationError('not enough eigenpairs for the requested modes', details={'k': k, 'pairs': len(pairs)})
    dom = traj.domain
    deviation = traj.values - base.values
    modes = np.stack([pair.eigenfunction.values for pair in pairs[:k]], axis=1)
    return (deviation * trapezoid_weights(dom)) @ modes


@dataclass(frozen=True, slots=True)
class ModeVariance:
    mode: int
    measured: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.measured / self.predicted


def mode_variance(
    coordinates: FloatArray,
    eps: float,
    pairs: Sequence[SpectralPair],
    *,
    modes: Sequence[int] | None = None,
    burn_in: int = 0,
) -> list[ModeVariance]:
    """Sample variance of each projected coordinate against the linear prediction ``eps / (2 lambda_i)``."""
    modes = list(range(coordinates.shape[1])) if modes is None else list(modes)
    samples = coordinates[burn_in:]
    if samples.shape[0] < 2:
        raise ValidationError('mode variance needs at least two samples after burn-in')
    return [
        ModeVariance(index, float(np.var(samples[:, index], ddof=1)), eps / (2.0 * pairs[index].eigenvalue))
        for index in modes
    ]


def trajectory_table(traj: FieldTrajectory) -> Table:
    columns = ('time', *(f'x{index}' for index in range(traj.domain.n)))
    return Table(columns, np.column_stack([traj.times, traj.values]))


def write_trajectory_csv(path: str | Path, traj: FieldTrajectory, *, config_hash: str | None = None) -> Path:
    target = write_series(path, trajectory_table(traj))
    write_sidecar(target, {'kind': 'spde_trajectory', **traj.config.to_dict()}, config_hash=config_hash)
    return target


def write_trajectory_binary(path: str | Path, traj: FieldTrajectory, *, config_hash: str | None = None) -> Path:
    """Column-major ``(snapshots, n)`` dump; the sidecar lists the grid and the snapshot times."""
    return write_binary(
        path,
        traj.values,
        {
            'kind': 'spde_trajectory',
            'grid': traj.domain.grid().tolist(),
            'times': traj.times.tolist(),
            **traj.config.to_dict(),
        },
        config_hash=config_hash,
    )
