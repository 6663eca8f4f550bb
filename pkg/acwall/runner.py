"""Experiment orchestration: replica dispatch, output files and the run summary.

Replicas run in a spawned process pool; every worker configures logging and
carries ``worker_id``, ``replica`` and ``seed`` in its observability context.
Workers return arrays, the parent writes all files in replica order.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import os
import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import psutil

from acwall import observability
from acwall.config import (
    DriftFitParams,
    ExperimentConfig,
    ExperimentKind,
    SdeParams,
    SpdeParams,
    SpectralParams,
    WallParams,
    config_hash,
    config_to_dict,
)
from acwall.errors import AcwallError, InputError, NumericalError, OutputError, ValidationError
from acwall.interface import (
    InterfacePath,
    StoppingSpec,
    block_sequence,
    rescale_path,
    track_centers,
    write_interface_path,
)
from acwall.io import Table, read_series, write_json, write_series, write_sidecar
from acwall.logging_config import configure_logging, package_version
from acwall.sdelab import (
    DriftKind,
    DriftSpec,
    Path as SamplePath,
    PathEnsemble,
    apriori_bounds,
    diffusive_rescale,
    histogram_tv,
    monotonicity_gap,
    penalization_sweep,
    sample_brownian,
    simulate_ensemble,
    soft_wall_marginal_cdf,
    stationary_density,
    wall_comparison,
)
from acwall.settings import load_runner_settings, load_stopping_settings
from acwall.spde import (
    FieldTrajectory,
    SpdeConfig,
    build_domain,
    initial_profile,
    simulate,
    write_trajectory_binary,
    write_trajectory_csv,
)
from acwall.spectral import spectral_report
from acwall.stats import DRIFT_FIT_COLUMNS, estimate_drift, ks_one_sample


logger = logging.getLogger('acwall.Runner')

WALL_COLUMNS = (
    'gamma',
    'lower_violation',
    'upper_violation',
    'squeeze_width',
    'sup_distance',
    'lower_holds',
    'modulus_holds',
)
SINH_TV_EDGES = np.linspace(-0.6, 0.6, 25)
_EXIT_CLASSES: dict[int, type[AcwallError]] = {2: ValidationError, 3: NumericalError, 4: OutputError}


@dataclass(frozen=True, slots=True)
class ReplicaTask:
    kind: ExperimentKind
    params: Any
    replica: int
    seed: int
    run_id: str | None = None


@dataclass(slots=True)
class ReplicaResult:
    replica: int
    seed: int
    payload: dict[str, Any] = field(default_factory=dict)
    failure: dict[str, Any] | None = None
    exit_code: int = 0
    duration_ms: float = 0.0


def log_host_banner() -> dict[str, Any]:
    """Log the host resources the run sees and return them for the summary."""
    memory = psutil.virtual_memory()
    host = {
        'cpu_physical': psutil.cpu_count(logical=False),
        'cpu_logical': psutil.cpu_count(),
        'memory_total_mb': round(memory.total / 2**20),
        'memory_available_mb': round(memory.available / 2**20),
        'pid': os.getpid(),
    }
    logger.info('Host resources', extra=host)
    return host


def _stopping_spec(params: SpdeParams) -> StoppingSpec:
    defaults = load_stopping_settings()
    return StoppingSpec(
        params.tube_radius if params.tube_radius is not None else defaults.tube_radius,
        params.wall_margin if params.wall_margin is not None else defaults.wall_margin,
        params.center_fraction if params.center_fraction is not None else defaults.center_fraction,
    )


def _spde_replica(params: SpdeParams, seed: int) -> dict[str, Any]:
    dom = build_domain(params.a, params.b, params.dx)
    cfg = SpdeConfig(
        dom,
        params.eps,
        params.dt,
        params.horizon,
        params.stride,
        seed,
        initial_profile(params.init, dom),
        heat_only=params.heat_only,
    )
    payload: dict[str, Any] = {'trajectory': simulate(cfg)}
    if params.track and not params.heat_only:
        path = track_centers(payload['trajectory'], _stopping_spec(params), params.tol)
        payload['interface'] = path
        if params.rescale is not None:
            payload['rescaled'] = rescale_path(path, params.eps, params.rescale)
        if params.block_length is not None and len(path) > 1:
            payload['blocks'] = block_sequence(path, params.block_length)
    return payload


def _sde_replica(params: SdeParams, seed: int) -> dict[str, Any]:
    spec = DriftSpec(params.drift, gamma=params.gamma)
    ensemble = simulate_ensemble(
        spec, params.y0, params.sigma2, params.dt, params.steps, params.paths, seed, params.record_every
    )
    payload: dict[str, Any] = {'ensemble': ensemble}
    final = ensemble.values[:, -1]
    if params.lam is not None:
        rescaled = np.stack([diffusive_rescale(path, params.lam).values for path in ensemble])
        payload['rescaled'] = PathEnsemble(ensemble.dt / params.lam, rescaled, ensemble.diffusion)
        if spec.kind is DriftKind.SOFT_WALL:
            theta = float(ensemble.times()[-1]) / params.lam
            statistic, p_value = ks_one_sample(
                rescaled[:, -1], lambda x: soft_wall_marginal_cdf(x, params.lam, params.sigma2, theta)
            )
            payload['ks'] = {'theta': theta, 'statistic': statistic, 'p_value': p_value}
    if spec.kind is DriftKind.SINH:
        payload['tv_stationary'] = histogram_tv(final, SINH_TV_EDGES, lambda x: stationary_density(x, params.sigma2))
    return payload


def _wall_replica(params: WallParams, seed: int) -> dict[str, Any]:
    b = sample_brownian(params.sigma2, params.dt, params.steps, seed)
    horizon = params.steps * params.dt
    sweep = penalization_sweep(b, params.gammas)
    rows = []
    for gamma, distance in zip(params.gammas, sweep, strict=True):
        comparison = wall_comparison(gamma, params.delta, b)
        bounds = apriori_bounds(comparison.penalized, b, params.delta, gamma, horizon)
        rows.append(
            (
                gamma,
                comparison.lower_violation,
                comparison.upper_violation,
                comparison.squeeze_width,
                distance,
                float(bounds.lower_holds()),
                float(bounds.modulus_holds()),
            )
        )
    payload: dict[str, Any] = {'table': Table(WALL_COLUMNS, np.asarray(rows, dtype=np.float64))}
    if len(params.gammas) > 1:
        payload['monotonicity_gap'] = monotonicity_gap(b, params.gammas)
    return payload


_REPLICA_RUNNERS: dict[ExperimentKind, Callable[[Any, int], dict[str, Any]]] = {
    ExperimentKind.SPDE: _spde_replica,
    ExperimentKind.SDE: _sde_replica,
    ExperimentKind.WALL: _wall_replica,
}


def run_replica(task: ReplicaTask) -> ReplicaResult:
    """Run one replica; failures come back as data so they cross process boundaries intact."""
    token = observability.set_context(
        {'kind': str(task.kind), 'replica': task.replica, 'seed': task.seed, 'worker_id': os.getpid()},
        run_id=task.run_id,
    )
    started = time.perf_counter()
    try:
        observability.lifecycle('replica.started')
        payload = _REPLICA_RUNNERS[task.kind](task.params, task.seed)
        observability.lifecycle('replica.succeeded')
        return ReplicaResult(task.replica, task.seed, payload, duration_ms=_elapsed_ms(started))
    except AcwallError as exc:
        observability.lifecycle('replica.failed', {'error': exc.__class__.__name__})
        logger.error('Replica failed', exc_info=True, extra={'error': exc.__class__.__name__, 'details': exc.details})
        return ReplicaResult(
            task.replica,
            task.seed,
            failure=exc.to_dict(),
            exit_code=exc.exit_code,
            duration_ms=_elapsed_ms(started),
        )
    finally:
        observability.reset_context(token)


def _elapsed_ms(started: float) -> float:
    return round((time.perf_counter() - started) * 1000.0, 3)


def _initialize_worker() -> None:
    configure_logging(log_to_console=True)


def _dispatch(tasks: Sequence[ReplicaTask], workers: int) -> Iterator[ReplicaResult]:
    processes = max(1, min(workers, len(tasks)))
    if processes == 1:
        yield from (run_replica(task) for task in tasks)
        return
    logger.info('Starting replica pool', extra={'workers': processes, 'replicas': len(tasks)})
    context = multiprocessing.get_context('spawn')
    with context.Pool(processes, initializer=_initialize_worker) as pool:
        yield from pool.imap(run_replica, tasks)


def _raise_failure(result: ReplicaResult) -> None:
    failure = result.failure or {}
    cls = _EXIT_CLASSES.get(result.exit_code, AcwallError)
    raise cls(
        f'replica {result.replica} failed: {failure.get("message", "unknown error")}',
        details={
            'replica': result.replica,
            'seed': result.seed,
            'cause': failure.get('error'),
            **failure.get('details', {}),
        },
    )


class _Writer:
    """Writes artifacts under the output directory and remembers their names."""

    def __init__(self, out_dir: Path, digest: str) -> None:
        self.out_dir = out_dir
        self.digest = digest
        self.outputs: list[str] = []

    def series(self, name: str, table: Table, meta: dict[str, Any]) -> None:
        target = write_series(self.out_dir / name, table)
        write_sidecar(target, meta, config_hash=self.digest)
        self.outputs.append(name)

    def trajectory(self, name: str, traj: FieldTrajectory, binary: bool) -> None:
        target = self.out_dir / name
        if binary:
            write_trajectory_binary(target.with_suffix('.bin'), traj, config_hash=self.digest)
            self.outputs.append(target.with_suffix('.bin').name)
        else:
            write_trajectory_csv(target, traj, config_hash=self.digest)
            self.outputs.append(name)

    def interface(self, name: str, path: InterfacePath) -> None:
        write_interface_path(self.out_dir / name, path, config_hash=self.digest)
        self.outputs.append(name)

    def report(self, name: str, payload: dict[str, Any]) -> None:
        target = write_json(self.out_dir / name, payload)
        write_sidecar(target, {'kind': 'report'}, config_hash=self.digest)
        self.outputs.append(name)


def _ensemble_table(ensemble: PathEnsemble) -> Table:
    columns = ('time', *(f'path_{index}' for index in range(len(ensemble))))
    return Table(columns, np.column_stack([ensemble.times(), ensemble.values.T]))


def _write_replica(cfg: ExperimentConfig, result: ReplicaResult, writer: _Writer) -> dict[str, Any]:
    tag = f'{result.replica:04d}'
    payload = result.payload
    record: dict[str, Any] = {'replica': result.replica, 'seed': result.seed, 'duration_ms': result.duration_ms}
    if cfg.kind is ExperimentKind.SPDE:
        params: SpdeParams = cfg.params  # type: ignore[assignment]
        writer.trajectory(f'spde_{tag}.csv', payload['trajectory'], params.binary)
        if 'interface' in payload:
            path: InterfacePath = payload['interface']
            writer.interface(f'interface_{tag}.csv', path)
            record['stopped_at'] = path.stopped_at
            record['final_center'] = float(path.centers[-1])
        if 'rescaled' in payload:
            writer.interface(f'interface_{tag}_{params.rescale}.csv', payload['rescaled'])
        if 'blocks' in payload:
            blocks = np.asarray(payload['blocks'], dtype=np.float64)
            table = Table(('n', 'center'), blocks)
            writer.series(f'blocks_{tag}.csv', table, {'kind': 'blocks', 'block_length': params.block_length})
    elif cfg.kind is ExperimentKind.SDE:
        sde: SdeParams = cfg.params  # type: ignore[assignment]
        meta = {
            'kind': 'sde_ensemble',
            'drift': sde.drift,
            'gamma': sde.gamma,
            'sigma2': sde.sigma2,
            'seed': result.seed,
        }
        writer.series(f'sde_{tag}.csv', _ensemble_table(payload['ensemble']), meta)
        if 'rescaled' in payload:
            writer.series(f'sde_{tag}_rescaled.csv', _ensemble_table(payload['rescaled']), {**meta, 'lambda': sde.lam})
        for key in ('ks', 'tv_stationary'):
            if key in payload:
                record[key] = payload[key]
    elif cfg.kind is ExperimentKind.WALL:
        table: Table = payload['table']
        writer.series(f'wall_{tag}.csv', table, {'kind': 'wall_comparison', 'seed': result.seed})
        record['max_lower_violation'] = float(np.max(table.column('lower_violation')))
        record['max_upper_violation'] = float(np.max(table.column('upper_violation')))
        if 'monotonicity_gap' in payload:
            record['monotonicity_gap'] = payload['monotonicity_gap']
    return record


def _run_spectral(params: SpectralParams, writer: _Writer) -> dict[str, Any]:
    dom = build_domain(params.a, params.b, params.dx)
    report = spectral_report(params.zeta, dom, params.k, potential=params.potential)  # type: ignore[arg-type]
    writer.report('spectral.json', report)
    return {'spectral': report}


def _read_paths(source: str) -> list[SamplePath]:
    table = read_series(source)
    if 'time' not in table.columns or table.rows.shape[0] < 2:
        raise InputError('drift input needs a time column and at least two rows', details={'path': source})
    times = table.column('time')
    dt = float(np.median(np.diff(times)))
    return [
        SamplePath(dt, table.column(name).copy(), origin=float(times[0]))
        for name in table.columns
        if name != 'time'
    ]


def _run_drift_fit(params: DriftFitParams, writer: _Writer) -> dict[str, Any]:
    paths = [path for source in params.inputs for path in _read_paths(source)]
    fit = estimate_drift(paths, params.lag, params.bins, value_range=params.value_range, min_count=params.min_count)
    rows = np.asarray(fit.rows(), dtype=np.float64)
    writer.series('drift_fit.csv', Table(DRIFT_FIT_COLUMNS, rows), {'kind': 'drift_fit', **fit.to_dict()})
    summary: dict[str, Any] = {'drift_fit': fit.to_dict()}
    try:
        slope, intercept, slope_se = fit.linear_fit()
        summary['linear'] = {'slope': slope, 'intercept': intercept, 'slope_se': slope_se}
    except InputError:
        summary['linear'] = None
    try:
        slope, intercept, slope_se = fit.log_linear_fit()
        summary['log_linear'] = {'slope': slope, 'prefactor': math.exp(intercept), 'slope_se': slope_se}
    except InputError:
        summary['log_linear'] = None
    return summary


def _prepare_output(directory: str) -> Path:
    out_dir = Path(directory)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f'could not create {out_dir}', details={'path': str(out_dir), 'error': str(exc)}) from exc
    return out_dir


def run_experiment(cfg: ExperimentConfig, *, workers: int | None = None) -> dict[str, Any]:
    """Dispatch ``cfg`` to its module, write every artifact and ``summary.json``; return the summary."""
    started = time.perf_counter()
    digest = config_hash(cfg)
    workers = workers or load_runner_settings().workers
    out_dir = _prepare_output(cfg.output_dir)
    writer = _Writer(out_dir, digest)
    token = observability.set_context({'experiment': digest[:12], 'kind': str(cfg.kind), 'seed': cfg.seed})
    try:
        host = log_host_banner()
        observability.lifecycle('experiment.started', {'replicas': cfg.replicas})
        config_file = write_json(out_dir / 'config.json', config_to_dict(cfg))
        write_sidecar(config_file, {'kind': 'config'}, config_hash=digest)
        summary: dict[str, Any] = {
            'kind': str(cfg.kind),
            'seed': cfg.seed,
            'replicas': cfg.replicas,
            'config_hash': digest,
            'version': package_version(),
            'host': host,
        }
        with observability.start_span('experiment.run', {'kind': str(cfg.kind), 'replicas': cfg.replicas}):
            if cfg.kind is ExperimentKind.SPECTRAL:
                summary['seeds'] = []
                summary.update(_run_spectral(cfg.params, writer))  # type: ignore[arg-type]
            elif cfg.kind is ExperimentKind.DRIFT_FIT:
                summary['seeds'] = []
                summary.update(_run_drift_fit(cfg.params, writer))  # type: ignore[arg-type]
            else:
                seeds = cfg.seeds()
                run_id = observability.get_run_id()
                tasks = [ReplicaTask(cfg.kind, cfg.params, index, seed, run_id) for index, seed in enumerate(seeds)]
                records = []
                for result in _dispatch(tasks, workers):
                    if result.failure is not None:
                        _raise_failure(result)
                    records.append(_write_replica(cfg, result, writer))
                summary['seeds'] = seeds
                summary['replica_results'] = records
        summary['outputs'] = list(writer.outputs)
        summary['wall_clock_seconds'] = round(time.perf_counter() - started, 6)
        write_json(out_dir / 'summary.json', summary)
        observability.lifecycle('experiment.succeeded', {'duration_ms': summary['wall_clock_seconds'] * 1000.0})
        logger.info('Experiment finished', extra={'outputs': len(writer.outputs), 'out_dir': str(out_dir)})
        return summary
    except AcwallError as exc:
        observability.lifecycle('experiment.failed', {'error': exc.__class__.__name__})
        raise
    finally:
        observability.reset_context(token)
