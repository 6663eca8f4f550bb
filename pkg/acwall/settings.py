from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass

import psutil


_TRUE_VALUES = {'1', 'true', 'yes', 'on'}


def _environment(env: Mapping[str, str] | None) -> Mapping[str, str]:
    return os.environ if env is None else env


def env_str(env: Mapping[str, str], name: str, default: str) -> str:
    """Read a string environment value, preserving empty strings."""
    value = env.get(name)
    return default if value is None else value


def env_bool(env: Mapping[str, str], name: str, default: bool = False) -> bool:
    """Read a boolean env value using the permissive truth set."""
    value = env.get(name)
    if value is None:
        return default
    return value.strip().lower() in _TRUE_VALUES


def env_int(env: Mapping[str, str], name: str, default: int, *, fallback_on_invalid: bool = False) -> int:
    """Read an integer env value. Accepts ``1e7``-style spellings of whole numbers."""
    value = env.get(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        try:
            as_float = float(value)
        except ValueError:
            as_float = float('nan')
        if as_float.is_integer():
            return int(as_float)
        if fallback_on_invalid:
            return default
        raise ValueError(f'{name} must be an integer, got {value!r}') from None


def env_float(env: Mapping[str, str], name: str, default: float, *, fallback_on_invalid: bool = False) -> float:
    """Read a float env value."""
    value = env.get(name)
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        if fallback_on_invalid:
            return default
        raise


@dataclass(frozen=True, slots=True)
class GridSettings:
    max_grid_points: int = 10_000_000
    blowup_threshold: float = 10.0


@dataclass(frozen=True, slots=True)
class StoppingSettings:
    tube_radius: float = 0.3
    wall_margin: float = 1.0
    center_fraction: float = 0.8


@dataclass(frozen=True, slots=True)
class SolverSettings:
    eigen_tolerance: float = 1e-10
    mode_cutoff: float = 200.0
    relax_max_steps: int = 2_000_000


@dataclass(frozen=True, slots=True)
class RunnerSettings:
    workers: int = 1
    output_dir: str = 'results'
    min_bin_count: int = 200


def _non_negative_int(env: Mapping[str, str], name: str, default: int) -> int:
    value = env_int(env, name, default, fallback_on_invalid=True)
    return default if value < 0 else value


def _positive_float(env: Mapping[str, str], name: str, default: float) -> float:
    value = env_float(env, name, default, fallback_on_invalid=True)
    return default if value <= 0 else value


def default_worker_count() -> int:
    """Physical core count, falling back to logical cores and finally 1."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def load_grid_settings(env: Mapping[str, str] | None = None) -> GridSettings:
    """Load grid limits. An unparsable grid cap raises instead of silently lifting the limit."""
    values = _environment(env)
    max_points = env_int(values, 'ACWALL_MAX_GRID_POINTS', 10_000_000)
    if max_points < 3:
        raise ValueError('ACWALL_MAX_GRID_POINTS must be >= 3')
    return GridSettings(
        max_grid_points=max_points,
        blowup_threshold=_positive_float(values, 'ACWALL_BLOWUP_THRESHOLD', 10.0),
    )


def load_stopping_settings(env: Mapping[str, str] | None = None) -> StoppingSettings:
    """Load the default tube radius, wall margin and center fraction."""
    values = _environment(env)
    fraction = env_float(values, 'ACWALL_CENTER_FRACTION', 0.8, fallback_on_invalid=True)
    if not 0.0 < fraction < 1.0:
        fraction = 0.8
    return StoppingSettings(
        tube_radius=_positive_float(values, 'ACWALL_TUBE_RADIUS', 0.3),
        wall_margin=_positive_float(values, 'ACWALL_WALL_MARGIN', 1.0),
        center_fraction=fraction,
    )


def load_solver_settings(env: Mapping[str, str] | None = None) -> SolverSettings:
    """Load eigen-solver and relaxation limits."""
    values = _environment(env)
    return SolverSettings(
        eigen_tolerance=_positive_float(values, 'ACWALL_EIGEN_TOLERANCE', 1e-10),
        mode_cutoff=_positive_float(values, 'ACWALL_MODE_CUTOFF', 200.0),
        relax_max_steps=max(1, _non_negative_int(values, 'ACWALL_RELAX_MAX_STEPS', 2_000_000)),
    )


def load_runner_settings(env: Mapping[str, str] | None = None) -> RunnerSettings:
    """Load replica pool and output settings. ``ACWALL_WORKERS=0`` means one worker per physical core."""
    values = _environment(env)
    workers = _non_negative_int(values, 'ACWALL_WORKERS', 0)
    return RunnerSettings(
        workers=workers or default_worker_count(),
        output_dir=env_str(values, 'ACWALL_OUTPUT_DIR', 'results'),
        min_bin_count=max(1, _non_negative_int(values, 'ACWALL_MIN_BIN_COUNT', 200)),
    )
