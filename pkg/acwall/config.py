"""Experiment recipes: one TOML or JSON document per run.

A document carries the envelope ``kind``, ``seed``, ``replicas`` and
``output_dir`` plus a ``params`` table for the experiment kind. When
``params`` is absent every non-envelope key is read as a parameter, so
``{"a": 3, "b": 3, "dx": 0.002, "zeta": 0}`` is a complete spectral recipe
once the kind is known.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import tomllib
import types
import typing
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Union

from acwall.errors import ConfigValidationError
from acwall.rng import derive_seed
from acwall.settings import load_runner_settings


SEED_LIMIT = 2**64
_ENVELOPE = ('kind', 'seed', 'replicas', 'output_dir', 'params')


class ExperimentKind(StrEnum):
    SPECTRAL = 'spectral'
    SPDE = 'spde'
    SDE = 'sde'
    WALL = 'wall'
    DRIFT_FIT = 'drift_fit'


@dataclass(frozen=True, slots=True)
class SpectralParams:
    a: float
    b: float
    dx: float
    zeta: float = 0.0
    k: int = 4
    potential: str = 'translation_exact'

    def validate(self) -> None:
        _check_interval(self.a, self.b, self.dx)
        _require(-self.a < self.zeta < self.b, 'zeta', 'must lie strictly inside (-a, b)')
        _require(self.k >= 1, 'k', 'must be >= 1')
        _require(self.potential in ('translation_exact', 'pointwise'), 'potential', 'unknown potential kind')


@dataclass(frozen=True, slots=True)
class SpdeParams:
    a: float
    b: float
    dx: float
    eps: float
    dt: float
    horizon: float
    stride: int = 1
    init: str = 'wave:0'
    heat_only: bool = False
    binary: bool = False
    track: bool = True
    tol: float = 1e-12
    block_length: float | None = None
    rescale: str | None = None
    tube_radius: float | None = None
    wall_margin: float | None = None
    center_fraction: float | None = None

    def validate(self) -> None:
        _check_interval(self.a, self.b, self.dx)
        _require(math.isfinite(self.eps) and self.eps >= 0, 'eps', 'must be >= 0')
        _require(math.isfinite(self.dt) and self.dt > 0, 'dt', 'must be > 0')
        _require(math.isfinite(self.horizon) and self.horizon >= self.dt, 'horizon', 'must be >= dt')
        _require(self.stride >= 1, 'stride', 'must be >= 1')
        _require(self.init.startswith(('wave:', 'file:')), 'init', "must be 'wave:<zeta>' or 'file:<path>'")
        if self.init.startswith('wave:'):
            try:
                zeta = float(self.init.removeprefix('wave:'))
            except ValueError:
                raise ConfigValidationError('params.init', 'wave center is not a number') from None
            _require(-self.a < zeta < self.b, 'init', 'wave center must lie strictly inside (-a, b)')
        _require(self.tol > 0, 'tol', 'must be > 0')
        if self.block_length is not None:
            _require(self.block_length >= self.dt * self.stride, 'block_length', 'must be >= the snapshot spacing')
        if self.rescale is not None:
            _require(self.rescale in ('soft', 'hard'), 'rescale', "must be 'soft' or 'hard'")
            _require(0.0 < self.eps < 1.0, 'eps', 'rescaling needs eps in (0, 1)')
        if self.tube_radius is not None:
            _require(self.tube_radius > 0, 'tube_radius', 'must be > 0')
        if self.wall_margin is not None:
            _require(self.wall_margin > 0, 'wall_margin', 'must be > 0')
        if self.center_fraction is not None:
            _require(0.0 < self.center_fraction < 1.0, 'center_fraction', 'must lie in (0, 1)')


@dataclass(frozen=True, slots=True)
class SdeParams:
    dt: float
    steps: int
    drift: str = 'soft_wall'
    gamma: float | None = None
    sigma2: float = 0.75
    y0: float = 0.0
    paths: int = 1
    record_every: int = 1
    lam: float | None = None

    def validate(self) -> None:
        _require(self.drift in ('soft_wall', 'sinh', 'penalized', 'exp_wall'), 'drift', 'unknown drift kind')
        if self.drift in ('penalized', 'exp_wall'):
            _require(self.gamma is not None and self.gamma > 0, 'gamma', f'{self.drift} drift needs gamma > 0')
        _require(math.isfinite(self.dt) and self.dt > 0, 'dt', 'must be > 0')
        _require(self.steps >= 1, 'steps', 'must be >= 1')
        _require(math.isfinite(self.sigma2) and self.sigma2 > 0, 'sigma2', 'must be > 0')
        _require(math.isfinite(self.y0), 'y0', 'must be finite')
        _require(self.paths >= 1, 'paths', 'must be >= 1')
        _require(self.record_every >= 1, 'record_every', 'must be >= 1')
        if self.lam is not None:
            _require(self.lam > 0, 'lam', 'must be > 0')


@dataclass(frozen=True, slots=True)
class WallParams:
    gammas: tuple[float, ...]
    dt: float
    steps: int
    delta: float = 0.1
    sigma2: float = 0.75

    def validate(self) -> None:
        _require(len(self.gammas) > 0, 'gammas', 'must not be empty')
        _require(all(g > 1 for g in self.gammas), 'gammas', 'every gamma must be > 1')
        _require(math.isfinite(self.dt) and self.dt > 0, 'dt', 'must be > 0')
        _require(self.steps >= 1, 'steps', 'must be >= 1')
        _require(self.delta > 0, 'delta', 'must be > 0')
        _require(self.delta <= self.steps * self.dt, 'delta', 'must not exceed the horizon')
        _require(self.delta >= self.dt, 'delta', 'must be >= dt')
        _require(self.sigma2 > 0, 'sigma2', 'must be > 0')


@dataclass(frozen=True, slots=True)
class DriftFitParams:
    inputs: tuple[str, ...]
    lag: int = 1
    bins: int = 20
    value_min: float | None = None
    value_max: float | None = None
    min_count: int | None = None

    def validate(self) -> None:
        _require(len(self.inputs) > 0, 'inputs', 'must name at least one CSV file')
        _require(self.lag >= 1, 'lag', 'must be >= 1')
        _require(self.bins >= 1, 'bins', 'must be >= 1')
        _require((self.value_min is None) == (self.value_max is None), 'value_max', 'give both range ends or none')
        if self.value_min is not None and self.value_max is not None:
            _require(self.value_max > self.value_min, 'value_max', 'must exceed value_min')
        if self.min_count is not None:
            _require(self.min_count >= 2, 'min_count', 'must be >= 2')

    @property
    def value_range(self) -> tuple[float, float] | None:
        if self.value_min is None or self.value_max is None:
            return None
        return self.value_min, self.value_max


Params = SpectralParams | SpdeParams | SdeParams | WallParams | DriftFitParams

PARAMS_BY_KIND: dict[ExperimentKind, type[Any]] = {
    ExperimentKind.SPECTRAL: SpectralParams,
    ExperimentKind.SPDE: SpdeParams,
    ExperimentKind.SDE: SdeParams,
    ExperimentKind.WALL: WallParams,
    ExperimentKind.DRIFT_FIT: DriftFitParams,
}


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    kind: ExperimentKind
    params: Params
    output_dir: str = field(default_factory=lambda: load_runner_settings().output_dir)
    seed: int = 0
    replicas: int = 1

    def seeds(self) -> list[int]:
        return [derive_seed(self.seed, index) for index in range(self.replicas)]


def _require(condition: bool, name: str, message: str) -> None:
    if not condition:
        raise ConfigValidationError(f'params.{name}', message)


def _check_interval(a: float, b: float, dx: float) -> None:
    _require(math.isfinite(a) and a > 0, 'a', 'must be > 0')
    _require(math.isfinite(b) and b > 0, 'b', 'must be > 0')
    _require(a <= b, 'a', 'must be <= b')
    _require(math.isfinite(dx) and 0 < dx < a + b, 'dx', 'must lie in (0, a + b)')


def _coerce(value: Any, hint: Any, path: str) -> Any:
    origin = typing.get_origin(hint)
    if origin in (Union, types.UnionType):
        options = typing.get_args(hint)
        if value is None:
            if type(None) in options:
                return None
            raise ConfigValidationError(path, 'must not be null')
        inner = [option for option in options if option is not type(None)]
        return _coerce(value, inner[0], path)
    if origin is tuple:
        if not isinstance(value, list | tuple):
            raise ConfigValidationError(path, 'must be a list')
        item_hint = typing.get_args(hint)[0]
        return tuple(_coerce(item, item_hint, f'{path}[{index}]') for index, item in enumerate(value))
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigValidationError(path, 'must be a boolean')
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int | float) or not float(value).is_integer():
            raise ConfigValidationError(path, 'must be an integer')
        return int(value)
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigValidationError(path, 'must be a number')
        if not math.isfinite(float(value)):
            raise ConfigValidationError(path, 'must be finite')
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigValidationError(path, 'must be a string')
        return value
    raise ConfigValidationError(path, f'unsupported field type {hint!r}')


def _build_params(cls: type[Any], block: Mapping[str, Any]) -> Params:
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in block:
        if key not in known:
            raise ConfigValidationError(f'params.{key}', 'unknown field')
    values: dict[str, Any] = {}
    for name, spec in known.items():
        if name not in block:
            if spec.default is dataclasses.MISSING and spec.default_factory is dataclasses.MISSING:
                raise ConfigValidationError(f'params.{name}', 'missing required field')
            continue
        values[name] = _coerce(block[name], hints[name], f'params.{name}')
    params = cls(**values)
    params.validate()
    return params


def _load_document(source: str | bytes | Mapping[str, Any] | Path) -> dict[str, Any]:
    if isinstance(source, Mapping):
        return dict(source)
    if isinstance(source, Path):
        try:
            text = source.read_text(encoding='utf-8')
        except OSError as exc:
            raise ConfigValidationError('config', f'cannot read {source}: {exc}') from exc
        if source.suffix.lower() == '.toml':
            return _parse_toml(text)
        if source.suffix.lower() == '.json':
            return _parse_json(text)
        source = text
    text = source.decode('utf-8') if isinstance(source, bytes) else source
    if text.lstrip().startswith('{'):
        return _parse_json(text)
    return _parse_toml(text)


def _parse_json(text: str) -> dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError('config', f'invalid JSON: {exc}') from exc
    if not isinstance(document, dict):
        raise ConfigValidationError('config', 'top level must be an object')
    return document


def _parse_toml(text: str) -> dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigValidationError('config', f'invalid TOML: {exc}') from exc


def parse_config(
    source: str | bytes | Mapping[str, Any] | Path,
    kind: ExperimentKind | str | None = None,
) -> ExperimentConfig:
    """Validate a recipe and map it onto :class:`ExperimentConfig`.

    ``source`` is document text (JSON when it starts with ``{``, TOML
    otherwise), a parsed mapping, or a file path whose suffix picks the
    format. ``kind`` supplies or checks the experiment kind.
    """
    document = _load_document(source)
    declared = document.get('kind')
    if declared is not None and not isinstance(declared, str):
        raise ConfigValidationError('kind', 'must be a string')
    if declared is not None and kind is not None and str(kind) != declared:
        raise ConfigValidationError('kind', f'document declares {declared!r} but {str(kind)!r} was requested')
    name = declared if declared is not None else kind
    if name is None:
        raise ConfigValidationError('kind', 'missing required field')
    try:
        resolved = ExperimentKind(str(name))
    except ValueError:
        raise ConfigValidationError('kind', f'unknown experiment kind {name!r}') from None

    if 'params' in document:
        block = document['params']
        if not isinstance(block, Mapping):
            raise ConfigValidationError('params', 'must be a table')
        extra = [key for key in document if key not in _ENVELOPE]
        if extra:
            raise ConfigValidationError(extra[0], 'unknown field')
    else:
        block = {key: value for key, value in document.items() if key not in _ENVELOPE}
    params = _build_params(PARAMS_BY_KIND[resolved], block)

    envelope: dict[str, Any] = {}
    if 'seed' in document:
        seed = _coerce(document['seed'], int, 'seed')
        if not 0 <= seed < SEED_LIMIT:
            raise ConfigValidationError('seed', 'must lie in [0, 2**64)')
        envelope['seed'] = seed
    if 'replicas' in document:
        replicas = _coerce(document['replicas'], int, 'replicas')
        if replicas < 1:
            raise ConfigValidationError('replicas', 'must be >= 1')
        envelope['replicas'] = replicas
    if 'output_dir' in document:
        envelope['output_dir'] = _coerce(document['output_dir'], str, 'output_dir')
    return ExperimentConfig(kind=resolved, params=params, **envelope)


def config_to_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    params = {
        key: list(value) if isinstance(value, tuple) else value for key, value in dataclasses.asdict(cfg.params).items()
    }
    return {
        'kind': str(cfg.kind),
        'seed': cfg.seed,
        'replicas': cfg.replicas,
        'output_dir': cfg.output_dir,
        'params': params,
    }


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical JSON; ``parse_config(serialize_config(c)) == c``."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2)


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def with_overrides(cfg: ExperimentConfig, **changes: Any) -> ExperimentConfig:
    """Copy of ``cfg`` with envelope or parameter fields replaced and revalidated.

    ``None`` values are ignored so unset CLI flags can be passed straight through.
    """
    document = config_to_dict(cfg)
    for key, value in changes.items():
        if value is None:
            continue
        if key in _ENVELOPE:
            document[key] = value
        else:
            document['params'][key] = value
    return parse_config(document)
