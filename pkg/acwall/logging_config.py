"""Process logging for acwall runs.

The JSON formatter writes one object per line to stderr, so stdout stays free
for summaries and tables. Each line carries the run context (run id, kind,
seed, replica, the active span) under fixed ``acwall.*`` keys; anything else
goes into ``attributes``.
"""

from __future__ import annotations

import json
import logging
import logging.handlers
import os
import sys
import traceback
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from . import observability

_STANDARD_RECORD_KEYS = frozenset(vars(logging.makeLogRecord({}))) | {'message', 'asctime'}

# context key -> output key; keys not listed here end up under ``attributes``
_OUTPUT_KEYS = {
    'run_id': 'run_id',
    'trace_id': 'trace_id',
    'span_id': 'span_id',
    'event.name': 'event.name',
    'event.domain': 'event.domain',
    'duration_ms': 'duration_ms',
    'error': 'exception.type',
    'experiment': 'acwall.experiment',
    'kind': 'acwall.kind',
    'seed': 'acwall.seed',
    'replica': 'acwall.replica',
    'worker_id': 'acwall.worker.id',
    'reason': 'acwall.reason',
    'step': 'acwall.step',
    'a': 'acwall.domain.a',
    'b': 'acwall.domain.b',
    'dx': 'acwall.domain.dx',
    'eps': 'acwall.noise.eps',
    'zeta': 'acwall.wave.zeta',
    'gamma': 'acwall.wall.gamma',
}

_ALWAYS_PRESENT = ('run_id', 'trace_id', 'span_id', 'event.name', 'event.domain', 'exception.type')

MIRRORED_EVENTS = frozenset(
    {
        'experiment.started',
        'experiment.succeeded',
        'experiment.failed',
        'replica.started',
        'replica.succeeded',
        'replica.failed',
        'spectral.solved',
        'spde.blowup',
        'interface.stopped',
        'output.written',
    }
)

_unregister_mirror: Callable[[], None] | None = None


@dataclass(frozen=True, slots=True)
class LoggingSettings:
    formatter: str
    level: int
    lifecycle_events: bool
    lifecycle_level: int


def env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    return default if raw is None else raw.strip().lower() in {'1', 'true', 'yes', 'on'}


def get_formatter_name() -> str:
    name = os.getenv('LOG_FORMATTER', 'json').strip().lower()
    return name if name in ('json', 'plain') else 'json'


def _env_level(name: str) -> int:
    level = logging.getLevelName(os.getenv(name, 'INFO').strip().upper())
    return level if isinstance(level, int) else logging.INFO


def package_version() -> str:
    try:
        return version('acwall')
    except PackageNotFoundError:
        return '0.0.0+dev'


def _plain(value: Any) -> Any:
    """Reduce ``value`` to something ``json.dumps`` accepts; numpy scalars become Python numbers."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_plain(v) for v in value]
    if hasattr(value, 'item'):
        try:
            return _plain(value.item())
        except (TypeError, ValueError):
            pass
    return str(value)


class AcwallJsonFormatter(logging.Formatter):
    """One JSON object per record, merged from the run context and the record's ``extra``."""

    _SEVERITY = {logging.WARNING: 'WARN', logging.CRITICAL: 'FATAL'}

    def __init__(self, *, include_context: bool = True) -> None:
        super().__init__()
        self.include_context = include_context

    def format(self, record: logging.LogRecord) -> str:
        fields = observability.snapshot_context() if self.include_context else {}
        fields.update((k, v) for k, v in vars(record).items() if k not in _STANDARD_RECORD_KEYS)

        payload: dict[str, Any] = dict.fromkeys(_ALWAYS_PRESENT)
        attributes: dict[str, Any] = {}
        for key, value in fields.items():
            if key == 'attributes' and isinstance(value, Mapping):
                attributes.update(_plain(value))
            elif key in _OUTPUT_KEYS:
                payload[_OUTPUT_KEYS[key]] = _plain(value)
            else:
                attributes[str(key)] = _plain(value)
        if payload['exception.type'] is not None:
            payload['exception.type'] = str(payload['exception.type'])

        payload.update(
            {
                'timestamp': datetime.fromtimestamp(record.created, timezone.utc).isoformat().replace('+00:00', 'Z'),
                'severity_text': self._SEVERITY.get(record.levelno, record.levelname),
                'logger': record.name,
                'message': record.getMessage(),
                'service.name': os.getenv('SERVICE_NAME') or 'acwall',
                'service.version': package_version(),
                'exception.message': None,
                'exception.stacktrace': None,
                'attributes': attributes,
            }
        )
        if record.exc_info:
            exc_type, exc_value, _ = record.exc_info
            payload['exception.type'] = exc_type.__name__ if exc_type else None
            payload['exception.message'] = str(exc_value) if exc_value else None
            payload['exception.stacktrace'] = ''.join(traceback.format_exception(*record.exc_info))
        if payload.get('duration_ms') is None:
            payload.pop('duration_ms', None)
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, default=str)


def build_formatter(formatter_name: str | None = None) -> logging.Formatter:
    if (formatter_name or get_formatter_name()).lower() == 'json':
        return AcwallJsonFormatter(include_context=env_bool('LOG_INCLUDE_CONTEXT', True))
    return logging.Formatter(os.getenv('LOG_FORMAT', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'))


def _handlers(formatter: logging.Formatter, *, log_to_console: bool) -> list[logging.Handler]:
    handlers: list[logging.Handler] = []
    if log_to_console and env_bool('LOG_TO_CONSOLE', True):
        stream = sys.stdout if os.getenv('LOG_STREAM', 'stderr').lower() == 'stdout' else sys.stderr
        handlers.append(logging.StreamHandler(stream))
    if env_bool('LOG_TO_FILE', False):
        log_file = Path(os.getenv('LOG_FILE', 'logs/acwall.log'))
        try:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            handlers.append(
                logging.handlers.RotatingFileHandler(
                    log_file,
                    maxBytes=int(os.getenv('LOG_MAX_BYTES', '10485760')),
                    backupCount=int(os.getenv('LOG_BACKUP_COUNT', '5')),
                    encoding='utf-8',
                )
            )
        except OSError:
            logging.getLogger('acwall.Logging').debug('file logging unavailable at %s', log_file, exc_info=True)
    for handler in handlers:
        handler.setFormatter(formatter)
    return handlers or [logging.NullHandler()]


def configure_logging(*, log_to_console: bool = True) -> LoggingSettings:
    """Install root handlers from the ``LOG_*`` environment and mirror lifecycle events."""
    settings = LoggingSettings(
        formatter=get_formatter_name(),
        level=_env_level('LOG_LEVEL'),
        lifecycle_events=env_bool('LOG_LIFECYCLE_EVENTS', True),
        lifecycle_level=_env_level('LOG_LIFECYCLE_LEVEL'),
    )
    handlers = _handlers(build_formatter(settings.formatter), log_to_console=log_to_console)
    logging.basicConfig(level=settings.level, handlers=handlers, force=True)
    configure_lifecycle_logging(enabled=settings.lifecycle_events, level=settings.lifecycle_level)
    return settings


def configure_lifecycle_logging(*, enabled: bool, level: int = logging.INFO) -> None:
    """Log the events in ``MIRRORED_EVENTS`` on ``acwall.Lifecycle``; reconfiguring replaces the previous hook."""
    global _unregister_mirror
    if _unregister_mirror is not None:
        _unregister_mirror()
        _unregister_mirror = None
    if not enabled:
        return

    lifecycle_logger = logging.getLogger('acwall.Lifecycle')

    def mirror(name: str, attributes: dict[str, Any]) -> None:
        if name in MIRRORED_EVENTS:
            extra = {**attributes, 'event.name': name, 'event.domain': name.partition('.')[0]}
            lifecycle_logger.log(level, 'acwall lifecycle event', extra=extra)

    _unregister_mirror = observability.register_trace_hook(mirror)
