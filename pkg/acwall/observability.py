"""Run context, phase spans and lifecycle hooks.

An experiment sets a :class:`RunContext` (run id plus attributes such as kind,
seed, replica and worker) once; every log record and lifecycle event below it
reads the context instead of having the numerics pass metadata around.
Spans time experiment phases (``experiment.run``, ``spde.simulate``,
``spectral.report``) and are reported to span hooks when they close.
"""

from __future__ import annotations

import logging
import os
import time
import uuid
from collections.abc import Callable, Iterator, Mapping
from contextlib import contextmanager
from contextvars import ContextVar, Token
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any

logger = logging.getLogger('acwall.Observability')

TraceHook = Callable[[str, dict[str, Any]], None]
MetricHook = Callable[[str, float, dict[str, Any]], None]
SpanHook = Callable[['SpanSnapshot'], None]


@dataclass(frozen=True, slots=True)
class RunContext:
    run_id: str | None = None
    attributes: Mapping[str, Any] = field(default_factory=lambda: MappingProxyType({}))

    def merged(self, attributes: Mapping[str, Any]) -> RunContext:
        return replace(self, attributes=MappingProxyType({**self.attributes, **attributes}))


@dataclass(frozen=True, slots=True)
class SpanSnapshot:
    """A closed span as handed to span hooks."""

    name: str
    trace_id: str
    span_id: str
    parent_span_id: str | None
    start_time_ns: int
    end_time_ns: int
    status: str
    status_message: str | None
    attributes: dict[str, Any]

    @property
    def duration_ms(self) -> float:
        return (self.end_time_ns - self.start_time_ns) / 1e6


@dataclass(slots=True)
class Span:
    name: str
    trace_id: str
    span_id: str
    parent_span_id: str | None
    attributes: dict[str, Any]
    start_time_ns: int = field(default_factory=time.perf_counter_ns)
    error: str | None = None

    def set_attribute(self, key: str, value: Any) -> None:
        self.attributes[key] = value

    def close(self) -> SpanSnapshot:
        return SpanSnapshot(
            name=self.name,
            trace_id=self.trace_id,
            span_id=self.span_id,
            parent_span_id=self.parent_span_id,
            start_time_ns=self.start_time_ns,
            end_time_ns=time.perf_counter_ns(),
            status='OK' if self.error is None else 'ERROR',
            status_message=self.error,
            attributes=dict(self.attributes),
        )


_CONTEXT: ContextVar[RunContext] = ContextVar('acwall_run_context', default=RunContext())
_SPAN: ContextVar[Span | None] = ContextVar('acwall_span', default=None)


class _Hooks:
    def __init__(self) -> None:
        self.trace: list[TraceHook] = []
        self.metric: list[MetricHook] = []
        self.span: list[SpanHook] = []

    def add(self, bucket: list[Any], hook: Any) -> Callable[[], None]:
        bucket.append(hook)

        def unregister() -> None:
            if hook in bucket:
                bucket.remove(hook)

        return unregister

    def clear(self) -> None:
        self.trace.clear()
        self.metric.clear()
        self.span.clear()

    @staticmethod
    def fire(bucket: list[Any], kind: str, *args: Any) -> None:
        for hook in tuple(bucket):
            try:
                hook(*args)
            except Exception:
                logger.debug('%s hook raised', kind, exc_info=True)


_hooks = _Hooks()


def _tracing_enabled() -> bool:
    value = os.getenv('ACWALL_TRACING', 'on')
    return value.strip().lower() not in {'0', 'false', 'no', 'off'}


def generate_run_id() -> str:
    return uuid.uuid4().hex


def get_run_id() -> str | None:
    return _CONTEXT.get().run_id


def get_context_attributes() -> dict[str, Any]:
    return dict(_CONTEXT.get().attributes)


def set_context(
    context: Mapping[str, Any] | None = None,
    *,
    run_id: str | None = None,
    ensure_run_id: bool = True,
    **attributes: Any,
) -> Token[RunContext]:
    """Replace the run context; a ``run_id`` key in ``context`` is taken as the run id."""
    values = {**(context or {}), **attributes}
    run_id = run_id or values.pop('run_id', None)
    if run_id is None and ensure_run_id:
        run_id = generate_run_id()
    return _CONTEXT.set(RunContext(run_id, MappingProxyType(values)))


def enrich_context(**attributes: Any) -> Token[RunContext]:
    """Add attributes on top of the current context, keeping its run id."""
    current = _CONTEXT.get()
    if current.run_id is None:
        current = replace(current, run_id=generate_run_id())
    return _CONTEXT.set(current.merged(attributes))


def reset_context(token: Token[RunContext]) -> None:
    _CONTEXT.reset(token)


def current_span() -> Span | None:
    return _SPAN.get() if _tracing_enabled() else None


def snapshot_context(extra: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """The run context as a plain dict: attributes, ``run_id`` and the active span ids."""
    context = _CONTEXT.get()
    snapshot = dict(context.attributes)
    if context.run_id is not None:
        snapshot['run_id'] = context.run_id
    span = current_span()
    if span is not None:
        snapshot['trace_id'] = span.trace_id
        snapshot['span_id'] = span.span_id
    snapshot.update(extra or {})
    return snapshot


@contextmanager
def start_span(name: str, attributes: Mapping[str, Any] | None = None) -> Iterator[Span | None]:
    """Time the enclosed block as a child of the active span; yields ``None`` when tracing is off."""
    if not _tracing_enabled():
        yield None
        return
    parent = _SPAN.get()
    span = Span(
        name=name,
        trace_id=parent.trace_id if parent is not None else uuid.uuid4().hex,
        span_id=uuid.uuid4().hex[:16],
        parent_span_id=parent.span_id if parent is not None else None,
        attributes=dict(attributes or {}),
    )
    token = _SPAN.set(span)
    try:
        yield span
    except BaseException as exc:
        span.error = exc.__class__.__name__
        span.set_attribute('error.type', span.error)
        raise
    finally:
        _SPAN.reset(token)
        _hooks.fire(_hooks.span, 'span', span.close())


def register_trace_hook(hook: TraceHook) -> Callable[[], None]:
    """Returns a callback that unregisters ``hook``; calling it twice is harmless."""
    return _hooks.add(_hooks.trace, hook)


def register_metric_hook(hook: MetricHook) -> Callable[[], None]:
    return _hooks.add(_hooks.metric, hook)


def register_span_hook(hook: SpanHook) -> Callable[[], None]:
    return _hooks.add(_hooks.span, hook)


def clear_hooks() -> None:
    _hooks.clear()


def trace(name: str, attributes: Mapping[str, Any] | None = None) -> None:
    _hooks.fire(_hooks.trace, 'trace', name, snapshot_context(attributes))


def metric(name: str, value: float = 1.0, attributes: Mapping[str, Any] | None = None) -> None:
    _hooks.fire(_hooks.metric, 'metric', name, value, snapshot_context(attributes))


def lifecycle(event: str, attributes: Mapping[str, Any] | None = None, *, value: float = 1.0) -> None:
    """One trace event and one metric sample for ``event``, both carrying the run context."""
    trace(event, attributes)
    metric(event, value, attributes)
