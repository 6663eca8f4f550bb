"""Plot-ready CSV tables, binary dumps and their JSON sidecars."""

from __future__ import annotations

import json
import logging
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from acwall import observability
from acwall.errors import OutputError
from acwall.logging_config import package_version


logger = logging.getLogger('acwall.IO')

FLOAT_FORMAT = '%.17g'


@dataclass(frozen=True, slots=True, eq=False)
class Table:
    """Named columns over a 2-D float block (one row per record)."""

    columns: tuple[str, ...]
    rows: NDArray[np.float64]

    def __post_init__(self) -> None:
        columns = tuple(str(column) for column in self.columns)
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.size == 0:
            rows = rows.reshape(0, len(columns))
        if rows.ndim != 2 or rows.shape[1] != len(columns):
            raise ValueError(f'table rows must have {len(columns)} columns, got shape {rows.shape}')
        object.__setattr__(self, 'columns', columns)
        object.__setattr__(self, 'rows', rows)

    @classmethod
    def from_columns(cls, **columns: ArrayLike) -> Table:
        names = tuple(columns)
        arrays = [np.asarray(values, dtype=np.float64).ravel() for values in columns.values()]
        return cls(names, np.column_stack(arrays) if arrays else np.empty((0, 0)))

    def column(self, name: str) -> NDArray[np.float64]:
        return self.rows[:, self.columns.index(name)]


def write_series(path: str | Path, series: Table) -> Path:
    """Write ``series`` as CSV with 17 significant digits; the header is always written."""
    target = Path(path)
    try:
        with target.open('w', encoding='utf-8', newline='') as handle:
            np.savetxt(
                handle,
                series.rows,
                fmt=FLOAT_FORMAT,
                delimiter=',',
                header=','.join(series.columns),
                comments='',
            )
    except OSError as exc:
        raise OutputError(f'could not write {target}', details={'path': str(target), 'error': str(exc)}) from exc
    logger.debug('Wrote CSV series', extra={'path': str(target), 'rows': int(series.rows.shape[0])})
    return target


def read_series(path: str | Path) -> Table:
    target = Path(path)
    try:
        with target.open('r', encoding='utf-8') as handle:
            header = handle.readline().strip()
            with warnings.catch_warnings():
                # header-only files are valid empty tables
                warnings.simplefilter('ignore', UserWarning)
                rows = np.loadtxt(handle, delimiter=',', ndmin=2, dtype=np.float64)
    except OSError as exc:
        raise OutputError(f'could not read {target}', details={'path': str(target), 'error': str(exc)}) from exc
    columns = tuple(header.split(',')) if header else ()
    return Table(columns, rows)


def sidecar_path(path: str | Path) -> Path:
    target = Path(path)
    return target.with_name(target.name + '.json')


def write_json(path: str | Path, payload: Mapping[str, Any]) -> Path:
    target = Path(path)
    try:
        target.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + '\n', encoding='utf-8')
    except OSError as exc:
        raise OutputError(f'could not write {target}', details={'path': str(target), 'error': str(exc)}) from exc
    return target


def write_sidecar(path: str | Path, meta: Mapping[str, Any], *, config_hash: str | None = None) -> Path:
    """``<path>.json`` describing ``path``; carries the artifact version and config hash."""
    payload = {'file': Path(path).name, 'version': package_version(), 'config_hash': config_hash, **meta}
    target = write_json(sidecar_path(path), payload)
    observability.lifecycle('output.written', {'path': str(path)})
    return target


def write_binary(
    path: str | Path,
    values: ArrayLike,
    meta: Mapping[str, Any],
    *,
    config_hash: str | None = None,
) -> Path:
    """Column-major little-endian float64 dump plus a sidecar with shape and layout."""
    array = np.asarray(values, dtype=np.float64)
    target = Path(path)
    try:
        np.ravel(array, order='F').astype('<f8').tofile(target)
    except OSError as exc:
        raise OutputError(f'could not write {target}', details={'path': str(target), 'error': str(exc)}) from exc
    write_sidecar(
        target,
        {'shape': list(array.shape), 'order': 'F', 'dtype': '<f8', **meta},
        config_hash=config_hash,
    )
    return target


def read_binary(path: str | Path, shape: Sequence[int]) -> NDArray[np.float64]:
    try:
        flat = np.fromfile(Path(path), dtype='<f8')
    except OSError as exc:
        raise OutputError(f'could not read {path}', details={'path': str(path), 'error': str(exc)}) from exc
    return flat.reshape(tuple(shape), order='F')


def _json_default(value: Any) -> Any:
    # numpy scalars and arrays
    tolist = getattr(value, 'tolist', None)
    if callable(tolist):
        return tolist()
    return str(value)
