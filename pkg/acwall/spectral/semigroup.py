"""Spectral truncations of ``exp(-tH)`` and of the reduced resolvent ``G-perp``."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from acwall.errors import TruncationError, ValidationError
from acwall.profiles import Domain, FloatArray, Profile, eval_wave, inner, norm2
from acwall.settings import load_solver_settings
from acwall.spectral.eigen import SpectralPair
from acwall.spectral.operator import TridiagonalOperator


logger = logging.getLogger('acwall.Spectral')


def _require_pairs(pairs: Sequence[SpectralPair]) -> Domain:
    if not pairs:
        raise ValidationError('at least one eigenpair is required')
    return pairs[0].eigenfunction.domain


def semigroup_tail(pairs: Sequence[SpectralPair], t: float, f: Profile) -> float:
    """Bound on the part of ``exp(-tH) f`` carried by modes missing from ``pairs``."""
    dom = _require_pairs(pairs)
    captured = sum(inner(dom, pair.eigenfunction.values, f.values) ** 2 for pair in pairs)
    remainder = max(norm2(dom, f.values) ** 2 - captured, 0.0)
    return math.sqrt(remainder) * math.exp(-pairs[-1].eigenvalue * t)


def semigroup_apply(
    pairs: Sequence[SpectralPair],
    t: float,
    f: Profile,
    drop_ground: bool = False,
    *,
    tolerance: float | None = None,
) -> Profile:
    """``sum_i exp(-lambda_i t) <Psi_i, f> Psi_i``; with ``drop_ground`` the ``i = 0`` term is left out.

    When ``tolerance`` is given, a tail bound above it raises :class:`TruncationError`.
    """
    if not (math.isfinite(t) and t >= 0):
        raise ValidationError('semigroup time must be finite and >= 0', details={'t': t})
    dom = _require_pairs(pairs)
    if tolerance is not None:
        tail = semigroup_tail(pairs, t, f)
        if tail > tolerance:
            raise TruncationError(
                'too few modes for the requested semigroup tolerance',
                details={'modes': len(pairs), 't': t, 'tail': tail, 'tolerance': tolerance},
            )
    out = np.zeros(dom.n)
    for index, pair in enumerate(pairs):
        if drop_ground and index == 0:
            continue
        coefficient = inner(dom, pair.eigenfunction.values, f.values)
        out += math.exp(-pair.eigenvalue * t) * coefficient * pair.eigenfunction.values
    return Profile(dom, out)


def _excited_below(pairs: Sequence[SpectralPair], cutoff: float | None) -> list[SpectralPair]:
    dom = _require_pairs(pairs)
    cutoff = load_solver_settings().mode_cutoff if cutoff is None else cutoff
    complete = len(pairs) == dom.interior_size
    if not complete and pairs[-1].eigenvalue <= cutoff:
        raise TruncationError(
            'eigenpairs stop below the mode cutoff',
            details={'modes': len(pairs), 'largest': pairs[-1].eigenvalue, 'cutoff': cutoff},
        )
    return [pair for pair in pairs[1:] if pair.eigenvalue <= cutoff]


def gperp_diagonal(pairs: Sequence[SpectralPair], *, cutoff: float | None = None) -> FloatArray:
    """``G-perp(x, x)`` on the grid from the truncated spectral sum."""
    dom = _require_pairs(pairs)
    diagonal = np.zeros(dom.n)
    for pair in _excited_below(pairs, cutoff):
        diagonal += pair.eigenfunction.values**2 / pair.eigenvalue
    return diagonal


def gperp_kernel(pairs: Sequence[SpectralPair], i: int, j: int, *, cutoff: float | None = None) -> float:
    """``sum_{k>=1} Psi_k(x_i) Psi_k(x_j) / lambda_k`` between grid nodes ``i`` and ``j``."""
    return float(
        sum(
            pair.eigenfunction.values[i] * pair.eigenfunction.values[j] / pair.eigenvalue
            for pair in _excited_below(pairs, cutoff)
        )
    )


def gperp_trace_tail(dom: Domain, cutoff: float) -> float:
    """Weyl-type bound on the weighted trace carried by modes above ``cutoff``.

    Uses ``lambda_k >= (k pi / L)^2 / 2 - 1`` and ``||Psi_k||_inf^2 <= 2 / L``;
    the weight ``|wave' wave|`` integrates to at most 1.
    """
    length = dom.length
    first = max(1, math.floor(length * math.sqrt(2.0 * (cutoff + 1.0)) / math.pi))
    return 4.0 * length / (math.pi**2 * first)


def gperp_weighted_trace(
    zeta: float,
    dom: Domain,
    pairs: Sequence[SpectralPair],
    *,
    cutoff: float | None = None,
) -> float:
    """``int wave'(x) wave(x) G-perp(x, x) dx`` by trapezoid quadrature."""
    dom.require_center(zeta)
    wave, slope = eval_wave(zeta, dom.grid())
    return inner(dom, np.asarray(slope) * np.asarray(wave), gperp_diagonal(pairs, cutoff=cutoff))


def gperp_columns(op: TridiagonalOperator, ground: SpectralPair, columns: Sequence[int]) -> FloatArray:
    """Columns ``G-perp(., x_j)`` of the reduced resolvent by projected solves ``P T^-1 P``.

    ``columns`` are grid indices of interior nodes; the result has one column
    per index and zero rows at the endpoints. Unlike the spectral sum this has
    no truncation error, and projecting after the solve keeps it accurate when
    the ground eigenvalue is tiny.
    """
    dom = op.domain
    columns = list(columns)
    if any(not 0 < j < dom.n - 1 for j in columns):
        raise ValidationError('kernel columns must be interior grid indices', details={'columns': columns})
    psi = ground.eigenfunction.interior

    def project(block: FloatArray) -> FloatArray:
        return block - np.outer(psi, dom.dx * (psi @ block))

    rhs = np.zeros((op.size, len(columns)))
    rhs[np.asarray(columns) - 1, np.arange(len(columns))] = 1.0 / dom.dx
    solved = project(op.solve(project(rhs)))
    out = np.zeros((dom.n, len(columns)))
    out[1:-1] = solved
    return out
