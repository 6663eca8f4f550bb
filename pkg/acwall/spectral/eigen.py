"""Low-lying eigenpairs of a :class:`TridiagonalOperator`.

Eigenvalues come from Sturm-sequence bisection and eigenvectors from inverse
iteration (LAPACK ``stebz``/``stein`` through SciPy). Bisection is run to full
relative precision so the ground eigenvalue keeps its digits even when it is
many orders of magnitude below the operator norm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from acwall.errors import SolverError, ValidationError
from acwall.profiles import FloatArray, Profile
from acwall.settings import SolverSettings, load_solver_settings
from acwall.spectral.operator import TridiagonalOperator


logger = logging.getLogger('acwall.Spectral')

_TINY = float(np.finfo(np.float64).tiny)


@dataclass(frozen=True, slots=True, eq=False)
class SpectralPair:
    """Eigenvalue with its trapezoid-normalized eigenfunction (zero at both endpoints)."""

    eigenvalue: float
    eigenfunction: Profile


def _fix_sign(vector: FloatArray, ground: bool) -> FloatArray:
    if ground:
        return vector if vector.sum() >= 0 else -vector
    magnitude = np.abs(vector)
    first = int(np.argmax(magnitude > 1e-3 * magnitude.max()))
    return vector if vector[first] >= 0 else -vector


def eigenpairs(
    op: TridiagonalOperator,
    k: int,
    *,
    settings: SolverSettings | None = None,
) -> list[SpectralPair]:
    """The ``k`` smallest eigenpairs in increasing order.

    Raises :class:`SolverError` when LAPACK fails or when a residual
    ``|T v - lambda v|`` exceeds ``eigen_tolerance * ||T||``.
    """
    if not 1 <= k <= op.size:
        raise ValidationError('k must lie between 1 and the interior size', details={'k': k, 'interior': op.size})
    settings = settings or load_solver_settings()
    try:
        values, vectors = eigh_tridiagonal(
            op.diagonal,
            op.off_diagonal,
            select='i',
            select_range=(0, k - 1),
            lapack_driver='stebz',
            tol=_TINY,
            check_finite=False,
        )
    except (LinAlgError, ValueError) as exc:
        raise SolverError('tridiagonal eigensolve failed', details={'k': k, 'error': str(exc)}) from exc

    scale = op.norm_inf()
    residual = op.matvec(vectors) - vectors * values
    worst = np.max(np.abs(residual), axis=0) / scale
    if not np.all(np.isfinite(worst)) or np.any(worst > settings.eigen_tolerance):
        raise SolverError(
            'eigenvector residual above tolerance',
            details={
                'k': k,
                'tolerance': settings.eigen_tolerance,
                'residuals': [float(r) for r in worst],
            },
        )

    dom = op.domain
    norm = 1.0 / math.sqrt(dom.dx)
    pairs = []
    for index in range(k):
        interior = _fix_sign(vectors[:, index] * norm, ground=index == 0)
        values_full = np.zeros(dom.n)
        values_full[1:-1] = interior
        pairs.append(SpectralPair(float(values[index]), Profile(dom, values_full)))
    logger.debug(
        'Solved tridiagonal eigenproblem',
        extra={'zeta': op.zeta, 'a': dom.a, 'b': dom.b, 'dx': dom.dx, 'modes': k, 'lambda0': pairs[0].eigenvalue},
    )
    return pairs


def count_below(op: TridiagonalOperator, cutoff: float) -> int:
    """Number of eigenvalues ``<= cutoff`` (Sturm count)."""
    lower, _ = op.gershgorin_bounds()
    if cutoff < lower:
        return 0
    values = eigvalsh_tridiagonal(
        op.diagonal,
        op.off_diagonal,
        select='v',
        select_range=(lower - 1.0, cutoff),
        check_finite=False,
    )
    return int(values.shape[0])


def spectral_basis(
    op: TridiagonalOperator,
    cutoff: float | None = None,
    *,
    settings: SolverSettings | None = None,
) -> list[SpectralPair]:
    """Every eigenpair with eigenvalue ``<= cutoff`` plus the first one above it.

    The extra pair certifies that nothing below the cutoff is missing. When the
    whole spectrum lies below the cutoff all interior modes are returned.
    """
    settings = settings or load_solver_settings()
    cutoff = settings.mode_cutoff if cutoff is None else cutoff
    k = min(count_below(op, cutoff) + 1, op.size)
    return eigenpairs(op, k, settings=settings)


def spectral_gap(pairs: list[SpectralPair]) -> float:
    if len(pairs) < 2:
        raise ValidationError('a spectral gap needs at least two eigenpairs')
    return pairs[1].eigenvalue - pairs[0].eigenvalue
