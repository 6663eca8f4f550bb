"""Leading-order eigenvalue asymptotics and the diagnostics measured against them."""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from acwall.errors import ValidationError
from acwall.profiles import Domain, Profile, eval_phi, eval_wave, inner, norm2
from acwall.spectral.eigen import SpectralPair
from acwall.spectral.semigroup import semigroup_apply
from acwall.stats import linear_fit


WallMode = Literal['one_wall', 'two_wall']


def _require_eps(eps: float) -> None:
    if not (math.isfinite(eps) and 0.0 < eps < 1.0):
        raise ValidationError('eps must lie in (0, 1)', details={'eps': eps})


def lambda0_asymptotic(eps: float, zeta: float, mode: WallMode = 'two_wall') -> float:
    """``24 eps exp(-4 zeta)`` with one wall at ``-a``; ``48 eps cosh(4 zeta)`` with both, ``eps = exp(-4a)``."""
    _require_eps(eps)
    if mode == 'one_wall':
        return 24.0 * eps * math.exp(-4.0 * zeta)
    if mode == 'two_wall':
        return 48.0 * eps * math.cosh(4.0 * zeta)
    raise ValidationError(f'unknown wall mode {mode!r}')


def lambda0_domain_asymptotic(zeta: float, dom: Domain) -> float:
    """Sum of the two one-wall terms for an asymmetric interval."""
    return lambda0_asymptotic(math.exp(-4.0 * dom.a), zeta, 'one_wall') + lambda0_asymptotic(
        math.exp(-4.0 * dom.b), -zeta, 'one_wall'
    )


def lambda0_scaling_fit(a_values: ArrayLike, lambdas: ArrayLike) -> tuple[float, float]:
    """Least-squares ``log lambda0 = log K + slope * a``; returns ``(slope, K)``."""
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if np.any(lambdas <= 0):
        raise ValidationError('eigenvalues must be positive for a log fit')
    slope, intercept, _ = linear_fit(a_values, np.log(lambdas))
    return slope, math.exp(intercept)


def boundary_layer_drift(zeta: float, dom: Domain, pairs: Sequence[SpectralPair], T: float) -> float:
    """``<wave', phi - exp(-TH) phi>`` for the boundary-layer profile ``phi``."""
    phi = eval_phi(zeta, dom)
    _, slope = eval_wave(zeta, dom.grid())
    evolved = semigroup_apply(pairs, T, phi)
    return inner(dom, np.asarray(slope), phi.values - evolved.values)


def boundary_layer_drift_asymptotic(eps: float, zeta: float, T: float) -> float:
    """Two-wall prediction ``-(4/3) 24 eps T sinh(4 zeta)``."""
    _require_eps(eps)
    return -(4.0 / 3.0) * 24.0 * eps * T * math.sinh(4.0 * zeta)


def interpolation_ratio(dom: Domain, F: Profile | ArrayLike) -> float:
    """``||F||_inf^3 / (||F'||_inf ||F||_2^2)`` with centered differences for ``F'``."""
    values = F.values if isinstance(F, Profile) else np.asarray(F, dtype=np.float64)
    derivative = np.gradient(values, dom.dx)
    denominator = float(np.max(np.abs(derivative))) * norm2(dom, values) ** 2
    if denominator == 0.0:
        raise ValidationError('interpolation ratio is undefined for a constant profile')
    return float(np.max(np.abs(values))) ** 3 / denominator
