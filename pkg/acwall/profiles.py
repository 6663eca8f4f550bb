"""Closed-form building blocks on a bounded interval.

The quartic double well ``V(m) = (m**2 - 1)**2 / 4``, the standing wave
``tanh(x - zeta)``, the function ``h_zeta(x) = int_zeta^x dy / wave'(y)**2``
and the boundary-layer solution ``phi_zeta`` that corrects the wave to the
``-1 / +1`` Dirichlet data at ``-a`` and ``b``.

Everything here is evaluated from closed forms. Quantities that grow like
``exp(4|x|)`` (``h`` and the ratios built from it) are handled in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from acwall.errors import DomainError, ValidationError


FloatArray = NDArray[np.float64]

LOG_64 = math.log(64.0)


@dataclass(frozen=True, slots=True)
class Domain:
    """Uniform grid on ``[-a, b]`` with ``n`` nodes, node 0 at ``-a`` and node ``n-1`` at ``b``."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError('left endpoint a must be > 0', details={'a': self.a})
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError('right endpoint b must be > 0', details={'b': self.b})
        if self.a > self.b:
            raise DomainError('domain requires a <= b', details={'a': self.a, 'b': self.b})
        if self.n < 3:
            raise DomainError('domain needs at least 3 grid points', details={'n': self.n})

    @property
    def length(self) -> float:
        return self.a + self.b

    @property
    def dx(self) -> float:
        return self.length / (self.n - 1)

    @property
    def interior_size(self) -> int:
        return self.n - 2

    def grid(self) -> FloatArray:
        return np.linspace(-self.a, self.b, self.n)

    def interior(self) -> FloatArray:
        return self.grid()[1:-1]

    def contains_center(self, zeta: float) -> bool:
        return -self.a < zeta < self.b

    def require_center(self, zeta: float) -> None:
        if not (math.isfinite(zeta) and self.contains_center(zeta)):
            raise DomainError(
                'wave center must lie strictly inside (-a, b)',
                details={'zeta': zeta, 'a': self.a, 'b': self.b},
            )


@dataclass(frozen=True, slots=True, eq=False)
class Profile:
    """Real values on the nodes of a :class:`Domain`."""

    domain: Domain
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.domain.n,):
            raise ValidationError(
                'profile length must equal the number of grid points',
                details={'expected': self.domain.n, 'actual': values.shape},
            )
        object.__setattr__(self, 'values', values)

    @property
    def interior(self) -> FloatArray:
        return self.values[1:-1]

    def is_dirichlet(self) -> bool:
        return bool(self.values[0] == -1.0 and self.values[-1] == 1.0)

    def with_values(self, values: ArrayLike) -> Profile:
        return Profile(self.domain, np.asarray(values, dtype=np.float64))


@dataclass(frozen=True, slots=True)
class WaveParams:
    zeta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.zeta):
            raise ValidationError('wave center must be finite', details={'zeta': self.zeta})


def sech2(u: ArrayLike) -> FloatArray:
    """``1 - tanh(u)**2``."""
    # 4 e^{-2|u|} / (1 + e^{-2|u|})^2 never overflows and stays accurate in the tails
    e = np.exp(-2.0 * np.abs(np.asarray(u, dtype=np.float64)))
    return 4.0 * e / (1.0 + e) ** 2


def _one_minus_tanh(u: ArrayLike) -> FloatArray:
    with np.errstate(over='ignore'):
        return 2.0 / (1.0 + np.exp(2.0 * np.asarray(u, dtype=np.float64)))


def _out(value: FloatArray, like: ArrayLike) -> Any:
    # scalars in, scalars out
    return float(value) if np.ndim(like) == 0 else value


def eval_wave(zeta: float, x: ArrayLike) -> tuple[FloatArray | float, FloatArray | float]:
    """Standing wave ``tanh(x - zeta)`` and its derivative ``1 - tanh**2``."""
    u = np.asarray(x, dtype=np.float64) - zeta
    return _out(np.tanh(u), x), _out(sech2(u), x)


def eval_wave_second(zeta: float, x: ArrayLike) -> FloatArray | float:
    """Second derivative ``-2 m m'`` of the standing wave."""
    u = np.asarray(x, dtype=np.float64) - zeta
    return _out(-2.0 * np.tanh(u) * sech2(u), x)


def eval_potential(m: ArrayLike) -> tuple[FloatArray | float, FloatArray | float, FloatArray | float]:
    """``(V, V', V'')`` of the quartic double well at ``m``."""
    values = np.asarray(m, dtype=np.float64)
    square = values * values
    v = 0.25 * (square - 1.0) ** 2
    dv = values * (square - 1.0)
    ddv = 3.0 * square - 1.0
    return _out(v, m), _out(dv, m), _out(ddv, m)


def eval_h(zeta: float, x: ArrayLike) -> FloatArray | float:
    """``h_zeta(x)``, odd about ``zeta`` and strictly increasing.

    Saturates to ``+-inf`` once ``|x - zeta|`` exceeds roughly 177; callers
    that need ratios of ``h`` use :func:`log_h_difference` instead.
    """
    u = np.asarray(x, dtype=np.float64) - zeta
    with np.errstate(over='ignore', invalid='ignore'):
        cosh = np.cosh(u)
        value = 0.375 * u + 0.1875 * np.sinh(2.0 * u) + 0.25 * np.sinh(u) * cosh * cosh * cosh
    return _out(value, x)


def log_h_positive(v: ArrayLike) -> FloatArray:
    """``log h_0(v)`` for ``v >= 0`` (``-inf`` at zero), accurate for any size of ``v``."""
    v = np.asarray(v, dtype=np.float64)
    e2 = np.exp(-2.0 * v)
    one_minus_e2 = -np.expm1(-2.0 * v)
    one_minus_e4 = -np.expm1(-4.0 * v)
    bracket = one_minus_e2 * (1.0 + e2) ** 3 + 6.0 * e2 * one_minus_e4 + 24.0 * v * e2 * e2
    with np.errstate(divide='ignore'):
        return np.where(v > 0.0, 4.0 * v - LOG_64 + np.log(bracket), -np.inf)


def log_h_difference(u_lo: ArrayLike, u_hi: ArrayLike) -> FloatArray:
    """``log(h_0(u_hi) - h_0(u_lo))`` for ``u_lo <= u_hi`` (broadcasting)."""
    lo, hi = np.broadcast_arrays(np.asarray(u_lo, dtype=np.float64), np.asarray(u_hi, dtype=np.float64))
    mixed = (lo < 0.0) & (hi > 0.0)
    negative = hi <= 0.0
    # same-sign pairs reduce to 0 <= small <= large via odd symmetry
    small = np.where(negative, -hi, lo)
    large = np.where(negative, -lo, hi)
    log_large = log_h_positive(np.abs(large))
    log_small = log_h_positive(np.abs(small))
    with np.errstate(divide='ignore', invalid='ignore'):
        same_sign = log_large + np.log1p(-np.exp(log_small - log_large))
        same_sign = np.where(small == large, -np.inf, same_sign)
        opposite = np.logaddexp(log_h_positive(np.abs(hi)), log_h_positive(np.abs(lo)))
    return np.where(mixed, opposite, same_sign)


def eval_q(zeta: float, dom: Domain, x: ArrayLike) -> FloatArray:
    """``(h(x) - h(-a)) / (h(b) - h(-a))``, computed as a difference of logs."""
    lo = -dom.a - zeta
    log_total = log_h_difference(lo, dom.b - zeta)
    u = np.asarray(x, dtype=np.float64) - zeta
    return np.exp(log_h_difference(np.full_like(u, lo), u) - log_total)


def phi_coefficients(zeta: float, dom: Domain) -> tuple[float, float]:
    """Coefficients ``(c, d)`` of ``phi = wave' * (c q + d)``."""
    left = 1.0 + math.tanh(dom.a + zeta)
    right = 1.0 + math.tanh(dom.b - zeta)
    return 1.0 / left + 1.0 / right, -1.0 / left


def eval_phi(zeta: float, dom: Domain) -> Profile:
    """Boundary-layer profile ``phi_zeta`` on ``dom``.

    Solves ``phi''/2 = V''(wave) phi`` with ``phi(-a) = -1 - wave(-a)`` and
    ``phi(b) = 1 - wave(b)``; the endpoint values are set exactly.
    """
    dom.require_center(zeta)
    x = dom.grid()
    c, d = phi_coefficients(zeta, dom)
    values = sech2(x - zeta) * (c * eval_q(zeta, dom, x) + d)
    values[0] = -float(_one_minus_tanh(dom.a + zeta))
    values[-1] = float(_one_minus_tanh(dom.b - zeta))
    return Profile(dom, values)


def trapezoid_weights(dom: Domain) -> FloatArray:
    weights = np.full(dom.n, dom.dx)
    weights[0] = weights[-1] = 0.5 * dom.dx
    return weights


def inner(dom: Domain, f: ArrayLike, g: ArrayLike) -> float:
    """Trapezoid ``<f, g>`` on the grid of ``dom``."""
    return float(np.dot(trapezoid_weights(dom), np.asarray(f, dtype=np.float64) * np.asarray(g, dtype=np.float64)))


def norm2(dom: Domain, f: ArrayLike) -> float:
    return math.sqrt(inner(dom, f, f))


def wave_profile(zeta: float, dom: Domain, *, pinned: bool = True) -> Profile:
    """The standing wave sampled on ``dom``; with ``pinned`` the endpoints are set to -1 and +1."""
    values = np.tanh(dom.grid() - zeta)
    if pinned:
        values[0], values[-1] = -1.0, 1.0
    return Profile(dom, values)


def translation_mode(zeta: float, dom: Domain) -> Profile:
    """Normalized zero mode ``wave' / ||wave'||_2``."""
    values = sech2(dom.grid() - zeta)
    return Profile(dom, values / norm2(dom, values))
