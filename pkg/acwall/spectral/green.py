"""Closed-form Green kernels.

The Dirichlet Green function of ``H`` on ``[-a, b]`` is built from the two
homogeneous solutions ``wave' (h - h(-a))`` and ``wave' (h(b) - h)``:

    G(x, y) = 2 wave'(lo) wave'(hi) (h(lo) - h(-a)) (h(b) - h(hi)) / (h(b) - h(-a))

with ``lo = min(x, y)`` and ``hi = max(x, y)``. Every ``h`` difference is
carried as a logarithm, so the kernel stays finite for walls far beyond the
range where ``h`` itself overflows.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from acwall.profiles import Domain, FloatArray, Profile, log_h_difference, sech2, trapezoid_weights


LOG_2 = math.log(2.0)
LOG_4 = math.log(4.0)


def _log_slope(u: FloatArray) -> FloatArray:
    # log sech^2(u)
    magnitude = np.abs(u)
    return LOG_4 - 2.0 * magnitude - 2.0 * np.log1p(np.exp(-2.0 * magnitude))


def green_explicit(zeta: float, dom: Domain, x: ArrayLike, y: ArrayLike) -> Any:
    """Dirichlet Green kernel ``G(x, y)``; scalars in give a float out."""
    lo_edge = -dom.a - zeta
    hi_edge = dom.b - zeta
    u, v = np.broadcast_arrays(np.asarray(x, dtype=np.float64) - zeta, np.asarray(y, dtype=np.float64) - zeta)
    lo = np.clip(np.minimum(u, v), lo_edge, hi_edge)
    hi = np.clip(np.maximum(u, v), lo_edge, hi_edge)
    log_total = log_h_difference(lo_edge, hi_edge)
    log_value = (
        LOG_2
        + _log_slope(lo)
        + _log_slope(hi)
        + log_h_difference(np.full_like(lo, lo_edge), lo)
        + log_h_difference(hi, np.full_like(hi, hi_edge))
        - log_total
    )
    value = np.exp(log_value)
    return float(value) if np.ndim(x) == 0 and np.ndim(y) == 0 else value


def _factors(zeta: float, dom: Domain) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """``(wave' q, D wave' (1 - q), wave' (1 - q), D wave' q)`` on the grid, ``D = h(b) - h(-a)``."""
    u = dom.grid() - zeta
    lo_edge = np.full_like(u, -dom.a - zeta)
    hi_edge = np.full_like(u, dom.b - zeta)
    log_total = float(log_h_difference(-dom.a - zeta, dom.b - zeta))
    log_left = log_h_difference(lo_edge, u)
    log_right = log_h_difference(u, hi_edge)
    slope = sech2(u)
    with np.errstate(over='ignore'):
        return (
            slope * np.exp(log_left - log_total),
            slope * np.exp(log_right),
            slope * np.exp(log_right - log_total),
            slope * np.exp(log_left),
        )


def green_apply(zeta: float, dom: Domain, f: Profile) -> Profile:
    """Trapezoid quadrature of ``int G(x, y) f(y) dy`` at every node, in O(N).

    Splits the kernel at the diagonal:
    ``Gf_i = 2 [D p2_i sum_{j<=i} w_j p1_j f_j + D p1_i sum_{j>i} w_j p2_j f_j]``.
    """
    weights = trapezoid_weights(dom)
    p1, d_p2, p2, d_p1 = _factors(zeta, dom)
    left = np.cumsum(weights * p1 * f.values)
    right_all = np.cumsum((weights * p2 * f.values)[::-1])[::-1]
    right = np.zeros(dom.n)
    right[:-1] = right_all[1:]
    values = 2.0 * (d_p2 * left + d_p1 * right)
    values[0] = values[-1] = 0.0
    return Profile(dom, values)


def green_row_norm(zeta: float, dom: Domain) -> float:
    """``R = max_x (int G(x, y)^2 dy)^(1/2)`` with trapezoid weights in ``y``."""
    weights = trapezoid_weights(dom)
    p1, d_p2, p2, d_p1 = _factors(zeta, dom)
    left = np.cumsum(weights * p1 * p1)
    right_all = np.cumsum((weights * p2 * p2)[::-1])[::-1]
    right = np.zeros(dom.n)
    right[:-1] = right_all[1:]
    rows = 4.0 * (d_p2 * d_p2 * left + d_p1 * d_p1 * right)
    return math.sqrt(float(np.max(rows)))


def gbar_profile_u(x: ArrayLike) -> FloatArray:
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(over='ignore'):
        return np.exp(4.0 * x) / 24.0 + np.exp(2.0 * x) / 3.0 + 0.5 * x - 0.375


def gbar_kernel(x: ArrayLike, y: ArrayLike) -> Any:
    """Whole-line generalized Green kernel orthogonal to ``wave'``, wave centered at 0.

    ``3/4 wave'(x) wave'(y) [u(lo) + u(-hi) + 5/12]`` with ``lo, hi`` the ordered pair.
    """
    u, v = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    with np.errstate(over='ignore', invalid='ignore'):
        value = 0.75 * sech2(u) * sech2(v) * (gbar_profile_u(lo) + gbar_profile_u(-hi) + 5.0 / 12.0)
    return float(value) if np.ndim(x) == 0 and np.ndim(y) == 0 else value
