from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from acwall.errors import NumericalError
from acwall.profiles import Domain, Profile, inner, translation_mode
from acwall.spectral.eigen import SpectralPair, eigenpairs
from acwall.spectral.green import green_row_norm
from acwall.spectral.operator import TridiagonalOperator, assemble_operator


logger = logging.getLogger('acwall.Spectral')

# bisection resolves eigenvalues to a few ulps of the operator norm
_RESOLUTION_ULPS = 8.0


@dataclass(frozen=True, slots=True, eq=False)
class KelloggReport:
    """Two steps of power iteration on the Green operator, started from the zero mode."""

    mu: float
    e1: Profile
    e2: Profile
    row_norm: float
    overlap: float
    bracket_upper: float
    sup_bound: float
    l2_bound: float
    lambda0: float
    lambda1: float
    resolution: float
    sup_e2_phi: float
    sup_e2_psi0: float
    l2_e1_psi0: float

    def lower_bound_holds(self) -> bool:
        return self.mu >= self.lambda0 - self.resolution

    def bracket_holds(self) -> bool:
        return self.mu - self.lambda0 <= self.bracket_upper + self.resolution

    def sup_bound_holds(self) -> bool:
        # eigenvector error of the solver scales like resolution / gap
        return self.sup_e2_psi0 <= self.sup_bound + self.resolution / (self.lambda1 - self.lambda0)

    def to_dict(self) -> dict[str, Any]:
        return {
            'mu': self.mu,
            'R': self.row_norm,
            'c': self.overlap,
            'bracket_upper': self.bracket_upper,
            'sup_bound': self.sup_bound,
            'l2_bound': self.l2_bound,
            'lambda0': self.lambda0,
            'lambda1': self.lambda1,
            'resolution': self.resolution,
            'sup_e2_phi': self.sup_e2_phi,
            'sup_e2_psi0': self.sup_e2_psi0,
            'l2_e1_psi0': self.l2_e1_psi0,
        }


def kellogg(
    zeta: float,
    dom: Domain,
    *,
    op: TridiagonalOperator | None = None,
    pairs: Sequence[SpectralPair] | None = None,
) -> KelloggReport:
    """``f1 = G phi``, ``f2 = G f1`` and ``mu = ||f1|| / ||f2||`` with the bracket of the ground eigenvalue.

    ``G`` is the inverse of the assembled grid operator, so ``mu`` and the
    grid eigenvalues it is compared with come from the same matrix; ``R`` is
    the row norm of the closed-form kernel.
    """
    op = op or assemble_operator(zeta, dom)
    pairs = list(pairs) if pairs is not None else eigenpairs(op, 2)
    if len(pairs) < 2:
        raise NumericalError('the Kellogg bracket needs the first two eigenpairs')
    lambda0, lambda1 = pairs[0].eigenvalue, pairs[1].eigenvalue
    psi0 = pairs[0].eigenfunction

    phi = translation_mode(zeta, dom).values[1:-1].copy()
    phi /= math.sqrt(dom.dx * float(phi @ phi))
    f1 = op.solve(phi)
    f2 = op.solve(f1)
    norm1 = math.sqrt(dom.dx * float(f1 @ f1))
    norm2 = math.sqrt(dom.dx * float(f2 @ f2))
    if not (norm1 > 0 and norm2 > 0 and math.isfinite(norm1) and math.isfinite(norm2)):
        raise NumericalError('Green iterates vanished or overflowed', details={'f1': norm1, 'f2': norm2})
    mu = norm1 / norm2

    def embed(interior: np.ndarray) -> Profile:
        values = np.zeros(dom.n)
        values[1:-1] = interior
        return Profile(dom, values)

    e1 = embed(f1 / norm1)
    e2 = embed(f2 / norm2)
    overlap = min(max(dom.dx * float(psi0.interior @ phi), 0.0), 1.0)
    if overlap == 0.0:
        raise NumericalError('zero mode is orthogonal to the ground state', details={'zeta': zeta})
    ratio = lambda0 / lambda1
    defect = math.sqrt(max(1.0 - overlap * overlap, 0.0))
    row_norm = green_row_norm(zeta, dom)

    report = KelloggReport(
        mu=mu,
        e1=e1,
        e2=e2,
        row_norm=row_norm,
        overlap=overlap,
        bracket_upper=0.5 * lambda0 * ratio * ratio * defect * defect / (overlap * overlap),
        sup_bound=row_norm * lambda1 * ratio * ratio * defect / overlap,
        l2_bound=ratio * defect / overlap,
        lambda0=lambda0,
        lambda1=lambda1,
        resolution=_RESOLUTION_ULPS * float(np.finfo(np.float64).eps) * op.norm_inf(),
        sup_e2_phi=float(np.max(np.abs(e2.interior - phi))),
        sup_e2_psi0=float(np.max(np.abs(e2.values - psi0.values))),
        l2_e1_psi0=math.sqrt(inner(dom, e1.values - psi0.values, e1.values - psi0.values)),
    )
    logger.debug('Kellogg iteration finished', extra={'zeta': zeta, 'a': dom.a, 'b': dom.b, **report.to_dict()})
    return report


def ground_state_distances(pairs: Sequence[SpectralPair], zeta: float, dom: Domain) -> tuple[float, float, float]:
    """``(sup |Psi0 - phi|, int |Psi0 - phi|, <|Psi0 - phi|, phi>)`` against the normalized zero mode."""
    phi = translation_mode(zeta, dom).values
    gap = np.abs(pairs[0].eigenfunction.values - phi)
    return float(np.max(gap)), inner(dom, gap, np.ones(dom.n)), inner(dom, gap, phi)
