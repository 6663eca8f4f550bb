from __future__ import annotations

import logging
from typing import Any

from acwall import observability
from acwall.profiles import Domain
from acwall.spectral.asymptotics import lambda0_domain_asymptotic
from acwall.spectral.eigen import eigenpairs, spectral_gap
from acwall.spectral.kellogg import ground_state_distances, kellogg
from acwall.spectral.operator import PotentialKind, assemble_operator


logger = logging.getLogger('acwall.Spectral')


def spectral_report(
    zeta: float,
    dom: Domain,
    k: int = 4,
    *,
    potential: PotentialKind = 'translation_exact',
) -> dict[str, Any]:
    """JSON-ready summary of the low spectrum, the Kellogg bracket and the leading-order prediction."""
    with observability.start_span('spectral.report', {'zeta': zeta, 'a': dom.a, 'b': dom.b, 'n': dom.n}):
        op = assemble_operator(zeta, dom, potential=potential)
        pairs = eigenpairs(op, max(k, 2))
        report = kellogg(zeta, dom, op=op, pairs=pairs)
        sup, l1, weighted = ground_state_distances(pairs, zeta, dom)
    payload = {
        'a': dom.a,
        'b': dom.b,
        'zeta': zeta,
        'dx': dom.dx,
        'n': dom.n,
        'potential': potential,
        'lambda': [pair.eigenvalue for pair in pairs[:k]],
        'gap': spectral_gap(pairs),
        'overlap': report.overlap,
        'kellogg': report.to_dict(),
        'ground_state': {'sup': sup, 'l1': l1, 'weighted': weighted},
        'lambda0_asymptotic': lambda0_domain_asymptotic(zeta, dom),
    }
    observability.lifecycle(
        'spectral.solved',
        {'zeta': zeta, 'a': dom.a, 'b': dom.b, 'dx': dom.dx, 'lambda0': pairs[0].eigenvalue},
    )
    return payload
