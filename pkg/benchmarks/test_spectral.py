from __future__ import annotations

from collections.abc import Callable

import pytest

from acwall.profiles import Domain, Profile
from acwall.spectral import assemble_operator, eigenpairs, green_apply


@pytest.mark.benchmark(group='spectral-eigen')
def bench_eigenpairs_coarse(benchmark, make_domain: Callable[[float, float], Domain]) -> None:
    op = assemble_operator(0.0, make_domain(5.0, 0.01))

    benchmark(eigenpairs, op, 4)


@pytest.mark.benchmark(group='spectral-eigen')
def bench_eigenpairs_fine(benchmark, make_domain: Callable[[float, float], Domain]) -> None:
    op = assemble_operator(0.0, make_domain(5.0, 0.001))

    benchmark(eigenpairs, op, 4)


@pytest.mark.benchmark(group='spectral-assemble')
def bench_assemble_operator(benchmark, make_domain: Callable[[float, float], Domain]) -> None:
    dom = make_domain(5.0, 0.001)

    benchmark(assemble_operator, 0.5, dom)


@pytest.mark.benchmark(group='spectral-green')
def bench_green_apply(benchmark, make_wave: Callable[..., Profile]) -> None:
    f = make_wave(0.0, dx=0.001)

    benchmark(green_apply, 0.0, f.domain, f)
