from __future__ import annotations

from collections.abc import Callable

import pytest

from acwall.profiles import Domain, Profile, wave_profile
from acwall.spde import SpdeConfig, build_domain


@pytest.fixture
def make_domain() -> Callable[[float, float], Domain]:
    def factory(half_width: float, dx: float) -> Domain:
        return build_domain(half_width, half_width, dx)

    return factory


@pytest.fixture
def make_wave(make_domain: Callable[[float, float], Domain]) -> Callable[..., Profile]:
    def factory(zeta: float = 0.0, *, half_width: float = 5.0, dx: float = 0.01) -> Profile:
        return wave_profile(zeta, make_domain(half_width, dx))

    return factory


@pytest.fixture
def make_spde_config(make_wave: Callable[..., Profile]) -> Callable[..., SpdeConfig]:
    def factory(*, dx: float = 0.01, eps: float = 1e-3, dt: float = 0.01, steps: int = 100) -> SpdeConfig:
        initial = make_wave(dx=dx)
        return SpdeConfig(initial.domain, eps, dt, steps * dt, steps, 1, initial)

    return factory
