import numpy as np

from acwall.interface import (
    InterfacePath,
    block_sequence,
    center_expansion,
    center_velocity,
    solve_center,
    track_centers,
    velocity_law_fit,
)
from acwall.profiles import Domain, Profile, eval_wave, inner, wave_profile
from acwall.spde import SpdeConfig, build_domain, simulate
from tests.acceptance.helpers import AcceptanceTestCase

SETTLE = 20


def perturbed_wave(dom: Domain, delta: float) -> Profile:
    x = dom.grid()
    wave, slope = eval_wave(0.0, x)
    return Profile(dom, wave - delta * slope * (1.0 + 0.5 * x))


def spde_run(zeta: float, eps: float, seed: int, *, horizon: float) -> InterfacePath:
    dom = build_domain(5.0, 5.0, 0.02)
    cfg = SpdeConfig(dom, eps, 0.01, horizon, 100, seed, wave_profile(zeta, dom))
    return track_centers(simulate(cfg))


class CenterExpansionAcceptance(AcceptanceTestCase):
    def test_first_order_coefficient_and_quadratic_remainder(self) -> None:
        dom = Domain(5.0, 5.0, 2001)
        _, slope = eval_wave(0.0, dom.grid())
        wave = wave_profile(0.0, dom, pinned=False).values

        def measure(delta: float) -> tuple[float, float]:
            f = perturbed_wave(dom, delta)
            center = solve_center(f, 0.0)
            first, _ = center_expansion(0.0, f)
            coefficient = -center / inner(dom, f.values - wave, slope)
            return coefficient, abs(center - first)

        coarse_coefficient, coarse_remainder = measure(0.01)
        fine_coefficient, fine_remainder = measure(0.005)

        self.assertAlmostEqual((2.0 * fine_coefficient - coarse_coefficient) / 0.75, 1.0, delta=0.01)
        self.assertAlmostEqual(coarse_remainder / fine_remainder, 4.0, delta=0.6)


class CenterDiffusionAcceptance(AcceptanceTestCase):
    def test_block_increment_variance_matches_three_quarters_eps_t(self) -> None:
        eps, block = 1e-3, 10.0
        increments: list[float] = []
        for replica in range(50):
            centers = [center for _, center in block_sequence(spde_run(0.0, eps, 100 + replica, horizon=400.0), block)]
            increments.extend(np.diff(centers))

        variance = float(np.var(increments, ddof=1))

        self.assertAlmostEqual(variance / (0.75 * eps * block), 1.0, delta=0.1)


class DeterministicDriftAcceptance(AcceptanceTestCase):
    def test_velocity_grows_like_exp_four_zeta(self) -> None:
        zetas = [0.5, 1.0, 1.5]
        velocities = []
        for zeta in zetas:
            path = spde_run(zeta, 0.0, 1, horizon=60.0)
            tail = InterfacePath(path.times[SETTLE:], path.centers[SETTLE:])
            _, velocity = center_velocity(tail, 10)
            velocities.append(float(np.mean(velocity)))

        slope, prefactor = velocity_law_fit(zetas, velocities, 5.0)

        self.assertAlmostEqual(slope, 4.0, delta=0.2)
        self.assertGreater(prefactor, 12.0 / 1.5)
        self.assertLess(prefactor, 12.0 * 1.5)
