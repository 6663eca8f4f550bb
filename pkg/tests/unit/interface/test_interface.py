import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from acwall.errors import (
    BracketingError,
    InitializationError,
    InputError,
    ResolutionError,
    TubeError,
    ValidationError,
)
from acwall.interface import (
    InterfacePath,
    StoppingSpec,
    TimeScale,
    binned_increment_means,
    block_path,
    block_sequence,
    center_expansion,
    center_velocity,
    rescale_path,
    solve_center,
    track_centers,
    tube_distance,
    unscale_path,
    velocity_law_fit,
    write_interface_path,
)
from acwall.io import read_series, sidecar_path
from acwall.profiles import Domain, Profile, wave_profile
from acwall.settings import StoppingSettings
from acwall.spde import FieldTrajectory, SpdeConfig, simulate


def trajectory(dom: Domain, profiles: list[np.ndarray], dt: float = 0.1) -> FieldTrajectory:
    cfg = SpdeConfig(dom, 0.0, dt, dt * max(len(profiles) - 1, 1), 1, 0, wave_profile(0.0, dom))
    return FieldTrajectory(dt * np.arange(len(profiles)), np.stack(profiles), cfg)


class StoppingSpecTests(unittest.TestCase):
    def test_defaults_and_settings(self) -> None:
        spec = StoppingSpec.from_settings(StoppingSettings(tube_radius=0.2, wall_margin=0.5, center_fraction=0.6))

        self.assertEqual(StoppingSpec().to_dict(), {'tube_radius': 0.3, 'wall_margin': 1.0, 'center_fraction': 0.8})
        self.assertEqual((spec.tube_radius, spec.wall_margin, spec.center_fraction), (0.2, 0.5, 0.6))

    def test_rejects_invalid_values(self) -> None:
        for kwargs in ({'tube_radius': 0.0}, {'wall_margin': -1.0}, {'center_fraction': 1.0}):
            with self.subTest(kwargs=kwargs), self.assertRaises(ValidationError):
                StoppingSpec(**kwargs)


class SolveCenterTests(unittest.TestCase):
    def test_recovers_the_center_of_an_exact_wave(self) -> None:
        dom = Domain(5.0, 5.0, 1001)

        center = solve_center(wave_profile(0.37, dom, pinned=False), 0.2)

        self.assertAlmostEqual(center, 0.37, delta=1e-10)

    def test_pinned_wave_is_within_tolerance(self) -> None:
        dom = Domain(5.0, 5.0, 1001)

        center = solve_center(wave_profile(-0.8, dom), -0.6)

        self.assertAlmostEqual(center, -0.8, delta=1e-8)

    def test_zero_profile_is_outside_the_tube(self) -> None:
        dom = Domain(3.0, 3.0, 61)

        with self.assertRaises(TubeError) as ctx:
            solve_center(Profile(dom, np.zeros(61)), 0.0)

        self.assertGreater(ctx.exception.details['distance'], 0.3)

    def test_guess_too_close_to_a_wall_is_rejected(self) -> None:
        dom = Domain(3.0, 3.0, 61)

        with self.assertRaises(TubeError):
            solve_center(wave_profile(2.5, dom), 2.5)

    def test_bracket_without_sign_change_raises(self) -> None:
        dom = Domain(6.0, 6.0, 241)
        profile = wave_profile(0.0, dom)
        spec = StoppingSpec(tube_radius=2.5, wall_margin=0.5)

        with self.assertRaises(BracketingError):
            solve_center(profile, 3.0, spec=spec)

    def test_tube_distance_of_the_wave_itself(self) -> None:
        dom = Domain(3.0, 3.0, 61)

        self.assertLess(tube_distance(wave_profile(0.4, dom, pinned=False), 0.4), 1e-15)


class CenterExpansionTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.dom = Domain(5.0, 5.0, 1001)
        cls.base = wave_profile(0.0, cls.dom, pinned=False)
        x = cls.dom.grid()
        cls.bump = np.exp(-((x - 0.3) ** 2))

    def errors(self, h: float) -> tuple[float, float]:
        f = self.base.with_values(self.base.values + h * self.bump)
        center = solve_center(f, 0.0)
        first, second = center_expansion(0.0, f)
        return abs(first - center), abs(first + second - center)

    def test_vanishes_on_the_wave(self) -> None:
        first, second = center_expansion(0.0, self.base)

        self.assertAlmostEqual(first, 0.0, delta=1e-15)
        self.assertAlmostEqual(second, 0.0, delta=1e-15)

    def test_first_order_error_is_quadratic(self) -> None:
        coarse, _ = self.errors(0.01)
        fine, _ = self.errors(0.005)

        self.assertAlmostEqual(coarse / fine, 4.0, delta=0.5)

    def test_second_order_error_is_cubic(self) -> None:
        _, coarse = self.errors(0.01)
        _, fine = self.errors(0.005)

        self.assertGreater(coarse / fine, 6.0)
        self.assertLess(coarse / fine, 10.0)

    def test_first_order_term_tracks_a_small_shift(self) -> None:
        dom = Domain(5.0, 5.0, 1001)

        first, _ = center_expansion(0.0, wave_profile(0.01, dom, pinned=False))

        self.assertAlmostEqual(first, 0.01, delta=1e-6)


class TrackCentersTests(unittest.TestCase):
    def test_noiseless_symmetric_run_stays_centered(self) -> None:
        dom = Domain(5.0, 5.0, 201)
        cfg = SpdeConfig(dom, 0.0, 0.05, 5.0, 10, 0, wave_profile(0.0, dom))

        path = track_centers(simulate(cfg))

        self.assertEqual(len(path), 11)
        self.assertIsNone(path.stopped_at)
        self.assertLess(float(np.max(np.abs(path.centers))), 1e-6)

    def test_stops_once_the_center_reaches_the_fraction(self) -> None:
        dom = Domain(4.0, 4.0, 401)
        shifts = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5]
        traj = trajectory(dom, [wave_profile(z, dom).values for z in shifts])
        spec = StoppingSpec(center_fraction=0.3)

        path = track_centers(traj, spec)

        self.assertEqual(len(path), 6)
        self.assertAlmostEqual(path.stopped_at, 0.5)
        np.testing.assert_allclose(path.centers, shifts[:6], atol=1e-4)

    def test_tube_exit_drops_the_offending_snapshot(self) -> None:
        dom = Domain(3.0, 3.0, 121)
        traj = trajectory(dom, [wave_profile(0.0, dom).values, wave_profile(0.2, dom).values, np.zeros(121)])

        path = track_centers(traj)

        self.assertEqual(len(path), 2)
        self.assertAlmostEqual(path.stopped_at, 0.2)

    def test_first_snapshot_outside_the_tube_raises(self) -> None:
        dom = Domain(3.0, 3.0, 121)
        traj = trajectory(dom, [np.zeros(121), wave_profile(0.0, dom).values])

        with self.assertRaises(InitializationError) as ctx:
            track_centers(traj)

        self.assertEqual(ctx.exception.details['cause'], 'TubeError')


class InterfacePathTests(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(ValidationError):
            InterfacePath(np.array([0.0, 1.0, 1.0]), np.zeros(3))
        with self.assertRaises(ValidationError):
            InterfacePath(np.array([0.0, 1.0]), np.zeros(3))
        with self.assertRaises(ValidationError):
            InterfacePath(np.array([0.0, 1.0]), np.zeros(2), stopped_at=0.5)

    def test_spacing_needs_two_samples(self) -> None:
        with self.assertRaises(InputError):
            _ = InterfacePath(np.array([0.0]), np.array([0.0])).spacing

    def test_written_series_has_sidecar(self) -> None:
        path = InterfacePath(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.1, 0.3]), stopped_at=1.0)
        with tempfile.TemporaryDirectory() as tmp:
            target = write_interface_path(Path(tmp) / 'centers.csv', path)

            table = read_series(target)
            self.assertTrue(sidecar_path(target).is_file())

        self.assertEqual(table.columns, ('time', 'center'))
        np.testing.assert_array_equal(table.column('center'), path.centers)


class RescaleTests(unittest.TestCase):
    def setUp(self) -> None:
        self.path = InterfacePath(np.array([0.0, 10.0, 20.0]), np.array([0.0, 0.4, -0.2]), stopped_at=20.0)

    def test_soft_scale(self) -> None:
        soft = rescale_path(self.path, 0.1, 'soft')

        np.testing.assert_allclose(soft.times, [0.0, 1.0, 2.0])
        np.testing.assert_array_equal(soft.centers, self.path.centers)
        self.assertIs(soft.tag, TimeScale.SOFT)
        self.assertAlmostEqual(soft.stopped_at, 2.0)

    def test_hard_scale(self) -> None:
        eps = math.exp(-4.0)

        hard = rescale_path(self.path, eps, TimeScale.HARD)

        self.assertAlmostEqual(hard.lam, 4.0)
        np.testing.assert_allclose(hard.centers, self.path.centers / 2.0)
        np.testing.assert_allclose(hard.times, self.path.times * eps / 4.0)

    def test_unscale_returns_the_raw_path(self) -> None:
        for mode in (TimeScale.SOFT, TimeScale.HARD):
            with self.subTest(mode=mode):
                restored = unscale_path(rescale_path(self.path, 0.01, mode))
                np.testing.assert_array_equal(restored.times, self.path.times)
                np.testing.assert_array_equal(restored.centers, self.path.centers)

    def test_unscale_without_source_inverts_the_map(self) -> None:
        hard = rescale_path(self.path, 0.01, 'hard')
        detached = InterfacePath(hard.times, hard.centers, TimeScale.HARD, eps=hard.eps, lam=hard.lam)

        restored = unscale_path(detached)

        np.testing.assert_allclose(restored.times, self.path.times, rtol=1e-14)
        np.testing.assert_allclose(restored.centers, self.path.centers, rtol=1e-14)
        self.assertIs(restored.tag, TimeScale.RAW)

    def test_rejects_bad_arguments(self) -> None:
        with self.assertRaises(ValidationError):
            rescale_path(self.path, 1.0, 'soft')
        with self.assertRaises(ValidationError):
            rescale_path(self.path, 0.1, 'raw')
        with self.assertRaises(ValidationError):
            rescale_path(rescale_path(self.path, 0.1, 'soft'), 0.1, 'soft')


class BlockTests(unittest.TestCase):
    def test_block_sequence_picks_nearest_samples(self) -> None:
        times = np.arange(21) * 0.5
        path = InterfacePath(times, times**2)

        blocks = block_sequence(path, 2.0)

        self.assertEqual([n for n, _ in blocks], list(range(6)))
        np.testing.assert_allclose([c for _, c in blocks], (2.0 * np.arange(6)) ** 2)

    def test_block_sequence_with_uneven_stride(self) -> None:
        times = np.arange(11) * 0.3
        path = InterfacePath(times, times)

        blocks = block_sequence(path, 1.0)

        np.testing.assert_allclose([c for _, c in blocks], [0.0, 0.9, 2.1, 3.0])

    def test_block_shorter_than_spacing_raises(self) -> None:
        path = InterfacePath(np.arange(5) * 0.5, np.zeros(5))

        with self.assertRaises(ResolutionError):
            block_sequence(path, 0.25)

    def test_block_path_and_increment_means(self) -> None:
        T = 2.0
        sequences = [[(n, 0.1 * n * T + start) for n in range(50)] for start in np.linspace(-1.0, 1.0, 9)]

        self.assertEqual(block_path(sequences[0], T).dt, T)
        fit = binned_increment_means(sequences, T, bins=4, min_count=1)

        np.testing.assert_allclose(fit.mean, 0.1, rtol=1e-12)

    def test_increment_means_need_an_increment(self) -> None:
        with self.assertRaises(InputError):
            binned_increment_means([[(0, 0.0)]], 1.0)


class VelocityTests(unittest.TestCase):
    def test_central_differences_of_a_linear_path(self) -> None:
        times = np.linspace(0.0, 1.0, 11)
        path = InterfacePath(times, 2.0 * times)

        centers, velocities = center_velocity(path, window=2)

        np.testing.assert_allclose(velocities, 2.0)
        np.testing.assert_allclose(centers, 2.0 * times[2:-2])

    def test_window_too_long_raises(self) -> None:
        path = InterfacePath(np.linspace(0.0, 1.0, 4), np.zeros(4))

        with self.assertRaises(InputError):
            center_velocity(path, window=2)

    def test_law_fit_recovers_rate_and_prefactor(self) -> None:
        a = 3.0
        zetas = np.linspace(-0.5, 0.5, 6)

        slope, prefactor = velocity_law_fit(zetas, -48.0 * math.exp(-4.0 * a) * np.exp(4.0 * zetas), a)

        self.assertAlmostEqual(slope, 4.0, places=9)
        self.assertAlmostEqual(prefactor, 48.0, places=7)

    def test_law_fit_rejects_zero_velocity(self) -> None:
        with self.assertRaises(InputError):
            velocity_law_fit([0.0, 1.0], [0.0, 1.0], 3.0)


if __name__ == '__main__':
    unittest.main()
