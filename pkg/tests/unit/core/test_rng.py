import unittest

import numpy as np

from acwall.rng import NoiseStream, Stream, derive_seed, philox_generator


class DeriveSeedTests(unittest.TestCase):
    def test_offsets_and_wraps(self) -> None:
        self.assertEqual(derive_seed(10, 3), 13)
        self.assertEqual(derive_seed(2**64 - 1, 1), 0)

    def test_negative_index(self) -> None:
        with self.assertRaises(ValueError):
            derive_seed(1, -1)


class NoiseStreamTests(unittest.TestCase):
    def test_draws_are_addressed_by_counter(self) -> None:
        stream = NoiseStream(42)

        first = stream.normal(7, 16)
        stream.normal(3, 1000)

        np.testing.assert_array_equal(stream.normal(7, 16), first)

    def test_counters_and_streams_are_distinct(self) -> None:
        spde = NoiseStream(42, Stream.SPDE)
        brownian = NoiseStream(42, Stream.BROWNIAN)

        self.assertFalse(np.array_equal(spde.normal(0, 8), spde.normal(1, 8)))
        self.assertFalse(np.array_equal(spde.normal(0, 8), brownian.normal(0, 8)))

    def test_generator_is_standard_normal(self) -> None:
        draws = philox_generator(5, Stream.ENSEMBLE).standard_normal(200_000)

        self.assertAlmostEqual(float(draws.mean()), 0.0, delta=0.01)
        self.assertAlmostEqual(float(draws.var()), 1.0, delta=0.01)


if __name__ == '__main__':
    unittest.main()
