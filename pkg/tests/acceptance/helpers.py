import os
import unittest


def acceptance_tests_enabled() -> bool:
    """Return whether the long-running numerical acceptance runs were explicitly enabled."""
    return os.environ.get('RUN_ACCEPTANCE_TESTS', '').lower() in {'1', 'true', 'yes', 'on'}


class AcceptanceTestCase(unittest.TestCase):
    """Base class for acceptance runs that take seconds to minutes each."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()

        if not acceptance_tests_enabled():
            raise unittest.SkipTest('Set RUN_ACCEPTANCE_TESTS=1 to run the acceptance suite (several minutes).')


def symmetric_domain_points(a: float, dx: float) -> int:
    """Grid point count for ``[-a, a]`` at spacing ``dx``."""
    return int(round(2.0 * a / dx)) + 1
