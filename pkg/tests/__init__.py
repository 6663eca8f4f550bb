import os
import sys
import unittest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, ROOT)

# replicas run in-process and nothing writes log files during tests
os.environ.setdefault('ACWALL_WORKERS', '1')
os.environ.setdefault('LOG_TO_FILE', 'false')


def load_tests(loader, tests, pattern):
    """Discover unit and acceptance tests below this package only."""
    suite = unittest.TestSuite()
    here = os.path.dirname(__file__)
    suite.addTests(loader.discover(here, pattern=pattern or 'test_*.py', top_level_dir=ROOT))
    return suite
