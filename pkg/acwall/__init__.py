"""Stochastic Allen-Cahn interface laboratory."""

from acwall.config import ExperimentConfig, ExperimentKind, parse_config, serialize_config
from acwall.errors import AcwallError
from acwall.logging_config import package_version
from acwall.profiles import Domain, Profile

__version__ = package_version()

__all__ = [
    'AcwallError',
    'Domain',
    'ExperimentConfig',
    'ExperimentKind',
    'Profile',
    '__version__',
    'parse_config',
    'serialize_config',
]
