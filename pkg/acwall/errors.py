"""Exception hierarchy for acwall.

Every failure the package raises on purpose derives from :class:`AcwallError`.
The class carries the process exit code the CLI returns and a structured
``details`` mapping that is logged as-is.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_OUTPUT = 4


class AcwallError(Exception):
    """Base class for acwall failures."""

    exit_code = 1

    def __init__(self, message: str, *, details: Mapping[str, Any] | None = None) -> None:
        super().__init__(message)
        self.details: dict[str, Any] = dict(details or {})

    def to_dict(self) -> dict[str, Any]:
        return {'error': self.__class__.__name__, 'message': str(self), 'details': dict(self.details)}


class ValidationError(AcwallError):
    """Invalid input, configuration or precondition."""

    exit_code = EXIT_VALIDATION


class ConfigValidationError(ValidationError):
    """A config document failed validation; ``field`` is the dotted path to the culprit."""

    def __init__(self, field: str, message: str, *, details: Mapping[str, Any] | None = None) -> None:
        super().__init__(f'{field}: {message}', details={'field': field, **dict(details or {})})
        self.field = field


class DomainError(ValidationError):
    """A wave center or grid request outside the admissible interval."""


class InputError(ValidationError):
    """Empty or mismatched data handed to an estimator."""


class ResolutionError(ValidationError):
    """A requested scale is finer than the sampling resolution."""


class ResourceError(ValidationError):
    """A request would exceed a configured resource cap."""


class NumericalError(AcwallError):
    """A numerical procedure failed."""

    exit_code = EXIT_NUMERICAL


class SolverError(NumericalError):
    """The eigen solver did not converge or produced a large residual."""


class TruncationError(NumericalError):
    """Not enough spectral modes to meet the requested tolerance."""


class BlowUpError(NumericalError):
    """A time stepper produced a non-finite or runaway state."""

    def __init__(
        self,
        message: str,
        *,
        step: int,
        last_good: Any = None,
        details: Mapping[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details={'step': step, **dict(details or {})})
        self.step = step
        self.last_good = last_good


class ConvergenceError(NumericalError):
    """An iteration hit its cap before meeting the tolerance."""


class TubeError(NumericalError):
    """A profile lies outside the tube around the standing-wave manifold."""


class BracketingError(NumericalError):
    """No sign change on the bracketing interval."""


class InitializationError(NumericalError):
    """Center tracking could not start on the first snapshot."""


class OutputError(AcwallError):
    """Writing or reading an artifact failed."""

    exit_code = EXIT_OUTPUT
