import unittest

from acwall.errors import (
    EXIT_NUMERICAL,
    EXIT_OUTPUT,
    EXIT_VALIDATION,
    AcwallError,
    BlowUpError,
    ConfigValidationError,
    DomainError,
    NumericalError,
    OutputError,
    TubeError,
    ValidationError,
)


class ErrorHierarchyTests(unittest.TestCase):
    def test_exit_codes_follow_the_family(self) -> None:
        self.assertEqual(DomainError('x').exit_code, EXIT_VALIDATION)
        self.assertEqual(TubeError('x').exit_code, EXIT_NUMERICAL)
        self.assertEqual(OutputError('x').exit_code, EXIT_OUTPUT)
        self.assertEqual(AcwallError('x').exit_code, 1)
        self.assertTrue(issubclass(ConfigValidationError, ValidationError))
        self.assertTrue(issubclass(BlowUpError, NumericalError))

    def test_to_dict(self) -> None:
        exc = OutputError('disk full', details={'path': 'out/a.csv'})

        self.assertEqual(
            exc.to_dict(), {'error': 'OutputError', 'message': 'disk full', 'details': {'path': 'out/a.csv'}}
        )

    def test_config_error_names_the_field(self) -> None:
        exc = ConfigValidationError('params.eps', 'must be >= 0')

        self.assertEqual(str(exc), 'params.eps: must be >= 0')
        self.assertEqual(exc.details['field'], 'params.eps')

    def test_blow_up_keeps_the_last_good_state(self) -> None:
        exc = BlowUpError('runaway', step=12, last_good=[0.0, 1.0], details={'last_good_time': 0.11})

        self.assertEqual(exc.step, 12)
        self.assertEqual(exc.last_good, [0.0, 1.0])
        self.assertEqual(exc.details, {'step': 12, 'last_good_time': 0.11})


if __name__ == '__main__':
    unittest.main()
