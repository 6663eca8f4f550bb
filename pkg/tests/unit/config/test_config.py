import json
import tempfile
import unittest
from pathlib import Path

from acwall.config import (
    DriftFitParams,
    ExperimentConfig,
    ExperimentKind,
    SdeParams,
    SpdeParams,
    SpectralParams,
    WallParams,
    config_hash,
    config_to_dict,
    parse_config,
    serialize_config,
    with_overrides,
)
from acwall.errors import ConfigValidationError, ValidationError


SPDE_TOML = """
kind = "spde"
seed = 7
replicas = 3
output_dir = "out"

[params]
a = 5.0
b = 5.0
dx = 0.02
eps = 0.001
dt = 0.01
horizon = 4.0
stride = 100
init = "wave:0.5"
"""


class ParseConfigTests(unittest.TestCase):
    def assert_field_error(self, field: str, document: dict) -> None:
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(document)
        self.assertEqual(ctx.exception.field, field)
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_minimal_spectral_recipe(self) -> None:
        cfg = parse_config({'a': 3, 'b': 3, 'dx': 0.002, 'zeta': 0}, 'spectral')

        self.assertIs(cfg.kind, ExperimentKind.SPECTRAL)
        self.assertEqual(cfg.params, SpectralParams(a=3.0, b=3.0, dx=0.002, zeta=0.0))
        self.assertIsInstance(cfg.params.a, float)
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.replicas, 1)

    def test_toml_document(self) -> None:
        cfg = parse_config(SPDE_TOML)

        self.assertIs(cfg.kind, ExperimentKind.SPDE)
        self.assertIsInstance(cfg.params, SpdeParams)
        self.assertEqual(cfg.params.stride, 100)
        self.assertEqual((cfg.seed, cfg.replicas, cfg.output_dir), (7, 3, 'out'))

    def test_file_suffix_selects_format(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            toml_path = Path(tmp) / 'run.toml'
            toml_path.write_text(SPDE_TOML, encoding='utf-8')
            json_path = Path(tmp) / 'run.json'
            json_path.write_text(serialize_config(parse_config(toml_path)), encoding='utf-8')

            self.assertEqual(parse_config(json_path), parse_config(toml_path))

    def test_missing_file(self) -> None:
        with self.assertRaises(ConfigValidationError):
            parse_config(Path('/nonexistent/acwall/run.toml'))

    def test_round_trip(self) -> None:
        configs = [
            parse_config(SPDE_TOML),
            parse_config({'kind': 'wall', 'params': {'gammas': [10, 100], 'dt': 1e-4, 'steps': 10000}}),
            parse_config({'kind': 'sde', 'dt': 1e-3, 'steps': 100, 'drift': 'penalized', 'gamma': 50}),
            parse_config({'kind': 'drift_fit', 'inputs': ['a.csv'], 'value_min': -0.3, 'value_max': 0.6}),
        ]
        for cfg in configs:
            with self.subTest(kind=str(cfg.kind)):
                self.assertEqual(parse_config(serialize_config(cfg)), cfg)

    def test_negative_eps_names_the_field(self) -> None:
        document = {'kind': 'spde', 'a': 3, 'b': 3, 'dx': 0.1, 'eps': -1, 'dt': 0.01, 'horizon': 1}

        self.assert_field_error('params.eps', document)

    def test_structural_errors(self) -> None:
        self.assert_field_error('kind', {'a': 3, 'b': 3, 'dx': 0.1})
        self.assert_field_error('kind', {'kind': 'heat', 'a': 3})
        self.assert_field_error('params.dx', {'kind': 'spectral', 'a': 3, 'b': 3})
        self.assert_field_error('params.c', {'kind': 'spectral', 'a': 3, 'b': 3, 'dx': 0.1, 'c': 1})
        self.assert_field_error('extra', {'kind': 'spectral', 'params': {'a': 3, 'b': 3, 'dx': 0.1}, 'extra': 1})
        self.assert_field_error('params', {'kind': 'spectral', 'params': [1, 2]})

    def test_type_errors(self) -> None:
        base = {'kind': 'sde', 'dt': 1e-3, 'steps': 100}

        self.assert_field_error('params.steps', {**base, 'steps': 1.5})
        self.assert_field_error('params.dt', {**base, 'dt': True})
        self.assert_field_error('params.drift', {**base, 'drift': 3})
        self.assert_field_error('params.gamma', {**base, 'drift': 'exp_wall'})
        self.assert_field_error('seed', {**base, 'seed': -1})
        self.assert_field_error('replicas', {**base, 'replicas': 0})

    def test_module_preconditions(self) -> None:
        self.assert_field_error('params.a', {'kind': 'spectral', 'a': 4, 'b': 3, 'dx': 0.1})
        self.assert_field_error('params.zeta', {'kind': 'spectral', 'a': 3, 'b': 3, 'dx': 0.1, 'zeta': 3})
        self.assert_field_error('params.gammas', {'kind': 'wall', 'gammas': [0.5], 'dt': 1e-4, 'steps': 100})
        self.assert_field_error('params.delta', {'kind': 'wall', 'gammas': [10], 'dt': 1e-4, 'steps': 10, 'delta': 0.1})
        self.assert_field_error('params.value_max', {'kind': 'drift_fit', 'inputs': ['a.csv'], 'value_min': 0.0})
        self.assert_field_error(
            'params.init',
            {'kind': 'spde', 'a': 3, 'b': 3, 'dx': 0.1, 'eps': 0, 'dt': 0.01, 'horizon': 1, 'init': 'wave:9'},
        )
        self.assert_field_error(
            'params.eps',
            {'kind': 'spde', 'a': 3, 'b': 3, 'dx': 0.1, 'eps': 0, 'dt': 0.01, 'horizon': 1, 'rescale': 'soft'},
        )

    def test_requested_kind_must_match_document(self) -> None:
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(SPDE_TOML, ExperimentKind.SPECTRAL)

        self.assertEqual(ctx.exception.field, 'kind')

    def test_malformed_text(self) -> None:
        with self.assertRaises(ValidationError):
            parse_config('{"kind": ')
        with self.assertRaises(ValidationError):
            parse_config('kind = ')
        with self.assertRaises(ValidationError):
            parse_config('[1, 2]')


class ExperimentConfigTests(unittest.TestCase):
    def test_replica_seeds(self) -> None:
        cfg = ExperimentConfig(ExperimentKind.SDE, SdeParams(dt=1e-3, steps=10), output_dir='out', seed=40, replicas=3)

        self.assertEqual(cfg.seeds(), [40, 41, 42])

    def test_seed_wraps_at_sixty_four_bits(self) -> None:
        cfg = ExperimentConfig(ExperimentKind.SDE, SdeParams(dt=1e-3, steps=10), 'out', 2**64 - 1, 2)

        self.assertEqual(cfg.seeds(), [2**64 - 1, 0])

    def test_value_range_property(self) -> None:
        self.assertIsNone(DriftFitParams(inputs=('a.csv',)).value_range)
        self.assertEqual(DriftFitParams(inputs=('a.csv',), value_min=-1.0, value_max=1.0).value_range, (-1.0, 1.0))

    def test_hash_is_stable_and_sensitive(self) -> None:
        cfg = parse_config(SPDE_TOML)

        self.assertEqual(config_hash(cfg), config_hash(parse_config(SPDE_TOML)))
        self.assertNotEqual(config_hash(cfg), config_hash(with_overrides(cfg, seed=8)))
        self.assertEqual(len(config_hash(cfg)), 64)

    def test_dict_form_is_json_ready(self) -> None:
        cfg = ExperimentConfig(ExperimentKind.WALL, WallParams(gammas=(10.0, 100.0), dt=1e-4, steps=1000), 'out')

        document = config_to_dict(cfg)

        self.assertEqual(document['params']['gammas'], [10.0, 100.0])
        self.assertEqual(json.loads(json.dumps(document)), document)


class OverrideTests(unittest.TestCase):
    def test_envelope_and_params(self) -> None:
        cfg = parse_config(SPDE_TOML)

        changed = with_overrides(cfg, seed=11, output_dir='elsewhere', eps=0.01, replicas=None)

        self.assertEqual(changed.seed, 11)
        self.assertEqual(changed.output_dir, 'elsewhere')
        self.assertEqual(changed.params.eps, 0.01)
        self.assertEqual(changed.replicas, 3)

    def test_overrides_are_revalidated(self) -> None:
        with self.assertRaises(ConfigValidationError):
            with_overrides(parse_config(SPDE_TOML), replicas=0)


if __name__ == '__main__':
    unittest.main()
