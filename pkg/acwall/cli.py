#!/usr/bin/env python3
"""
acwall - stochastic Allen-Cahn interface laboratory
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from acwall.config import ExperimentConfig, ExperimentKind, parse_config, serialize_config, with_overrides
from acwall.errors import EXIT_OK, EXIT_VALIDATION, AcwallError, ConfigValidationError
from acwall.logging_config import configure_logging


logger = logging.getLogger('acwall.CLI')

COMMAND_KINDS = {
    'spectral': ExperimentKind.SPECTRAL,
    'spde-run': ExperimentKind.SPDE,
    'sde-run': ExperimentKind.SDE,
    'wall-compare': ExperimentKind.WALL,
    'drift-fit': ExperimentKind.DRIFT_FIT,
}
SPDE_OVERRIDES = ('a', 'b', 'dx', 'eps', 'dt', 'horizon', 'stride', 'init')


def _load_environment(env_file: str | None) -> None:
    """Load ``--env-file`` or a ``.env`` in the working directory before settings are read."""
    if env_file:
        if not Path(env_file).is_file():
            raise ConfigValidationError('env_file', f'{env_file} does not exist')
        load_dotenv(env_file, override=False)
    elif Path('.env').is_file():
        load_dotenv('.env', override=False)


def _build_config(command: str, args: argparse.Namespace) -> ExperimentConfig:
    kind = COMMAND_KINDS[command]
    overrides: dict[str, Any] = {'seed': args.seed, 'replicas': args.replicas, 'output_dir': args.out}
    if command == 'spde-run':
        overrides.update({name: getattr(args, name) for name in SPDE_OVERRIDES})
    if args.config is None:
        if command != 'spde-run':
            raise ConfigValidationError('config', f'{command} needs --config')
        document = {key: value for key, value in overrides.items() if value is not None}
        return parse_config(document, kind)
    return with_overrides(parse_config(Path(args.config), kind), **overrides)


def _print_json(value: Any) -> None:
    print(json.dumps(value, indent=2, sort_keys=True, default=str))


def _print_summary_rich(summary: dict[str, Any]) -> bool:
    try:
        from rich.console import Console
        from rich.table import Table
    except ImportError:
        # rich ships with the cli extra only
        return False
    table = Table(title=f"acwall {summary.get('kind', '')} run")
    table.add_column('field')
    table.add_column('value', overflow='fold')
    for key in ('kind', 'seed', 'replicas', 'config_hash', 'version', 'wall_clock_seconds'):
        table.add_row(key, str(summary.get(key)))
    table.add_row('outputs', '\n'.join(summary.get('outputs', [])))
    for record in summary.get('replica_results', []):
        table.add_row(f"replica {record['replica']}", json.dumps(record, default=str))
    if 'spectral' in summary:
        report = summary['spectral']
        table.add_row('lambda', ', '.join(f'{value:.6e}' for value in report['lambda']))
        table.add_row('gap', f"{report['gap']:.6e}")
    Console().print(table)
    return True


def _cmd_run(command: str, args: argparse.Namespace) -> int:
    from acwall.runner import run_experiment

    cfg = _build_config(command, args)
    logger.info('Running experiment', extra={'kind': str(cfg.kind), 'seed': cfg.seed, 'replicas': cfg.replicas})
    summary = run_experiment(cfg, workers=args.workers)
    if not (args.pretty and _print_summary_rich(summary)):
        _print_json(summary)
    return EXIT_OK


def _cmd_config_check(args: argparse.Namespace) -> int:
    if args.config is None:
        raise ConfigValidationError('config', 'config-check needs --config')
    cfg = parse_config(Path(args.config), args.kind)
    print(serialize_config(cfg))
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='TOML or JSON experiment recipe')
    common.add_argument('--seed', type=int, help='Base seed; replica i uses seed + i')
    common.add_argument('--out', type=str, help='Output directory (default: ACWALL_OUTPUT_DIR)')
    common.add_argument('--replicas', type=int, help='Number of replicas')
    common.add_argument('--workers', type=int, help='Replica pool size (default: ACWALL_WORKERS)')
    common.add_argument('--env-file', type=str, help='dotenv file loaded before settings')
    common.add_argument('--pretty', action='store_true', help='Render the summary with rich')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='acwall', description='Stochastic Allen-Cahn interface laboratory')
    sub = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    common = _common_options()

    sub.add_parser('spectral', parents=[common], help='Spectrum and Kellogg report of the linearized operator')

    spde_p = sub.add_parser('spde-run', parents=[common], help='Integrate the SPDE and track the interface')
    spde_p.add_argument('--a', type=float, help='Left wall distance')
    spde_p.add_argument('--b', type=float, help='Right wall distance')
    spde_p.add_argument('--dx', type=float, help='Grid spacing target')
    spde_p.add_argument('--eps', type=float, help='Noise strength')
    spde_p.add_argument('--dt', type=float, help='Time step')
    spde_p.add_argument('--horizon', type=float, help='Final time')
    spde_p.add_argument('--stride', type=int, help='Steps between snapshots')
    spde_p.add_argument('--init', type=str, help='wave:<zeta> or file:<path>')

    sub.add_parser('sde-run', parents=[common], help='Simulate the one-dimensional interface SDE')
    sub.add_parser('wall-compare', parents=[common], help='Penalized versus exponential wall on shared noise')
    sub.add_parser('drift-fit', parents=[common], help='Binned drift regression over saved paths')

    check_p = sub.add_parser('config-check', parents=[common], help='Validate a recipe and print it normalized')
    check_p.add_argument('--kind', choices=[kind.value for kind in ExperimentKind], help='Kind for flat recipes')
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_environment(args.env_file)
    except AcwallError as exc:
        print(f'Error: {exc}', file=sys.stderr)
        return exc.exit_code
    configure_logging(log_to_console=True)

    try:
        if args.command == 'config-check':
            return _cmd_config_check(args)
        return _cmd_run(args.command, args)
    except AcwallError as exc:
        logger.error(
            f'{args.command} failed: {exc}',
            exc_info=True,
            extra={'error': exc.__class__.__name__, 'details': exc.details},
        )
        return exc.exit_code
    except ValueError as exc:
        # unparsable ACWALL_* settings
        logger.error(f'{args.command} failed: {exc}', extra={'error': exc.__class__.__name__})
        return EXIT_VALIDATION


if __name__ == '__main__':
    raise SystemExit(main())
