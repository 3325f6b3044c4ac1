import argparse
import json
import sys

import yaml
from loguru import logger
from pydantic import ValidationError

from kerrcat import __version__
from kerrcat.config import settings
from kerrcat.exceptions import EXIT_CONFIG, ConfigError, KerrCatError
from kerrcat.experiments.router import run
from kerrcat.experiments.scenarios import resolve_cutoff
from kerrcat.experiments.schemas import ExperimentConfig
from kerrcat.fock.utils import estimate_memory_bytes


def configure_logging(level: str | None = None):
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.LOG_LEVEL).upper(),
               format="{time:HH:mm:ss} | {level: <8} | {name}:{line} - {message}")


def _describe_validation(error: ValidationError) -> str:
    return '; '.join(f"{'.'.join(str(part) for part in item['loc']) or 'config'}: {item['msg']}"
                     for item in error.errors())


def load_config(path: str, seed_override: int | None = None, cutoff_override: int | None = None) -> ExperimentConfig:
    """Read and validate a YAML experiment config; overrides replace the file's values."""
    try:
        with open(path, encoding='utf-8') as handle:
            raw = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ''
        raise ConfigError(f"YAML parse error in {path}{where}: {getattr(e, 'problem', e)}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {path} must be a mapping at the top level")
    if seed_override is not None:
        raw['seed'] = seed_override
    if cutoff_override is not None:
        raw['cutoff'] = cutoff_override
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {_describe_validation(e)}") from e


def validate_report(config: ExperimentConfig) -> dict:
    report = {'status': 'OK', 'scenario': config.scenario.value, 'name': config.run_name,
              'cutoff_mode': 'auto' if config.cutoff == 'auto' else 'explicit'}
    try:
        cutoff = resolve_cutoff(config)
    except KerrCatError as e:
        report['cutoff'] = None
        report['cutoff_note'] = e.detail
        return report
    report['cutoff'] = cutoff
    report['liouvillian_memory_mib'] = round(estimate_memory_bytes(cutoff) / 1024 ** 2, 1)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='kerrcat', description="Kerr resonator cat-state experiments")
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--log-level', default=None, help="Override KERRCAT_LOG_LEVEL")
    commands = parser.add_subparsers(dest='command', required=True)

    run_parser = commands.add_parser('run', help="Run an experiment config and write result tables")
    run_parser.add_argument('config', help="Path to a YAML experiment config")
    run_parser.add_argument('--output-dir', default=None, help="Root directory for run outputs")
    run_parser.add_argument('--workers', type=int, default=None, help="Parallel workers for sweeps and ensembles")
    run_parser.add_argument('--seed-override', type=int, default=None, help="Replace the config's master seed")
    run_parser.add_argument('--cutoff-override', type=int, default=None, help="Replace the config's Fock cutoff")

    validate_parser = commands.add_parser('validate', help="Check a config without running it")
    validate_parser.add_argument('config', help="Path to a YAML experiment config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == 'validate':
            config = load_config(args.config)
            print(json.dumps(validate_report(config), indent=2))
            return 0
        if args.workers is not None and args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        config = load_config(args.config, args.seed_override, args.cutoff_override)
        directory = run(config, args.output_dir, args.workers)
        print(directory)
        return 0
    except KerrCatError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"ConfigError: {_describe_validation(e)}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
