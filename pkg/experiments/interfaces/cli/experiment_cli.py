# experiments/interfaces/cli/experiment_cli.py

import argparse
import logging
import sys
from typing import Optional, Sequence

from experiments.application.internal.commandservices.experiment_command_service import ExperimentCommandService
from experiments.domain.model.commands.experiment_config import SUBCOMMAND_KINDS
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.domain.model.valueobjects.experiment_manifest import EXIT_CONFIG_ERROR
from experiments.infrastructure.config_parser import ConfigParser
from shared.domain.exceptions import ConfigError
from shared.infrastructure.logging_config import configure_logging
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

SUBCOMMAND_HELP = {
    "validate": "run the invariant suites",
    "index": "coherence index series S_X(t), S_K(t) with a power-law fit",
    "evolve": "sampled characteristic functions on a grid frozen at t=0",
    "asymptotics": "predicted vs fitted decoherence law and the ratio series",
    "relaxation": "relative distance to the Gaussian relaxation family",
    "classical": "Wigner function vs Monte Carlo classical density",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decoherence-lab",
        description="Reproducible decoherence experiments for Galilean covariant quantum dynamical semigroups.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMAND_KINDS:
        sub = subparsers.add_parser(name, help=SUBCOMMAND_HELP[name])
        sub.add_argument("--config", required=True, help="experiment config file (key=value sections)")
        sub.add_argument("--out", default=None, help="output directory (overrides [experiment] output_dir)")
        sub.add_argument("--seed", type=int, default=None, help="Monte Carlo master seed")
        sub.add_argument("--threads", type=int, default=None, help="worker threads for grids and sampling")
        sub.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        config = ConfigParser().parse_file(args.config)
        command = RunExperimentCommand(config=config, kind=SUBCOMMAND_KINDS[args.subcommand],
                                       output_dir=args.out, seed=args.seed)
        result = ExperimentCommandService(args.threads).handle_run_experiment(command)
    except ConfigError as error:
        logger.error("Configuration error in %s: %s", args.config, error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    for message in result.flagged:
        print(f"flagged: {message}", file=sys.stderr)
    print(result.manifest_path)
    return result.exit_code
