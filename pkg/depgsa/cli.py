# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Command line interface of the sensitivity runs.

Exit codes:

* 0: success
* 2: invalid configuration (parsing, validation, parameters, expressions)
* 3: degenerate output variance
* 4: model evaluation failure
"""

import sys
import argparse
import logging

from . import __version__
from .analysis import RunConfig, run
from .configs.manager import ConfigManager
from .utils.logging import setup_logging
from .errors import (ConfigError, DegenerateVarianceError,
                     DependencyModelError, DomainError, ExpressionError,
                     InfeasibleError, FittingError, ModelEvaluationError,
                     ParameterError)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_EVALUATION = 4

# Errors of the configurations and of the objects built from them
CONFIG_ERRORS = (ConfigError, ParameterError, DomainError,
                 DependencyModelError, ExpressionError, InfeasibleError,
                 FittingError)


def validate_config(text):
    """
    Parse and check a configuration (JSON or INI-like text).

    Returns
    -------
    config : `~depgsa.analysis.RunConfig` or list[str]
        The run configuration, or the list of *all* the errors found.
    """
    configs = ConfigManager()
    try:
        configs.read_text(text)
    except ConfigError as e:
        return [line for line in str(e).splitlines() if line.strip()]
    valid, errors = configs.check_all(raise_exception=False)
    if not valid:
        return ['Config "%s": %s' % (key, val)
                for key, val in sorted(errors.items())]
    try:
        return RunConfig.from_configs(configs)
    except CONFIG_ERRORS as e:
        return [str(e)]


def _apply_subsets(configs, value):
    """
    ``--subsets``: ``singletons``, ``pairs``, ``preset``, ``upto:N`` or
    explicit subsets like ``1;2;1,2``.
    """
    if value in ("singletons", "pairs", "preset"):
        configs.setn("subsets/mode", value)
    elif value.startswith("upto:"):
        configs.setn("subsets/mode", "upto")
        configs.setn("subsets/order", value.split(":", 1)[1])
    else:
        configs.setn("subsets/mode", "list")
        configs.setn("subsets/list",
                     [s.strip() for s in value.split(";") if s.strip()])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="depgsa",
        description="Global sensitivity analysis of models with "
                    "dependent inputs")
    parser.add_argument("-c", "--config", dest="config",
                        help="configuration file (JSON or INI-like)")
    parser.add_argument("--preset", choices=["linear", "portfolio",
                                             "gsobol"],
                        help="built-in test model with its inputs")
    parser.add_argument("-o", "--out", dest="outdir",
                        help="output directory")
    parser.add_argument("--seed", type=int,
                        help="seed of the sampling (overrides the config)")
    parser.add_argument("--threads", type=int,
                        help="number of worker threads")
    parser.add_argument("--format", choices=["csv", "json", "both"],
                        help="output format of the index report")
    parser.add_argument("--subsets",
                        help="singletons | pairs | preset | upto:N | "
                             "explicit list, e.g., '1;2;1,2'")
    parser.add_argument("--m", type=int, dest="m",
                        help="number of pick-freeze rows")
    parser.add_argument("--generator",
                        choices=["sobol", "sobol-joe-kuo", "prng"],
                        help="generator of the uniform panels")
    parser.add_argument("--clobber", action="store_true",
                        help="overwrite the existing output files")
    parser.add_argument("--dry-run", action="store_true",
                        help="only plan and route the subsets")
    parser.add_argument("-l", "--log-level", dest="loglevel",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR",
                                 "CRITICAL"],
                        help="logging level (overrides the config)")
    parser.add_argument("-L", "--logfile", dest="logfile",
                        help="file where the log messages also go")
    parser.add_argument("-V", "--version", action="version",
                        version="%(prog)s " + __version__)
    return parser


def main(argv=None, configs=None):
    """
    Entry point of the ``depgsa`` command; returns the exit code.
    """
    args = build_parser().parse_args(argv)
    if configs is None:
        from .share import CONFIGS as configs

    try:
        if args.config:
            configs.read_userconfig(args.config)
        elif not args.preset:
            raise ConfigError("either --config or --preset is required")
        if args.preset:
            configs.setn("model/preset", args.preset)
            if not args.config and not args.subsets:
                configs.setn("subsets/mode", "preset")
        overrides = [("output/dir", args.outdir),
                     ("sampling/seed", args.seed),
                     ("estimation/threads", args.threads),
                     ("output/format", args.format),
                     ("sampling/m", args.m),
                     ("sampling/generator", args.generator)]
        for key, value in overrides:
            if value is not None:
                configs.setn(key, value)
        if args.clobber:
            configs.setn("output/clobber", True)
        if args.subsets:
            _apply_subsets(configs, args.subsets)
    except (ConfigError, KeyError) as e:
        setup_logging(configs.logging)
        logger.error(str(e))
        return EXIT_CONFIG

    setup_logging(configs.logging, level=args.loglevel,
                  logfile=args.logfile)
    tool = build_parser().prog
    logger.info("COMMAND: {0}".format(" ".join([tool] + list(argv or
                                                         sys.argv[1:]))))

    try:
        configs.check_all()
        config = RunConfig.from_configs(configs)
        result = run(config, dry_run=args.dry_run)
    except CONFIG_ERRORS as e:
        logger.error("Invalid configuration: %s" % e)
        return EXIT_CONFIG
    except DegenerateVarianceError as e:
        logger.error(str(e))
        return EXIT_DEGENERATE
    except ModelEvaluationError as e:
        logger.error("Model evaluation failed: %s" % e)
        return EXIT_EVALUATION
    except OSError as e:
        logger.error("%s (use --clobber to overwrite)" % e)
        return EXIT_CONFIG

    if args.dry_run:
        routing = result.table.to_dict()
        for name, route in routing["routes"].items():
            logger.info("%-8s -> representation %d" %
                        (name, route["representation"]))
    for outfile in result.files:
        logger.info("Wrote: %s" % outfile)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
