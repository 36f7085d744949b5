# Copyright (c) 2023-2024 DepGSA developers
# MIT license

"""
Logging utilities.
"""

import os
import sys
import logging
from logging import FileHandler, StreamHandler


logger = logging.getLogger(__name__)

# Environment variable that forces the DEBUG level whatever configured
DEBUG_ENV = "DEBUG_DEPGSA"


def get_level(level):
    """
    Convert a level name (e.g., ``"info"``) into the ``logging`` integer.
    The ``DEBUG_DEPGSA`` environment variable overrides it with DEBUG.
    """
    if os.environ.get(DEBUG_ENV):
        print("DEBUG: Force 'DEBUG' logging level", file=sys.stderr)
        level = "DEBUG"
    if isinstance(level, int):
        return level
    level_int = getattr(logging, str(level).upper(), None)
    if not isinstance(level_int, int):
        raise ValueError("invalid log level: %s" % level)
    return level_int


def _remove_handlers(root_logger, cls):
    """
    Close and remove the handlers of the given class; returns the file
    mode of the last removed ``FileHandler`` (or ``None``).
    """
    mode = None
    for handler in list(root_logger.handlers):
        if type(handler) is cls:
            mode = getattr(handler, "mode", None)
            handler.close()
            root_logger.removeHandler(handler)
    return mode


def setup_logging(dict_config=None, level=None, stream=None, logfile=None):
    """
    Configure the root logger, from the config file and then from the
    overrides (e.g., the command line options).

    Parameters
    ----------
    dict_config : dict, optional
        ``logging.basicConfig()`` arguments (see ``ConfigManager.logging``);
        when given, all the existing handlers are dropped first.
    level : str, optional
        Level replacing the configured one.
    stream : {"stderr", "stdout", ""}, optional
        Where the console messages go; ``""`` turns them off.
    logfile : str, optional
        Extra log file; ``""`` turns the file output off.

    NOTE
    ----
    A new stream or file handler takes the place of the existing one
    of the same kind.
    """
    filemode = "a"
    root_logger = logging.getLogger()
    if dict_config:
        dict_config = dict(dict_config)
        # ``basicConfig()`` rejects ``filemode`` without ``filename``
        filemode = dict_config.pop("filemode", filemode)
        for handler in list(root_logger.handlers):
            handler.close()
            root_logger.removeHandler(handler)
        logging.basicConfig(**dict_config)

    if level is not None or os.environ.get(DEBUG_ENV):
        root_logger.setLevel(get_level(level or root_logger.level))

    if root_logger.handlers:
        formatter = root_logger.handlers[0].formatter
    else:
        formatter = logging.Formatter()

    if stream is not None:
        if stream not in ["", "stderr", "stdout"]:
            raise ValueError("invalid stream: %s" % stream)
        _remove_handlers(root_logger, StreamHandler)
        if stream:
            handler = StreamHandler(getattr(sys, stream))
            handler.setFormatter(formatter)
            root_logger.addHandler(handler)

    if logfile is not None:
        filemode = _remove_handlers(root_logger, FileHandler) or filemode
        if logfile:
            handler = FileHandler(logfile, mode=filemode)
            handler.setFormatter(formatter)
            root_logger.addHandler(handler)
    logger.info("Set up logging.")
