import logging
import sys
from types import NoneType

__all__ = ("config", "log_set_level", "log_get_level", "DEFAULT_LEVEL_INDEX")

from typing import NoReturn

LOG_FORMAT = "%(asctime)s %(levelname).3s %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"


def fatal(msg, *args, **kwargs) -> NoReturn:
    """
    Log at CRITICAL and leave with the given exit code (1 if omitted).
    """
    exitcode = kwargs.pop("exitcode", 1)
    logging.critical(msg, *args, **kwargs)
    sys.exit(exitcode)


logging.fatal = fatal


def config(**kwargs):
    """
    Route the root logger to stdout in the kernex format. Keyword arguments are
    passed through to logging.basicConfig.
    """
    kwargs.setdefault("level", logging.INFO)
    kwargs.setdefault("format", LOG_FORMAT)
    kwargs.setdefault("datefmt", LOG_DATEFMT)
    kwargs.setdefault("handlers", [logging.StreamHandler(sys.stdout)])
    kwargs.setdefault("force", True)
    logging.basicConfig(**kwargs)


__levelIndex = [
    logging.FATAL,
    logging.ERROR,
    logging.WARNING,
    logging.INFO,
    logging.DEBUG,
]

DEFAULT_LEVEL_INDEX = __levelIndex.index(logging.INFO)


def log_set_level(level: int | NoneType = None):
    """
    Set the root log level from a verbosity index.

    :param level: index into FATAL..DEBUG, clamped to the valid range.
                  If not specified, the level is reset to INFO.
    :type level: int | NoneType
    :return: The logging level that was set.
    :rtype: int
    """
    if level is None:
        level = DEFAULT_LEVEL_INDEX
    level = __levelIndex[max(0, min(level, len(__levelIndex) - 1))]
    logging.getLogger().setLevel(level)
    return level


def log_get_level() -> int:
    """the verbosity index of the current root level"""
    level = logging.getLogger().getEffectiveLevel()
    for index, value in enumerate(__levelIndex):
        if level >= value:
            return index
    return len(__levelIndex) - 1
