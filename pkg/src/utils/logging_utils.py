"""
Logging setup shared by the command-line runner and scripts
"""
import logging
from pathlib import Path
from typing import Optional, Union

from config.settings import LOGGING_CONFIG

_ROOT_LOGGER_NAME = "src"


def setup_logging(level: Union[int, str] = LOGGING_CONFIG["level"],
                  log_file: Optional[Union[str, Path]] = None) -> logging.Logger:
    """Configure console (and optional file) logging for the package loggers.

    Calling it again replaces the handlers installed by the previous call.
    """
    logger = logging.getLogger(_ROOT_LOGGER_NAME)
    logger.setLevel(level)

    for handler in list(logger.handlers):
        if getattr(handler, "_installed_by_setup", False):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(LOGGING_CONFIG["format"])

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    console_handler._installed_by_setup = True
    logger.addHandler(console_handler)

    if log_file is not None:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        file_handler._installed_by_setup = True
        logger.addHandler(file_handler)

    return logger
