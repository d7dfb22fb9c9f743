import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

import pytz

DEFAULT_TIMEZONE = "UTC"
TIMEZONE_ENV = "KRONSOLVE_LOG_TIMEZONE"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S %z"


class CustomFormatter(logging.Formatter):
    def __init__(self, fmt=None, datefmt=None, timezone=None):
        super().__init__(fmt, datefmt)
        self.timezone = timezone

    def formatTime(self, record, datefmt=None):
        dt = datetime.fromtimestamp(record.created, tz=pytz.utc)
        if self.timezone:
            dt = dt.astimezone(self.timezone)
        if datefmt:
            return dt.strftime(datefmt)
        return dt.isoformat()


def _resolve_timezone(timezone_str: Optional[str]):
    name = timezone_str or os.getenv(TIMEZONE_ENV) or DEFAULT_TIMEZONE
    try:
        return pytz.timezone(name)
    except pytz.UnknownTimeZoneError:
        logging.getLogger(__name__).warning(
            f"Unknown log timezone '{name}', falling back to {DEFAULT_TIMEZONE}"
        )
        return pytz.utc


def setup_logger(
    log_file: Optional[Union[str, Path]] = None,
    level: Union[int, str] = logging.INFO,
    timezone_str: Optional[str] = None,
) -> logging.Logger:
    """
    Configure the root logger with a console handler and an optional file.

    Calling it again only updates the level, so the CLI and the test suite can
    both call it without duplicating handlers.
    """
    logger = logging.getLogger()
    logger.setLevel(level)

    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(level)
        return logger

    formatter = CustomFormatter(
        LOG_FORMAT, datefmt=DATE_FORMAT, timezone=_resolve_timezone(timezone_str)
    )

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file is not None:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
