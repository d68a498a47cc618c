import logging
import sys
from typing import Optional

logger = logging.getLogger(__name__)

_stdout_handler: Optional[logging.Handler] = None


def configure_logger(level: int) -> None:
    """Configure the logger for this module.

    Repeated calls only change the level; the stdout handler is attached once.

    """
    global _stdout_handler
    logger.setLevel(level)
    if _stdout_handler is None:
        _stdout_handler = logging.StreamHandler(sys.stdout)
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        _stdout_handler.setFormatter(formatter)
        logger.addHandler(_stdout_handler)
