import logging

from .config import LOG_LEVELS, get_config

__all__ = [
    "logger",
]

_level = LOG_LEVELS[get_config().log_level]

logging.basicConfig(level=_level, format="%(asctime)s %(levelname)s [%(name)s] %(message)s")

logger = logging.getLogger(__name__)
logger.setLevel(_level)
