import sys

from loguru import logger

from explorer.core.config import settings

LOG_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def configure_logging(level: str | None = None, serialize: bool | None = None) -> None:
    """Install a single stderr sink for loguru."""
    if level is not None:
        settings.LOG_LEVEL = level.upper()
    if serialize is not None:
        settings.LOG_SERIALIZE = serialize

    logger.remove()
    logger.add(
        sys.stderr,
        level=settings.LOG_LEVEL,
        format=LOG_FORMAT,
        serialize=settings.LOG_SERIALIZE,
        backtrace=False,
        diagnose=False,
    )
