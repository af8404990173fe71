"""Logging and stage tracing for calibration runs."""

from __future__ import annotations

import sys
import time
from contextlib import contextmanager
from typing import Any, Iterator

from loguru import logger

from ..errors import CalibrationError, ErrorCode

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)

# Configure logger
logger.remove()
_sink_id = logger.add(sys.stderr, format=LOG_FORMAT, level="INFO")


def configure_logging(level: str = "INFO") -> None:
    """Replace the stderr sink with one at ``level``."""
    global _sink_id
    logger.remove(_sink_id)
    _sink_id = logger.add(sys.stderr, format=LOG_FORMAT, level=level.upper())


@contextmanager
def stage(name: str, **context: Any) -> Iterator[None]:
    """Time a named stage and tag any failure raised inside it with the stage name."""
    start = time.perf_counter()
    logger.debug("[{}] start {}", name, context or "")
    try:
        yield
    except CalibrationError as exc:
        logger.debug("[{}] failed after {:.2f}ms", name, _elapsed_ms(start))
        raise exc.tag(stage=name, **context)
    except Exception as exc:
        logger.debug("[{}] failed after {:.2f}ms", name, _elapsed_ms(start))
        raise CalibrationError(
            ErrorCode.INTERNAL_ERROR,
            f"{name} failed: {exc}",
            {"stage": name, **context},
        ) from exc
    logger.debug("[{}] done duration={:.2f}ms", name, _elapsed_ms(start))


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0
