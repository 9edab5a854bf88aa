"""
Structured logging for LAMA.
Wraps structlog with the LOG_LEVEL convention and a performance decorator.
"""
import logging
import os
import sys
import time
from contextlib import contextmanager
from functools import wraps
from typing import Any, Callable, Iterator, Optional, Tuple

import structlog

_OPTIONS = {"level": None, "json_logs": True}


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    # resolve sys.stderr per logger so redirected streams are honoured
    return structlog.PrintLogger(file=sys.stderr)


def setup_logging(level: Optional[str] = None, json_logs: bool = True) -> None:
    """Configure structlog; level defaults to the LOG_LEVEL environment variable."""
    level_name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    _OPTIONS.update(level=level, json_logs=json_logs)
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level_name, logging.INFO)
        ),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )


def logging_options() -> Tuple[Optional[str], bool]:
    """Arguments of the last setup_logging call, for worker processes."""
    return _OPTIONS["level"], _OPTIONS["json_logs"]


def get_logger(name: str) -> Any:
    """Get a structured logger bound to the module name."""
    return structlog.get_logger(name)


@contextmanager
def bind_scene_context(scene_id: str) -> Iterator[None]:
    """Bind scene_id to every log line emitted inside the block."""
    with structlog.contextvars.bound_contextvars(scene_id=scene_id):
        yield


def performance(operation: str) -> Callable:
    """Decorator to log function duration."""
    logger = get_logger("lama.performance")

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    f"Performance: {operation} failed",
                    operation=operation,
                    duration_ms=(time.perf_counter() - start_time) * 1000,
                    status="error",
                    error=str(e),
                )
                raise
            logger.debug(
                f"Performance: {operation}",
                operation=operation,
                duration_ms=(time.perf_counter() - start_time) * 1000,
                status="success",
            )
            return result

        return wrapper

    return decorator
