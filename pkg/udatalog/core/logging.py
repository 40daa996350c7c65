"""
Structured logging for the interpreter.

Answers and fact stores go to stdout; every log line goes to stderr as JSON.
"""
import logging
import sys
from typing import Any, Optional

import structlog
from structlog.stdlib import LoggerFactory

from udatalog.core.config import settings

# Third-party loggers that are too chatty below WARNING.
_QUIET = ("lark",)


def configure_logging(level: Optional[str] = None) -> None:
    """Configure structlog and the stdlib root logger for one run."""
    level_name = (level or settings.LOG_LEVEL).upper()

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=getattr(logging, level_name), force=True)
    for name in _QUIET:
        logging.getLogger(name).setLevel(max(logging.WARNING, logging.getLogger().level))


def get_logger(name: str) -> Any:
    """Logger bound to a module name."""
    return structlog.get_logger(name)
