"""
Evaluation metrics collection.
"""
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Dict, Optional

from udatalog.core.logging import get_logger

logger = get_logger(__name__)


class EvaluationMetrics:
    """Counters and wall-clock timers for one evaluation."""

    def __init__(self):
        self.counters: Dict[str, int] = defaultdict(int)
        self.timers: Dict[str, float] = defaultdict(float)

    def increment_counter(self, name: str, value: int = 1) -> None:
        self.counters[name] += value

    def record_timer(self, name: str, duration: float) -> None:
        self.timers[name] += duration

    @contextmanager
    def timer(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.record_timer(name, time.perf_counter() - start)

    def snapshot(self) -> Dict[str, float]:
        data: Dict[str, float] = {k: float(v) for k, v in self.counters.items()}
        data.update({f"{k}.seconds": round(v, 6) for k, v in self.timers.items()})
        return data

    def log_summary(self, event: str = "evaluation metrics", extra: Optional[Dict[str, object]] = None) -> None:
        logger.debug(event, **self.snapshot(), **(extra or {}))
