"""Thread-safe latency and verdict accounting over a sliding window."""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass

__all__ = ["LatencyStats", "StatsSnapshot", "WINDOW", "nearest_rank"]

WINDOW = 10_000


def nearest_rank(sorted_values, q: float) -> float:
    """Nearest-rank quantile of an ascending sequence; 0.0 when empty."""
    if not sorted_values:
        return 0.0
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class StatsSnapshot:
    requests: int
    errors: int
    p50_ms: float
    p95_ms: float
    p99_ms: float
    window: int
    verdicts_yes: int
    verdicts_no: int

    def to_dict(self) -> dict:
        return {
            "requests": self.requests,
            "errors": self.errors,
            "latency_ms": {"p50": self.p50_ms, "p95": self.p95_ms, "p99": self.p99_ms, "window": self.window},
            "verdicts": {"yes": self.verdicts_yes, "no": self.verdicts_no},
        }


class LatencyStats:
    """Request counters plus the last ``window`` latencies.

    The lock guards only appends and a list copy; sorting for quantiles
    happens outside it so readers never stall request handlers.
    """

    def __init__(self, window: int = WINDOW):
        self._lock = threading.Lock()
        self._latencies: deque[float] = deque(maxlen=window)
        self.requests = 0
        self.errors = 0
        self.yes = 0
        self.no = 0

    def record(self, latency_ms: float, error: bool = False) -> None:
        with self._lock:
            self.requests += 1
            self.errors += int(error)
            self._latencies.append(latency_ms)

    def record_verdicts(self, yes: int, no: int) -> None:
        with self._lock:
            self.yes += yes
            self.no += no

    def snapshot(self) -> StatsSnapshot:
        with self._lock:
            values = list(self._latencies)
            requests, errors, yes, no = self.requests, self.errors, self.yes, self.no
        values.sort()
        return StatsSnapshot(
            requests, errors,
            nearest_rank(values, 0.50), nearest_rank(values, 0.95), nearest_rank(values, 0.99),
            len(values), yes, no,
        )
