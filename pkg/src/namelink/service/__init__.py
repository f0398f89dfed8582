"""HTTP matching service: configuration, latency accounting and the app factory."""

from .app import ServiceState, create_app, create_scorer_app
from .config import ENV_PREFIX, ServiceConfig, load_config
from .stats import LatencyStats, StatsSnapshot

__all__ = [
    "ENV_PREFIX",
    "ServiceConfig",
    "load_config",
    "LatencyStats",
    "StatsSnapshot",
    "ServiceState",
    "create_app",
    "create_scorer_app",
]
