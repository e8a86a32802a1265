"""Thin client for the sfr-kit reward service wire protocol."""

from .client import (
    DEFAULT_TIMEOUT,
    TASKS,
    ClientError,
    ClientSession,
    GroupRequest,
    GroupScore,
    ScoreTimeoutError,
    ServerError,
    SessionClosedError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TIMEOUT",
    "TASKS",
    "ClientError",
    "ClientSession",
    "GroupRequest",
    "GroupScore",
    "ScoreTimeoutError",
    "ServerError",
    "SessionClosedError",
    "ValidationError",
    "__version__",
]
