"""Deterministic desk-scale simulator of a geo-replicated key-value store:
Raft groups inside datacenters, asynchronous FIFO relays across them, hybrid
logical clock timestamps, per-operation session guarantee levels, and trace
checkers for every per-key guarantee."""

from .config import ScenarioConfig
from .hlc import HlcClock, HlcTimestamp
from .session import ReadLevel, WriteLevel
from .store import Store, Version

__all__ = [
    "HlcClock",
    "HlcTimestamp",
    "ReadLevel",
    "ScenarioConfig",
    "Store",
    "Version",
    "WriteLevel",
]

__version__ = "0.1.0"
