"""Wire messages between clients, data servers, and cross-DC relays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .hlc import HlcTimestamp
from .store import Version


@dataclass(frozen=True, slots=True)
class GetRequest:
    key: str
    hrv: tuple
    hwv: tuple
    req_id: tuple
    client: object
    level: str


@dataclass(frozen=True, slots=True)
class GetReply:
    req_id: tuple
    found: bool
    value: Optional[bytes]
    dc_id: int
    log_idx: int
    t: HlcTimestamp
    park_ms: float


@dataclass(frozen=True, slots=True)
class PutRequest:
    key: str
    value: bytes
    dt: HlcTimestamp
    # (hrv, hwv) pair, present only in non-HLC mode
    blocking: Optional[tuple]
    req_id: tuple
    client: object
    level: str


@dataclass(frozen=True, slots=True)
class PutReply:
    req_id: tuple
    dc_id: int
    log_idx: int
    t: HlcTimestamp
    park_ms: float


@dataclass(frozen=True, slots=True)
class NotLeader:
    req_id: tuple
    hint: object


@dataclass(frozen=True, slots=True)
class RequestTimeout:
    req_id: tuple
    kind: str  # "get" | "put"


@dataclass(frozen=True, slots=True)
class WrongPartition:
    req_id: tuple


@dataclass(frozen=True, slots=True)
class Replicate:
    key: str
    version: Version
    origin_dc: int
    origin_idx: int
    hops: int = 0
