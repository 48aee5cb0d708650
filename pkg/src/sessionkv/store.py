"""Per-server versioned key-value state: version chains, the stable vector of
applied origin indices, and last-writer-wins reads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .hlc import HlcTimestamp


@dataclass(frozen=True, slots=True)
class Version:
    """One written value. (t, dc_id) is unique system-wide."""

    value: bytes
    t: HlcTimestamp
    dc_id: int

    def order_key(self):
        return (self.t, self.dc_id)


@dataclass(frozen=True, slots=True)
class ReplicationPayload:
    """What a log entry carries.

    origin_idx is None only while a locally originated write is in its own
    datacenter's log; entries ingested from a Replicate message always carry
    the origin datacenter's log index.
    """

    key: str
    version: Version
    origin_dc: int
    origin_idx: Optional[int] = None


@dataclass(frozen=True, slots=True)
class StoredVersion:
    """Chain record: the version plus its (dc_id, origin_idx) identity."""

    version: Version
    origin_idx: int

    def order_key(self):
        return (self.version.t, self.version.dc_id)


def winner(chain) -> Optional[StoredVersion]:
    """Deterministic read winner: lexicographically greatest (timestamp, dc_id).

    Equal timestamps across datacenters are possible; the dc_id tie-break
    keeps every replica converging on the same version.
    """
    best = None
    for sv in chain:
        if best is None or sv.order_key() > best.order_key():
            best = sv
    return best


class Store:
    """State owned by one data replica; mutated only by its event handlers."""

    def __init__(self, dcs: int, gc_window: int = 4):
        self.dcs = dcs
        self.gc_window = gc_window
        self.chains: dict[str, list[StoredVersion]] = {}
        self.sv = [0] * dcs

    def apply_commit(self, payload: ReplicationPayload, local_index: int) -> bool:
        """Apply one committed entry; returns False when deduplicated.

        Origin index oidx is the carried one for ingested entries, else this
        group's own log index. A second delivery of the same (origin, oidx),
        e.g. after a relay restart, is dropped without touching state.
        """
        origin = payload.origin_dc
        oidx = payload.origin_idx if payload.origin_idx is not None else local_index
        if oidx <= self.sv[origin]:
            return False
        self.chains.setdefault(payload.key, []).append(StoredVersion(payload.version, oidx))
        self.sv[origin] = oidx
        if self.gc_window is not None:
            self.gc_chain(payload.key)
        return True

    def read_latest(self, key: str) -> Optional[StoredVersion]:
        chain = self.chains.get(key)
        if not chain:
            return None
        return winner(chain)

    def gc_chain(self, key: str) -> int:
        """Trim to the winner plus the most recent gc_window versions; returns kept count."""
        chain = self.chains.get(key)
        if not chain:
            return 0
        keep = self.gc_window + 1
        if len(chain) > keep:
            chain.sort(key=StoredVersion.order_key)
            del chain[:-keep]
        return len(chain)

    def snapshot(self) -> dict:
        """Per-key chain identities and winner, for convergence records."""
        out = {}
        for key, chain in sorted(self.chains.items()):
            w = winner(chain)
            out[key] = {
                "winner": [w.version.dc_id, w.origin_idx],
                "value": w.version.value.decode("latin-1"),
                "t": [w.version.t.l, w.version.t.c],
                "chain": sorted([sv.version.dc_id, sv.origin_idx] for sv in chain),
            }
        return out

    def reset(self) -> None:
        """Volatile state is lost on crash; the log replay rebuilds it."""
        self.chains = {}
        self.sv = [0] * self.dcs
