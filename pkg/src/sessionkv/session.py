"""Client-side session state and per-operation consistency level selection.

Everything here is client-local: two DxP matrices of the highest origin log
indices read and written per (datacenter, partition), and two scalar
dependency timestamps. Requests carry only the projections for one partition.
"""

from __future__ import annotations

from enum import Enum

from .hlc import ZERO, HlcTimestamp


class ReadLevel(Enum):
    EVENTUAL = "E"
    MONOTONIC_READ = "MR"
    READ_YOUR_WRITE = "RYW"
    MONOTONIC_READ_YOUR_WRITE = "MRYW"


class WriteLevel(Enum):
    EVENTUAL = "E"
    MONOTONIC_WRITE = "MW"
    WRITE_FOLLOWS_READS = "WFR"
    MONOTONIC_WRITE_FOLLOWS_READS = "MWFR"


_WANTS_HRV = {ReadLevel.MONOTONIC_READ, ReadLevel.MONOTONIC_READ_YOUR_WRITE}
_WANTS_HWV = {ReadLevel.READ_YOUR_WRITE, ReadLevel.MONOTONIC_READ_YOUR_WRITE}
_WANTS_DTR = {WriteLevel.WRITE_FOLLOWS_READS, WriteLevel.MONOTONIC_WRITE_FOLLOWS_READS}
_WANTS_DTW = {WriteLevel.MONOTONIC_WRITE, WriteLevel.MONOTONIC_WRITE_FOLLOWS_READS}


class SessionState:
    """Per-client history; every cell and scalar is non-decreasing."""

    def __init__(self, dcs: int, partitions: int):
        self.dcs = dcs
        self.partitions = partitions
        self.read_idx = [[0] * partitions for _ in range(dcs)]
        self.write_idx = [[0] * partitions for _ in range(dcs)]
        self.dt_r = ZERO
        self.dt_w = ZERO

    def _column(self, matrix, p: int) -> tuple:
        return tuple(matrix[d][p] for d in range(self.dcs))

    def build_get(self, partition: int, level: ReadLevel) -> tuple[tuple, tuple]:
        """(hrv, hwv) vectors for a read at the given level."""
        zero = (0,) * self.dcs
        hrv = self._column(self.read_idx, partition) if level in _WANTS_HRV else zero
        hwv = self._column(self.write_idx, partition) if level in _WANTS_HWV else zero
        return hrv, hwv

    def absorb_get_reply(self, partition: int, dc_id: int, log_idx: int,
                         t: HlcTimestamp) -> None:
        if log_idx > self.read_idx[dc_id][partition]:
            self.read_idx[dc_id][partition] = log_idx
        if t > self.dt_r:
            self.dt_r = t

    def build_put(self, partition: int, level: WriteLevel, hlc_mode: bool):
        """(dt, blocking) for a write.

        HLC mode sends a dependency timestamp and never blocks. Without HLC
        the dependency rides as (hrv, hwv) vectors the server must wait on.
        """
        if hlc_mode:
            dt = ZERO
            if level in _WANTS_DTR and self.dt_r > dt:
                dt = self.dt_r
            if level in _WANTS_DTW and self.dt_w > dt:
                dt = self.dt_w
            return dt, None
        zero = (0,) * self.dcs
        hrv = self._column(self.read_idx, partition) if level in _WANTS_DTR else zero
        hwv = self._column(self.write_idx, partition) if level in _WANTS_DTW else zero
        return ZERO, (hrv, hwv)

    def absorb_put_reply(self, partition: int, dc_id: int, log_idx: int,
                         t: HlcTimestamp) -> None:
        if log_idx > self.write_idx[dc_id][partition]:
            self.write_idx[dc_id][partition] = log_idx
        if t > self.dt_w:
            self.dt_w = t
