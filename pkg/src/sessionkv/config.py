"""Scenario configuration: one flat record, JSON on disk, hashable for
determinism checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .session import ReadLevel, WriteLevel
from .trace import config_hash

READ_LEVELS = {lv.value: lv for lv in ReadLevel}
WRITE_LEVELS = {lv.value: lv for lv in WriteLevel}


@dataclass
class ScenarioConfig:
    seed: int = 0
    dcs: int = 2
    partitions: int = 4
    replicas: int = 3
    clients_per_dc: int = 40
    local_prob: float = 1.0
    write_prob: float = 0.5
    read_level: str = "E"
    write_level: str = "E"
    hlc_mode: bool = True
    write_blocking: bool = True
    xdc_delay_ms: tuple = (7.5, 7.5)
    intra_delay_ms: tuple = (0.2, 0.5)
    skew_ms: float = 0.0
    drift: float = 0.0
    drop_prob: float = 0.0
    dup_prob: float = 0.0
    duration_ms: float = 0.0       # 0 means "until every client spends its budget"
    ops_total: int = 5000
    keys: int = 64
    key_bytes: int = 16
    value_bytes: int = 64
    relay_dispatch_ms: float = 2.0
    park_timeout_ms: float = 0.0   # 0 means parked requests wait indefinitely
    service_ms: float = 0.1
    gc_window: int = 4
    heartbeat_ms: float = 2.0
    tick_ms: float = 1.0
    fifo: bool = True
    max_sim_ms: float = 120000.0
    trace_raft: bool = False
    faults: list = field(default_factory=list)

    def __post_init__(self):
        if self.read_level not in READ_LEVELS:
            raise ValueError(f"read_level must be one of {sorted(READ_LEVELS)}")
        if self.write_level not in WRITE_LEVELS:
            raise ValueError(f"write_level must be one of {sorted(WRITE_LEVELS)}")
        for name in ("local_prob", "write_prob", "drop_prob", "dup_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} out of [0,1]")
        self.xdc_delay_ms = _as_range(self.xdc_delay_ms)
        self.intra_delay_ms = _as_range(self.intra_delay_ms)

    @property
    def read_level_enum(self) -> ReadLevel:
        return READ_LEVELS[self.read_level]

    @property
    def write_level_enum(self) -> WriteLevel:
        return WRITE_LEVELS[self.write_level]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["xdc_delay_ms"] = list(self.xdc_delay_ms)
        d["intra_delay_ms"] = list(self.intra_delay_ms)
        return d

    def hash(self) -> str:
        return config_hash(self.to_dict())

    def replace(self, **kw) -> ScenarioConfig:
        d = self.to_dict()
        d.update(kw)
        return ScenarioConfig.from_dict(d)

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _as_range(v) -> tuple:
    if isinstance(v, (int, float)):
        return (float(v), float(v))
    lo, hi = v
    if hi < lo:
        raise ValueError(f"delay range {v} is inverted")
    return (float(lo), float(hi))
