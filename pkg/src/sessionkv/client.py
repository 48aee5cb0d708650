"""Closed-loop client: issue one operation, absorb the reply into the
session, repeat. Reads go to any replica of the chosen datacenter, writes to
that datacenter's partition leader."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .messages import (GetReply, GetRequest, NotLeader, PutReply, PutRequest,
                       RequestTimeout, WrongPartition)
from .session import ReadLevel, SessionState, WriteLevel

MAX_REDIRECTS = 50
REDIRECT_BACKOFF_MS = 0.5


class ProtocolError(RuntimeError):
    pass


@dataclass
class OpRecord:
    kind: str
    level: str
    key: str
    dc: int
    target: object
    issue_ms: float
    req_id: tuple = ()
    status: str = "inflight"
    done_ms: float = 0.0
    park_ms: float = 0.0
    redirects: int = 0
    value: Optional[bytes] = None

    @property
    def latency_ms(self) -> float:
        return self.done_ms - self.issue_ms


@dataclass
class ClientConfig:
    read_level: ReadLevel
    write_level: WriteLevel
    hlc_mode: bool
    write_prob: float
    local_prob: float
    keys: int
    key_bytes: int
    value_bytes: int
    budget: int
    duration_ms: float = 0.0
    think_ms: float = 0.0


class ClientActor:
    def __init__(self, cid, dc: int, cfg: ClientConfig, topo, registry, net, loop,
                 trace, rng: random.Random):
        self.cid = cid
        self.dc = dc
        self.cfg = cfg
        self.topo = topo
        self.registry = registry
        self.net = net
        self.loop = loop
        self.trace = trace
        self.rng = rng
        self.session = SessionState(topo.dcs, topo.partitions)
        self.oplog: list[OpRecord] = []
        self.current: Optional[OpRecord] = None
        self._seq = 0
        self.finished = False
        net.register(cid, self.on_message)

    # -- workload ------------------------------------------------------------

    def start(self, stagger_ms: float = 1.0) -> None:
        self.loop.schedule(self.rng.uniform(0.0, stagger_ms), self._next_op)

    def _done_issuing(self) -> bool:
        if len(self.oplog) >= self.cfg.budget:
            return True
        if self.cfg.duration_ms and self.loop.now >= self.cfg.duration_ms:
            return True
        return False

    def _make_key(self) -> str:
        n = self.rng.randrange(self.cfg.keys)
        return f"k{n:0{self.cfg.key_bytes - 1}d}"

    def _make_value(self) -> bytes:
        tag = f"{self.cid}#{self._seq}:"
        return tag.encode().ljust(self.cfg.value_bytes, b".")

    def _pick_dc(self) -> int:
        if self.topo.dcs == 1 or self.rng.random() < self.cfg.local_prob:
            return self.dc
        other = self.rng.randrange(self.topo.dcs - 1)
        return other if other < self.dc else other + 1

    def _next_op(self) -> None:
        if self.finished:
            return
        if self._done_issuing():
            self.finished = True
            return
        is_write = self.rng.random() < self.cfg.write_prob
        key = self._make_key()
        dc = self._pick_dc()
        p = self.topo.partition_of(key)
        if is_write:
            target = self.registry.leader_of(dc, p)
            op = OpRecord("put", self.cfg.write_level.value, key, dc, target, self.loop.now)
        else:
            group = self.topo.group(dc, p)
            live = [n for n in group if self.registry.is_up(n)] or group
            target = live[self.rng.randrange(len(live))]
            op = OpRecord("get", self.cfg.read_level.value, key, dc, target, self.loop.now)
        self.oplog.append(op)
        self.current = op
        self._send(op, target)

    def _send(self, op: OpRecord, target) -> None:
        self._seq += 1
        req_id = (str(self.cid), self._seq)
        op.req_id = req_id
        op.target = target
        p = self.topo.partition_of(op.key)
        if op.kind == "get":
            hrv, hwv = self.session.build_get(p, self.cfg.read_level)
            msg = GetRequest(op.key, hrv, hwv, req_id, self.cid, op.level)
            self.trace.get_issued(self.loop.now, self.cid, req_id, op.key, target,
                                  op.level, hrv, hwv)
        else:
            dt, blocking = self.session.build_put(p, self.cfg.write_level, self.cfg.hlc_mode)
            msg = PutRequest(op.key, self._make_value(), dt, blocking, req_id,
                             self.cid, op.level)
            self.trace.put_issued(self.loop.now, self.cid, req_id, op.key, target,
                                  op.level, dt.as_dict(), self.cfg.hlc_mode)
        self.net.send(self.cid, target, msg, klass="client")

    # -- replies -------------------------------------------------------------

    def on_message(self, msg) -> None:
        op = self.current
        if op is None or msg.req_id != op.req_id:
            raise ProtocolError(f"{self.cid}: reply {msg} does not match outstanding request")
        p = self.topo.partition_of(op.key)
        if isinstance(msg, GetReply):
            if msg.found:
                self.session.absorb_get_reply(p, msg.dc_id, msg.log_idx, msg.t)
                op.value = msg.value
            self._complete(op, "ok", msg.park_ms)
        elif isinstance(msg, PutReply):
            self.session.absorb_put_reply(p, msg.dc_id, msg.log_idx, msg.t)
            self.trace.put_replied(self.loop.now, self.cid, op.req_id, op.key,
                                   msg.dc_id, msg.log_idx, msg.t.as_dict(), msg.park_ms)
            self._complete(op, "ok", msg.park_ms)
        elif isinstance(msg, NotLeader):
            op.redirects += 1
            if op.redirects > MAX_REDIRECTS:
                self._complete(op, "failed", 0.0)
                return
            hint = msg.hint
            if hint is None or not self.registry.is_up(hint):
                hint = self.registry.leader_of(op.dc, p)
            self.loop.schedule(REDIRECT_BACKOFF_MS, self._resend, op, hint)
        elif isinstance(msg, RequestTimeout):
            self._complete(op, "timeout", 0.0)
        elif isinstance(msg, WrongPartition):
            raise ProtocolError(f"{self.cid}: routed {op.key} to the wrong partition")

    def _resend(self, op: OpRecord, target) -> None:
        if self.current is not op:
            return
        self._send(op, target)

    def _complete(self, op: OpRecord, status: str, park_ms: float) -> None:
        op.status = status
        op.done_ms = self.loop.now
        op.park_ms = park_ms
        self.current = None
        self.loop.schedule(self.cfg.think_ms, self._next_op)

    def abandon_inflight(self) -> None:
        """End-of-run bookkeeping for requests that died with a crashed node."""
        if self.current is not None and self.current.status == "inflight":
            self.current.status = "incomplete"
            self.current = None
            self.finished = True
