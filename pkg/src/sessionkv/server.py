"""Server-side protocol: reads that wait on the stable vector, wait-free
HLC-stamped writes (or blocking physical-clock writes), commit application,
and cross-DC replication fan-out."""

from __future__ import annotations

from dataclasses import replace

from .hlc import ZERO, HlcClock
from .messages import (GetReply, GetRequest, NotLeader, PutReply, PutRequest,
                       Replicate, RequestTimeout, WrongPartition)
from .raft import LEADER, RAFT_MESSAGE_TYPES, RaftNode
from .store import ReplicationPayload, Store, Version


class DataServer:
    """One data replica: a Raft participant plus the versioned store.

    All state transitions happen inside event handlers on the simulation
    loop; replies and fan-out are outputs of those handlers.
    """

    def __init__(self, node, dc: int, partition: int, dcs: int, raft: RaftNode,
                 clock_model, net, loop, trace, registry, partition_of,
                 hlc_mode: bool = True, write_blocking: bool = True,
                 park_timeout_ms=None, service_ms: float = 0.1, gc_window: int = 4):
        self.node = node
        self.dc = dc
        self.partition = partition
        self.raft = raft
        self.store = Store(dcs, gc_window=gc_window)
        self.clock = HlcClock()
        self.clock_model = clock_model
        self.net = net
        self.loop = loop
        self.trace = trace
        self.registry = registry
        self.partition_of = partition_of
        self.hlc_mode = hlc_mode
        self.write_blocking = write_blocking
        self.park_timeout_ms = park_timeout_ms
        self.service_ms = service_ms

        self.parked: list[dict] = []
        self.pending_puts: dict[int, dict] = {}
        self._applied_upto = 0
        self.put_park_count = 0

    # -- dispatch ------------------------------------------------------------

    def handle(self, msg) -> None:
        if isinstance(msg, RAFT_MESSAGE_TYPES):
            self.raft.handle_message(msg)
        elif isinstance(msg, GetRequest):
            self._handle_get(msg)
        elif isinstance(msg, PutRequest):
            self._handle_put(msg)
        elif isinstance(msg, Replicate):
            self._handle_replicate(msg)

    def _reply(self, client, msg) -> None:
        self.loop.schedule(self.service_ms, self.net.send, self.node, client, msg, "client")

    # -- reads ---------------------------------------------------------------

    def _blocked(self, hrv, hwv) -> bool:
        sv = self.store.sv
        for i in range(len(sv)):
            if sv[i] < hrv[i] or sv[i] < hwv[i]:
                return True
        return False

    def _handle_get(self, req: GetRequest) -> None:
        if self.partition_of(req.key) != self.partition:
            self._reply(req.client, WrongPartition(req.req_id))
            return
        if self._blocked(req.hrv, req.hwv):
            self._park({"kind": "get", "req": req, "arrived": self.loop.now})
            return
        self._serve_get(req, self.loop.now)

    def _serve_get(self, req: GetRequest, arrived: float) -> None:
        now = self.loop.now
        park_ms = now - arrived
        rec = self.store.read_latest(req.key)
        if rec is None:
            reply = GetReply(req.req_id, False, None, -1, 0, ZERO, park_ms)
            self.trace.get_served(now, self.node, req.client, req.req_id, req.key,
                                  req.level, False, -1, 0, None, self.store.sv, 0, park_ms)
        else:
            v = rec.version
            log_idx = self.store.sv[v.dc_id]
            reply = GetReply(req.req_id, True, v.value, v.dc_id, log_idx, v.t, park_ms)
            self.trace.get_served(now, self.node, req.client, req.req_id, req.key,
                                  req.level, True, v.dc_id, rec.origin_idx, v.t.as_dict(),
                                  self.store.sv, log_idx, park_ms)
        self._reply(req.client, reply)

    # -- writes --------------------------------------------------------------

    def _handle_put(self, req: PutRequest) -> None:
        if self.raft.role != LEADER:
            hint = self.raft.leader_hint or self.registry.leader_of(self.dc, self.partition)
            self._reply(req.client, NotLeader(req.req_id, hint))
            return
        if not self.hlc_mode and self.write_blocking and req.blocking is not None:
            hrv, hwv = req.blocking
            if self._blocked(hrv, hwv):
                self.put_park_count += 1
                self._park({"kind": "put", "req": req, "arrived": self.loop.now})
                return
        self._stamp_and_propose(req, self.loop.now)

    def _stamp_and_propose(self, req: PutRequest, arrived: float) -> None:
        if self.raft.role != LEADER:
            hint = self.raft.leader_hint or self.registry.leader_of(self.dc, self.partition)
            self._reply(req.client, NotLeader(req.req_id, hint))
            return
        pc = self.clock_model.physical_now(self.node)
        # dt is zero without HLC, so this degenerates to a local clock advance
        t = self.clock.merge(req.dt, pc)
        version = Version(req.value, t, self.dc)
        payload = ReplicationPayload(req.key, version, self.dc, None)
        index = self.raft.propose(payload)
        self.pending_puts[index] = {"client": req.client, "req": req,
                                    "version": version, "arrived": arrived,
                                    "park_ms": self.loop.now - arrived}

    # -- parking -------------------------------------------------------------

    def _park(self, entry: dict) -> None:
        self.parked.append(entry)
        if self.park_timeout_ms is not None:
            self.loop.schedule(self.park_timeout_ms, self._park_timeout, entry)

    def _park_timeout(self, entry: dict) -> None:
        if entry not in self.parked:
            return
        self.parked.remove(entry)
        req = entry["req"]
        self._reply(req.client, RequestTimeout(req.req_id, entry["kind"]))

    def _recheck_parked(self) -> None:
        if not self.parked:
            return
        # swap the list out first: serving can commit synchronously in a
        # single-replica group, which re-enters this method
        pending = self.parked
        self.parked = []
        for entry in pending:
            req = entry["req"]
            if entry["kind"] == "get":
                blocked = self._blocked(req.hrv, req.hwv)
            else:
                hrv, hwv = req.blocking
                blocked = self._blocked(hrv, hwv)
            if blocked:
                self.parked.append(entry)
            elif entry["kind"] == "get":
                self._serve_get(req, entry["arrived"])
            else:
                self._stamp_and_propose(req, entry["arrived"])

    # -- commit path -----------------------------------------------------------

    def on_commit(self, entry, local_index: int) -> None:
        if local_index != self._applied_upto + 1:
            raise RuntimeError(
                f"{self.node}: out-of-order commit delivery at {local_index}, "
                f"expected {self._applied_upto + 1}")
        self._applied_upto = local_index
        payload: ReplicationPayload = entry.payload
        origin = payload.origin_dc
        oidx = payload.origin_idx if payload.origin_idx is not None else local_index
        applied = self.store.apply_commit(payload, local_index)
        now = self.loop.now
        self.trace.commit_applied(now, self.node, local_index, origin, oidx, applied)
        pending = self.pending_puts.pop(local_index, None) if origin == self.dc else None
        if applied:
            req = pending["req"].req_id if pending else None
            self.trace.put_committed(now, self.node, payload.key, origin, oidx,
                                     payload.version.t.as_dict(), req=req)
            self.trace.sv_snapshot(now, self.node, self.store.sv)
            if not self.hlc_mode:
                # blocking-mode stamps must dominate every applied version
                self.clock.merge(payload.version.t, self.clock_model.physical_now(self.node))
            self._recheck_parked()
        if pending:
            reply = PutReply(pending["req"].req_id, self.dc, local_index,
                             pending["version"].t, pending["park_ms"])
            self._reply(pending["client"], reply)

    # -- cross-DC ingest -------------------------------------------------------

    def _handle_replicate(self, msg: Replicate) -> None:
        if self.raft.role == LEADER:
            payload = ReplicationPayload(msg.key, msg.version, msg.origin_dc, msg.origin_idx)
            self.raft.propose(payload)
            return
        if msg.hops == 0:
            target = self.raft.leader_hint or self.registry.leader_of(self.dc, self.partition)
            if target != self.node:
                self.net.send(self.node, target, replace(msg, hops=1), klass="client")

    # -- crash/restart ----------------------------------------------------------

    def on_crash(self) -> None:
        self.raft.crash()
        self.parked = []
        self.pending_puts = {}
        self.store.reset()
        self._applied_upto = 0

    def on_restart(self) -> None:
        self.raft.restart(stateless=False)


class RelayServer:
    """Stateless learner that forwards locally originated committed writes to
    the other datacenters' leaders, in commit order, over FIFO channels."""

    def __init__(self, node, dc: int, partition: int, dcs: int, raft: RaftNode,
                 net, loop, registry, dispatch_ms: float = 2.0):
        self.node = node
        self.dc = dc
        self.partition = partition
        self.dcs = dcs
        self.raft = raft
        self.net = net
        self.loop = loop
        self.registry = registry
        self.dispatch_ms = dispatch_ms
        self.buffer: list[Replicate] = []
        self._timer_live = False

    def handle(self, msg) -> None:
        if isinstance(msg, RAFT_MESSAGE_TYPES):
            self.raft.handle_message(msg)

    def on_commit(self, entry, local_index: int) -> None:
        payload: ReplicationPayload = entry.payload
        if payload.origin_dc != self.dc:
            return  # some other datacenter's relay owns this write
        self.buffer.append(Replicate(payload.key, payload.version, payload.origin_dc,
                                     local_index))
        if self.dispatch_ms <= 0:
            self.flush()
        elif not self._timer_live:
            self._timer_live = True
            self.loop.schedule(self.dispatch_ms, self._dispatch_tick, maintenance=True)

    def _dispatch_tick(self) -> None:
        self._timer_live = False
        if self.raft.crashed:
            return
        self.flush()
        if self.buffer:
            self._timer_live = True
            self.loop.schedule(self.dispatch_ms, self._dispatch_tick, maintenance=True)

    def flush(self) -> list[Replicate]:
        sent = self.buffer
        self.buffer = []
        for item in sent:
            for d in range(self.dcs):
                if d != self.dc:
                    leader = self.registry.leader_of(d, self.partition)
                    self.net.send(self.node, leader, item, klass="xdc")
        return sent

    def on_crash(self) -> None:
        self.raft.crash()
        self.buffer = []

    def on_restart(self) -> None:
        self.raft.restart(stateless=True)
