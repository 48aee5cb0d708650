"""Builds one simulated deployment from a scenario config and runs it to
quiescence: Raft groups per (datacenter, partition), cross-DC relays, clients,
fault injection, and the always-on Raft safety collectors."""

from __future__ import annotations

from dataclasses import dataclass, field

from .client import ClientActor, ClientConfig
from .config import ScenarioConfig
from .raft import RaftNode
from .server import DataServer, RelayServer
from .simnet import (ClientId, ClockModel, EventLoop, Network, NodeId, Registry,
                     Topology, derive_rng)
from .trace import TraceLog


def parse_node(name: str) -> NodeId:
    """'d0.p1.r2' or 'd0.p1.x' back into a NodeId."""
    d, p, r = name.split(".")
    replica = NodeId.RELAY if r == "x" else int(r[1:])
    return NodeId(int(d[1:]), int(p[1:]), replica)


@dataclass
class RaftReport:
    election_safety: list = field(default_factory=list)
    commit_safety: list = field(default_factory=list)
    log_matching: list = field(default_factory=list)

    def ok(self) -> bool:
        return not (self.election_safety or self.commit_safety or self.log_matching)


@dataclass
class RunResult:
    config: ScenarioConfig
    trace: TraceLog
    ops: list
    raft: RaftReport
    quiescent: bool
    sim_ms: float
    events: int
    put_parks: int

    def trace_hash(self) -> str:
        return self.trace.sha256()


def _payload_identity(payload):
    v = payload.version
    return (payload.key, payload.origin_dc, payload.origin_idx,
            v.t.l, v.t.c, v.dc_id, v.value)


class Cluster:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        seed = config.seed
        self.loop = EventLoop()
        self.topo = Topology(config.dcs, config.partitions, config.replicas)
        self.registry = Registry(self.topo)
        self.clocks = ClockModel(self.loop, derive_rng(seed, "clocks"),
                                 skew_ms=config.skew_ms, drift=config.drift)
        self.net = Network(self.loop, derive_rng(seed, "net"),
                           intra_delay=config.intra_delay_ms,
                           xdc_delay=config.xdc_delay_ms,
                           drop_prob=config.drop_prob, dup_prob=config.dup_prob,
                           fifo=config.fifo)
        self.trace = TraceLog(seed=seed, cfg_hash=config.hash())
        self.servers: dict[NodeId, DataServer] = {}
        self.relays: dict[NodeId, RelayServer] = {}
        self.rafts: dict[NodeId, RaftNode] = {}
        self.clients: list[ClientActor] = []
        self.commit_records: dict = {}
        self.commit_violations: list = []

        self._build_nodes()
        self._build_clients()
        self._schedule_faults()

    # -- construction ----------------------------------------------------------

    def _build_nodes(self) -> None:
        cfg = self.config
        for d in range(cfg.dcs):
            for p in range(cfg.partitions):
                voters = self.topo.group(d, p)
                relay_id = self.topo.relay(d, p)
                for node in voters:
                    raft = RaftNode(node, voters, [relay_id], self.loop, self.net,
                                    derive_rng(cfg.seed, f"raft:{node}"),
                                    on_commit=None,
                                    on_leader=self.registry.record_leader,
                                    tick_ms=cfg.tick_ms, heartbeat_ms=cfg.heartbeat_ms)
                    server = DataServer(
                        node, d, p, cfg.dcs, raft, self.clocks, self.net, self.loop,
                        self.trace, self.registry, self.topo.partition_of,
                        hlc_mode=cfg.hlc_mode, write_blocking=cfg.write_blocking,
                        park_timeout_ms=cfg.park_timeout_ms or None,
                        service_ms=cfg.service_ms, gc_window=cfg.gc_window)
                    raft.on_commit = self._commit_guard((d, p), server.on_commit)
                    self.rafts[node] = raft
                    self.servers[node] = server
                    self.net.register(node, server.handle)
                raft = RaftNode(relay_id, voters, [], self.loop, self.net,
                                derive_rng(cfg.seed, f"raft:{relay_id}"),
                                on_commit=None, tick_ms=cfg.tick_ms,
                                heartbeat_ms=cfg.heartbeat_ms, is_voter=False)
                relay = RelayServer(relay_id, d, p, cfg.dcs, raft, self.net, self.loop,
                                    self.registry, dispatch_ms=cfg.relay_dispatch_ms)
                raft.on_commit = self._commit_guard((d, p), relay.on_commit)
                self.rafts[relay_id] = raft
                self.relays[relay_id] = relay
                self.net.register(relay_id, relay.handle)

    def _commit_guard(self, group, inner):
        records = self.commit_records
        violations = self.commit_violations

        def cb(entry, local_index):
            ident = _payload_identity(entry.payload)
            prev = records.setdefault((group, local_index), ident)
            if prev != ident:
                violations.append((group, local_index, prev, ident))
            inner(entry, local_index)

        return cb

    def _build_clients(self) -> None:
        cfg = self.config
        total = cfg.clients_per_dc * cfg.dcs
        if total == 0:
            return
        base, extra = divmod(cfg.ops_total, total)
        i = 0
        for d in range(cfg.dcs):
            for j in range(cfg.clients_per_dc):
                budget = base + (1 if i < extra else 0)
                ccfg = ClientConfig(cfg.read_level_enum, cfg.write_level_enum,
                                    cfg.hlc_mode, cfg.write_prob, cfg.local_prob,
                                    cfg.keys, cfg.key_bytes, cfg.value_bytes,
                                    budget, duration_ms=cfg.duration_ms)
                cid = ClientId(d, j)
                actor = ClientActor(cid, d, ccfg, self.topo, self.registry, self.net,
                                    self.loop, self.trace,
                                    derive_rng(cfg.seed, f"client:{cid}"))
                self.clients.append(actor)
                i += 1

    def _schedule_faults(self) -> None:
        rng = derive_rng(self.config.seed, "faults")
        for f in self.config.faults:
            if f.get("kind") == "plan":
                self._schedule_fault_plan(f, rng)
            else:
                node = parse_node(f["node"])
                self.loop.schedule(f["at_ms"], self._crash_node, node)
                if f.get("restart_after_ms") is not None:
                    self.loop.schedule(f["at_ms"] + f["restart_after_ms"],
                                       self._restart_node, node)

    def _schedule_fault_plan(self, plan: dict, rng) -> None:
        cfg = self.config
        count = plan.get("count", 1)
        targets = plan.get("targets", ["follower", "xc"])
        lo, hi = plan.get("window_ms", [20.0, 60.0])
        restart_after = plan.get("restart_after_ms", 50.0)
        for _ in range(count):
            kind = targets[rng.randrange(len(targets))]
            d = rng.randrange(cfg.dcs)
            p = rng.randrange(cfg.partitions)
            if kind == "xc" or cfg.replicas < 2:
                node = self.topo.relay(d, p)
            elif kind == "leader":
                node = NodeId(d, p, 0)
            else:
                node = NodeId(d, p, rng.randrange(1, cfg.replicas))
            at = rng.uniform(lo, hi)
            self.loop.schedule(at, self._crash_node, node)
            if restart_after is not None:
                self.loop.schedule(at + restart_after, self._restart_node, node)

    # -- faults ------------------------------------------------------------------

    def _crash_node(self, node: NodeId) -> None:
        if node in self.net.crashed:
            return
        self.net.crashed.add(node)
        self.registry.down.add(node)
        self.trace.crash(self.loop.now, node)
        owner = self.relays.get(node) or self.servers.get(node)
        owner.on_crash()

    def _restart_node(self, node: NodeId) -> None:
        if node not in self.net.crashed:
            return  # restart without a prior crash is a no-op
        self.net.crashed.discard(node)
        self.registry.down.discard(node)
        self.trace.restart(self.loop.now, node)
        owner = self.relays.get(node) or self.servers.get(node)
        owner.on_restart()

    # -- execution -----------------------------------------------------------------

    def bootstrap(self) -> None:
        """Seed each group with a term-1 leader so runs measure steady state."""
        for d in range(self.config.dcs):
            for p in range(self.config.partitions):
                first = self.topo.group(d, p)[0]
                raft = self.rafts[first]
                raft.current_term = 1
                raft.voted_for = first
                raft._become_leader()
                for node in self.topo.group(d, p)[1:]:
                    self.rafts[node].start()
                self.rafts[self.topo.relay(d, p)].start()

    def is_quiescent(self) -> bool:
        crashed = self.net.crashed
        for d in range(self.config.dcs):
            for p in range(self.config.partitions):
                members = self.topo.group(d, p) + [self.topo.relay(d, p)]
                live = [self.rafts[n] for n in members if n not in crashed]
                if not live:
                    continue
                length = len(live[0].log)
                for r in live:
                    if len(r.log) != length or r.commit_index != length:
                        return False
        for relay in self.relays.values():
            if relay.buffer:
                return False
        for server in self.servers.values():
            if server.parked and server.node not in crashed:
                return False
        return True

    def run(self) -> RunResult:
        cfg = self.config
        self.bootstrap()
        for client in self.clients:
            client.start()
        quiescent = self.loop.run_until_quiescent(self.is_quiescent, cfg.max_sim_ms)
        for client in self.clients:
            client.abandon_inflight()
        for node, server in self.servers.items():
            if node not in self.net.crashed:
                self.trace.final_state(self.loop.now, node, server.store.snapshot())
        ops = []
        for client in self.clients:
            for op in client.oplog:
                ops.append((str(client.cid), op))
        report = RaftReport(
            election_safety=self.registry.election_safety_violations(),
            commit_safety=list(self.commit_violations),
            log_matching=self._check_log_matching(),
        )
        put_parks = sum(s.put_park_count for s in self.servers.values())
        return RunResult(cfg, self.trace, ops, report, quiescent,
                         self.loop.now, self.loop.processed, put_parks)

    def _check_log_matching(self) -> list:
        bad = []
        for d in range(self.config.dcs):
            for p in range(self.config.partitions):
                members = self.topo.group(d, p)
                logs = [(n, self.rafts[n].log) for n in members]
                for i, (n1, log1) in enumerate(logs):
                    for n2, log2 in logs[i + 1:]:
                        for k in range(min(len(log1), len(log2))):
                            e1, e2 = log1[k], log2[k]
                            if e1.term == e2.term and \
                                    _payload_identity(e1.payload) != _payload_identity(e2.payload):
                                bad.append(((d, p), k + 1, n1, n2))
        return bad
