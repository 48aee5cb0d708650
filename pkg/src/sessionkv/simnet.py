"""Deterministic discrete-event network: virtual time, skewed per-node clocks,
lossy intra-datacenter links, and FIFO reliable cross-datacenter channels."""

from __future__ import annotations

import hashlib
import heapq
import random
import zlib
from dataclasses import dataclass, field


def derive_rng(seed: int, label: str) -> random.Random:
    """Independent, platform-stable RNG stream for one subsystem."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class EventLoop:
    """Priority queue of (time, insertion order) events.

    Identical schedule calls under the same seed produce bit-identical
    executions; ties in time run in insertion order.
    """

    def __init__(self, max_events: int = 50_000_000):
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self._productive = 0
        self.processed = 0
        self.max_events = max_events

    def schedule(self, delay: float, fn, *args, maintenance: bool = False) -> None:
        self._seq += 1
        if not maintenance:
            self._productive += 1
        heapq.heappush(self._heap, (self.now + delay, self._seq, maintenance, fn, args))

    def _step(self) -> None:
        t, _, maintenance, fn, args = heapq.heappop(self._heap)
        if t > self.now:
            self.now = t
        if not maintenance:
            self._productive -= 1
        self.processed += 1
        fn(*args)

    def run_until(self, t: float) -> int:
        """Process events with time <= t; returns events processed."""
        n0 = self.processed
        while self._heap and self._heap[0][0] <= t:
            self._step()
            if self.processed >= self.max_events:
                raise RuntimeError("event budget exhausted")
        self.now = max(self.now, t)
        return self.processed - n0

    def run_until_quiescent(self, is_quiescent, max_ms: float, check_every: float = 5.0) -> bool:
        """Run until no productive events remain and is_quiescent() holds.

        Maintenance events (heartbeats, timers) keep firing in between checks
        so recovery can make progress. Returns False if max_ms elapses or the
        queue empties while the system is still not quiescent.
        """
        next_check = self.now
        while self._heap:
            if self._productive == 0 and self.now >= next_check:
                if is_quiescent():
                    return True
                next_check = self.now + check_every
            if self._heap[0][0] > max_ms:
                return bool(self._productive == 0 and is_quiescent())
            self._step()
            if self.processed >= self.max_events:
                raise RuntimeError("event budget exhausted")
        return bool(is_quiescent())


@dataclass(frozen=True, slots=True)
class NodeId:
    """Address of one simulated process."""

    dc: int
    partition: int
    replica: int  # 0..R-1 data replicas; RELAY for the cross-DC relay
    RELAY = -1

    def __str__(self) -> str:
        tag = "x" if self.replica == self.RELAY else f"r{self.replica}"
        return f"d{self.dc}.p{self.partition}.{tag}"

    @property
    def is_relay(self) -> bool:
        return self.replica == self.RELAY


@dataclass(frozen=True, slots=True)
class ClientId:
    dc: int
    index: int

    def __str__(self) -> str:
        return f"d{self.dc}.c{self.index}"


class Topology:
    """Static layout: D datacenters x P partitions x (R data replicas + 1 relay)."""

    def __init__(self, dcs: int, partitions: int, replicas: int):
        self.dcs = dcs
        self.partitions = partitions
        self.replicas = replicas

    def partition_of(self, key: str) -> int:
        return zlib.crc32(key.encode()) % self.partitions

    def group(self, dc: int, partition: int) -> list[NodeId]:
        return [NodeId(dc, partition, r) for r in range(self.replicas)]

    def relay(self, dc: int, partition: int) -> NodeId:
        return NodeId(dc, partition, NodeId.RELAY)

    def all_data_nodes(self):
        for d in range(self.dcs):
            for p in range(self.partitions):
                for r in range(self.replicas):
                    yield NodeId(d, p, r)

    def all_relays(self):
        for d in range(self.dcs):
            for p in range(self.partitions):
                yield NodeId(d, p, NodeId.RELAY)


class ClockModel:
    """Per-node physical clocks: sim-time x (1+drift) + offset, floored to ms."""

    def __init__(self, loop: EventLoop, rng: random.Random, skew_ms: float = 0.0,
                 drift: float = 0.0):
        self.loop = loop
        self.rng = rng
        self.skew_ms = skew_ms
        self.drift = drift
        self._offset: dict = {}
        self._drift: dict = {}

    def _params(self, node) -> tuple[float, float]:
        if node not in self._offset:
            half = self.skew_ms / 2.0
            self._offset[node] = self.rng.uniform(-half, half) if half else 0.0
            self._drift[node] = self.rng.uniform(0.0, self.drift) if self.drift else 0.0
        return self._offset[node], self._drift[node]

    def set_offset(self, node, offset_ms: float) -> None:
        self._params(node)
        self._offset[node] = offset_ms

    def physical_now(self, node) -> int:
        offset, drift = self._params(node)
        return max(0, int(self.loop.now * (1.0 + drift) + offset))


class Network:
    """Message layer with per-class link behavior.

    raft-class intra-DC links may delay, drop, and duplicate. Client links are
    reliable. Cross-DC links are reliable and FIFO: per-channel sequence
    numbers plus a hold-back buffer enforce in-order delivery even when the
    sampled delays would reorder.
    """

    def __init__(self, loop: EventLoop, rng: random.Random,
                 intra_delay=(0.2, 0.5), xdc_delay=(7.5, 7.5),
                 drop_prob: float = 0.0, dup_prob: float = 0.0, fifo: bool = True):
        self.loop = loop
        self.rng = rng
        self.intra_delay = intra_delay
        self.xdc_delay = xdc_delay
        self.drop_prob = drop_prob
        self.dup_prob = dup_prob
        self.fifo = fifo
        self.handlers: dict = {}
        self.crashed: set = set()
        self._fifo_next_send: dict = {}
        self._fifo_next_recv: dict = {}
        self._fifo_held: dict = {}
        self.delivered_seqs: list = []  # (channel, seq) audit trail for the FIFO check

    def register(self, node, handler) -> None:
        self.handlers[node] = handler

    def _delay(self, src, dst) -> float:
        src_dc = getattr(src, "dc", None)
        dst_dc = getattr(dst, "dc", None)
        lo, hi = self.intra_delay if src_dc == dst_dc else self.xdc_delay
        return lo if lo == hi else self.rng.uniform(lo, hi)

    def send(self, src, dst, msg, klass: str = "client") -> None:
        """klass: 'raft' (lossy), 'client' (reliable), 'xdc' (reliable FIFO)."""
        if klass == "raft":
            if self.drop_prob and self.rng.random() < self.drop_prob:
                return
            copies = 2 if self.dup_prob and self.rng.random() < self.dup_prob else 1
        else:
            copies = 1
        for _ in range(copies):
            if klass == "xdc" and self.fifo:
                chan = (src, dst)
                seq = self._fifo_next_send.get(chan, 1)
                self._fifo_next_send[chan] = seq + 1
                self.loop.schedule(self._delay(src, dst), self._arrive_fifo, chan, seq, dst, msg)
            else:
                self.loop.schedule(self._delay(src, dst), self._deliver, dst, msg)

    def _arrive_fifo(self, chan, seq, dst, msg) -> None:
        expected = self._fifo_next_recv.get(chan, 1)
        held = self._fifo_held.setdefault(chan, {})
        held[seq] = msg
        while expected in held:
            self.delivered_seqs.append((chan, expected))
            self._deliver(dst, held.pop(expected))
            expected += 1
        self._fifo_next_recv[chan] = expected

    def _deliver(self, dst, msg) -> None:
        if dst in self.crashed:
            return
        handler = self.handlers.get(dst)
        if handler is not None:
            handler(msg)


class Registry:
    """Simulation-global view of group leadership and node liveness.

    Stands in for the service-discovery layer real clients would use; also
    collects leader claims for the election-safety invariant.
    """

    def __init__(self, topo: Topology):
        self.topo = topo
        self._leader: dict = {}        # (dc, p) -> (term, node)
        self.claims: list = []         # (dc, p, term, node) every time a node becomes leader
        self.down: set = set()

    def record_leader(self, node: NodeId, term: int) -> None:
        group = (node.dc, node.partition)
        self.claims.append((group, term, node))
        best = self._leader.get(group)
        if best is None or term >= best[0]:
            self._leader[group] = (term, node)

    def leader_of(self, dc: int, partition: int) -> NodeId:
        best = self._leader.get((dc, partition))
        if best is not None and best[1] not in self.down:
            return best[1]
        for node in self.topo.group(dc, partition):
            if node not in self.down:
                return node
        return self.topo.group(dc, partition)[0]

    def is_up(self, node) -> bool:
        return node not in self.down

    def election_safety_violations(self) -> list:
        """Groups where two nodes claimed leadership in the same term."""
        seen: dict = {}
        bad = []
        for group, term, node in self.claims:
            prev = seen.setdefault((group, term), node)
            if prev != node:
                bad.append((group, term, prev, node))
        return bad
