"""Minimal Raft: leader election, log replication, and commitment for one
replica group. No compaction, membership change, or disk persistence."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

FOLLOWER = "follower"
CANDIDATE = "candidate"
LEADER = "leader"

AE_BATCH = 100  # max entries per AppendEntries


@dataclass(slots=True)
class LogEntry:
    index: int
    term: int
    payload: object


@dataclass(frozen=True, slots=True)
class AppendEntries:
    term: int
    leader: object
    prev_index: int
    prev_term: int
    entries: tuple
    leader_commit: int


@dataclass(frozen=True, slots=True)
class AppendEntriesReply:
    term: int
    sender: object
    success: bool
    match_index: int
    conflict_index: int


@dataclass(frozen=True, slots=True)
class RequestVote:
    term: int
    candidate: object
    last_log_index: int
    last_log_term: int


@dataclass(frozen=True, slots=True)
class RequestVoteReply:
    term: int
    sender: object
    granted: bool


RAFT_MESSAGE_TYPES = (AppendEntries, AppendEntriesReply, RequestVote, RequestVoteReply)


class RaftNode:
    """One replica's consensus state machine, driven entirely by the event loop.

    Voters elect and replicate; learners (the cross-DC relays) receive the log
    and commit notifications but never vote or count toward majorities.
    Commit callbacks fire exactly once per incarnation, in index order.
    """

    def __init__(self, node, voters: list, learners: list, loop, net,
                 rng: random.Random,
                 on_commit: Callable[[LogEntry, int], None],
                 on_leader: Optional[Callable[[object, int], None]] = None,
                 tick_ms: float = 1.0, heartbeat_ms: float = 2.0,
                 is_voter: bool = True):
        self.node = node
        self.voters = list(voters)
        self.learners = list(learners)
        self.loop = loop
        self.net = net
        self.rng = rng
        self.on_commit = on_commit
        self.on_leader = on_leader
        self.tick_ms = tick_ms
        self.heartbeat_ms = heartbeat_ms
        self.is_voter = is_voter

        # persistent (survives crash for data replicas)
        self.current_term = 0
        self.voted_for = None
        self.log: list[LogEntry] = []

        # volatile
        self.role = FOLLOWER
        self.commit_index = 0
        self.last_applied = 0
        self.leader_hint = None
        self.next_index: dict = {}
        self.match_index: dict = {}
        self._votes: set = set()
        self.crashed = False

        self._election_deadline = 0.0
        self._election_timer_live = False
        self._heartbeat_timer_live = False

    # -- timers ------------------------------------------------------------

    def start(self) -> None:
        if self.is_voter:
            self._reset_election_deadline()

    def _election_timeout(self) -> float:
        return self.rng.uniform(10.0 * self.tick_ms, 20.0 * self.tick_ms)

    def _reset_election_deadline(self) -> None:
        self._election_deadline = self.loop.now + self._election_timeout()
        if not self._election_timer_live:
            self._election_timer_live = True
            self.loop.schedule(self._election_deadline - self.loop.now,
                               self._election_tick, maintenance=True)

    def _election_tick(self) -> None:
        self._election_timer_live = False
        if self.crashed or not self.is_voter or self.role == LEADER:
            return
        if self.loop.now + 1e-9 >= self._election_deadline:
            self._start_election()
        else:
            self._election_timer_live = True
            self.loop.schedule(self._election_deadline - self.loop.now,
                               self._election_tick, maintenance=True)

    def _heartbeat_tick(self) -> None:
        self._heartbeat_timer_live = False
        if self.crashed or self.role != LEADER:
            return
        self._broadcast_append()
        self._heartbeat_timer_live = True
        self.loop.schedule(self.heartbeat_ms, self._heartbeat_tick, maintenance=True)

    # -- client-facing -----------------------------------------------------

    def propose(self, payload) -> Optional[int]:
        """Append under leadership; returns the new index, or None if not leader."""
        if self.role != LEADER:
            return None
        index = len(self.log) + 1
        self.log.append(LogEntry(index, self.current_term, payload))
        self.match_index[self.node] = index
        self._maybe_advance_commit()
        self._broadcast_append()
        return index

    # -- message handling ----------------------------------------------------

    def handle_message(self, msg) -> None:
        if self.crashed:
            return
        if isinstance(msg, AppendEntries):
            self._on_append_entries(msg)
        elif isinstance(msg, AppendEntriesReply):
            self._on_append_reply(msg)
        elif isinstance(msg, RequestVote):
            self._on_request_vote(msg)
        elif isinstance(msg, RequestVoteReply):
            self._on_vote_reply(msg)

    def _on_append_entries(self, m: AppendEntries) -> None:
        if m.term < self.current_term:
            self.net.send(self.node, m.leader,
                          AppendEntriesReply(self.current_term, self.node, False, 0, 0),
                          klass="raft")
            return
        if m.term > self.current_term:
            self._adopt_term(m.term)
        if self.role == CANDIDATE:
            self.role = FOLLOWER
        self.leader_hint = m.leader
        if self.is_voter:
            self._election_deadline = self.loop.now + self._election_timeout()

        # log consistency check at prev_index
        if m.prev_index > 0:
            if len(self.log) < m.prev_index:
                self.net.send(self.node, m.leader,
                              AppendEntriesReply(self.current_term, self.node, False, 0,
                                                 len(self.log) + 1), klass="raft")
                return
            if self.log[m.prev_index - 1].term != m.prev_term:
                bad_term = self.log[m.prev_index - 1].term
                first = m.prev_index
                while first > 1 and self.log[first - 2].term == bad_term:
                    first -= 1
                self.net.send(self.node, m.leader,
                              AppendEntriesReply(self.current_term, self.node, False, 0,
                                                 first), klass="raft")
                return

        for entry in m.entries:
            i = entry.index
            if len(self.log) >= i:
                if self.log[i - 1].term != entry.term:
                    del self.log[i - 1:]
                    self.log.append(entry)
                # same term at same index: identical entry, keep ours
            else:
                self.log.append(entry)

        if m.leader_commit > self.commit_index:
            self.commit_index = min(m.leader_commit, len(self.log))
            self._deliver_commits()

        match = m.prev_index + len(m.entries)
        self.net.send(self.node, m.leader,
                      AppendEntriesReply(self.current_term, self.node, True, match, 0),
                      klass="raft")

    def _on_append_reply(self, m: AppendEntriesReply) -> None:
        if m.term > self.current_term:
            self._adopt_term(m.term)
            return
        if self.role != LEADER or m.term < self.current_term:
            return
        if m.success:
            if m.match_index > self.match_index.get(m.sender, 0):
                self.match_index[m.sender] = m.match_index
                self.next_index[m.sender] = m.match_index + 1
                self._maybe_advance_commit()
        else:
            hint = m.conflict_index if m.conflict_index > 0 else self.next_index.get(m.sender, 2) - 1
            self.next_index[m.sender] = max(1, min(hint, len(self.log) + 1))
            self._send_append(m.sender)

    def _on_request_vote(self, m: RequestVote) -> None:
        if m.term > self.current_term:
            self._adopt_term(m.term)
        granted = False
        if m.term == self.current_term and self.is_voter:
            up_to_date = (m.last_log_term, m.last_log_index) >= (self._last_term(), len(self.log))
            if self.voted_for in (None, m.candidate) and up_to_date:
                granted = True
                self.voted_for = m.candidate
                self._election_deadline = self.loop.now + self._election_timeout()
        self.net.send(self.node, m.candidate,
                      RequestVoteReply(self.current_term, self.node, granted), klass="raft")

    def _on_vote_reply(self, m: RequestVoteReply) -> None:
        if m.term > self.current_term:
            self._adopt_term(m.term)
            return
        if self.role != CANDIDATE or m.term < self.current_term or not m.granted:
            return
        self._votes.add(m.sender)
        if len(self._votes) * 2 > len(self.voters):
            self._become_leader()

    # -- transitions ---------------------------------------------------------

    def _adopt_term(self, term: int) -> None:
        self.current_term = term
        self.voted_for = None
        if self.role != FOLLOWER:
            self.role = FOLLOWER
        if self.is_voter:
            self._reset_election_deadline()

    def _start_election(self) -> None:
        self.role = CANDIDATE
        self.current_term += 1
        self.voted_for = self.node
        self._votes = {self.node}
        self._reset_election_deadline()
        if len(self._votes) * 2 > len(self.voters):
            self._become_leader()
            return
        rv = RequestVote(self.current_term, self.node, len(self.log), self._last_term())
        for peer in self.voters:
            if peer != self.node:
                self.net.send(self.node, peer, rv, klass="raft")

    def _become_leader(self) -> None:
        self.role = LEADER
        self.leader_hint = self.node
        for peer in self.voters + self.learners:
            self.next_index[peer] = len(self.log) + 1
            self.match_index[peer] = 0
        self.match_index[self.node] = len(self.log)
        if self.on_leader is not None:
            self.on_leader(self.node, self.current_term)
        self._broadcast_append()
        if not self._heartbeat_timer_live:
            self._heartbeat_timer_live = True
            self.loop.schedule(self.heartbeat_ms, self._heartbeat_tick, maintenance=True)

    # -- replication ---------------------------------------------------------

    def _last_term(self) -> int:
        return self.log[-1].term if self.log else 0

    def _send_append(self, peer) -> None:
        nxt = self.next_index.get(peer, len(self.log) + 1)
        prev_index = nxt - 1
        prev_term = self.log[prev_index - 1].term if prev_index > 0 else 0
        entries = tuple(self.log[nxt - 1: nxt - 1 + AE_BATCH])
        self.net.send(self.node, peer,
                      AppendEntries(self.current_term, self.node, prev_index, prev_term,
                                    entries, self.commit_index), klass="raft")

    def _broadcast_append(self) -> None:
        for peer in self.voters + self.learners:
            if peer != self.node:
                self._send_append(peer)

    def _maybe_advance_commit(self) -> None:
        majority = len(self.voters) // 2 + 1
        advanced = False
        for n in range(self.commit_index + 1, len(self.log) + 1):
            votes = sum(1 for v in self.voters if self.match_index.get(v, 0) >= n)
            if votes >= majority and self.log[n - 1].term == self.current_term:
                self.commit_index = n
                advanced = True
        if advanced:
            self._deliver_commits()
            self._broadcast_append()  # propagate the new commit index promptly

    def _deliver_commits(self) -> None:
        while self.last_applied < self.commit_index:
            entry = self.log[self.last_applied]
            self.last_applied += 1
            self.on_commit(entry, self.last_applied)

    # -- crash/restart -------------------------------------------------------

    def crash(self) -> None:
        self.crashed = True

    def restart(self, stateless: bool = False) -> None:
        """Back up with volatile state gone; learners also lose their log copy."""
        self.crashed = False
        if stateless:
            self.current_term = 0
            self.voted_for = None
            self.log = []
        self.role = FOLLOWER
        self.commit_index = 0
        self.last_applied = 0
        self.leader_hint = None
        self.next_index = {}
        self.match_index = {}
        self._votes = set()
        if self.is_voter:
            self._reset_election_deadline()
