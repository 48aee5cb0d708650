"""Append-only run record: every client operation and server commit, in
simulation order, serializable as newline-delimited JSON."""

from __future__ import annotations

import hashlib
import json

SCHEMA = "sessionkv-trace/1"

GET_ISSUED = "GetIssued"
GET_SERVED = "GetServed"
PUT_ISSUED = "PutIssued"
PUT_COMMITTED = "PutCommittedAtServer"
PUT_REPLIED = "PutReplied"
COMMIT_APPLIED = "CommitApplied"
SV_SNAPSHOT = "SvSnapshot"
CRASH = "Crash"
RESTART = "Restart"
HEADER = "Header"
FINAL_STATE = "FinalState"


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class TraceLog:
    """In-memory event list with emit helpers fixing field order per kind."""

    def __init__(self, seed: int = 0, cfg_hash: str = ""):
        self.events: list[dict] = [
            {"kind": HEADER, "schema": SCHEMA, "seed": seed, "config": cfg_hash}
        ]

    def append(self, ev: dict) -> None:
        self.events.append(ev)

    # -- emit helpers --------------------------------------------------------

    def get_issued(self, t, client, req, key, node, level, hrv, hwv):
        self.append({"kind": GET_ISSUED, "t": t, "client": str(client), "req": list(req),
                     "key": key, "node": str(node), "level": level,
                     "hrv": list(hrv), "hwv": list(hwv)})

    def get_served(self, t, node, client, req, key, level, found, dc, idx, vt,
                   sv, log_idx, park_ms):
        self.append({"kind": GET_SERVED, "t": t, "node": str(node), "client": str(client),
                     "req": list(req), "key": key, "level": level, "found": found,
                     "dc": dc, "idx": idx, "vt": vt, "sv": list(sv),
                     "log_idx": log_idx, "park_ms": round(park_ms, 6)})

    def put_issued(self, t, client, req, key, node, level, dt, hlc_mode):
        self.append({"kind": PUT_ISSUED, "t": t, "client": str(client), "req": list(req),
                     "key": key, "node": str(node), "level": level,
                     "dt": dt, "hlc": hlc_mode})

    def put_committed(self, t, node, key, dc, idx, vt, req=None):
        ev = {"kind": PUT_COMMITTED, "t": t, "node": str(node), "key": key,
              "dc": dc, "idx": idx, "vt": vt}
        if req is not None:
            ev["req"] = list(req)
        self.append(ev)

    def put_replied(self, t, client, req, key, dc, idx, vt, park_ms):
        self.append({"kind": PUT_REPLIED, "t": t, "client": str(client),
                     "req": list(req), "key": key, "dc": dc, "idx": idx,
                     "vt": vt, "park_ms": round(park_ms, 6)})

    def commit_applied(self, t, node, local_idx, dc, idx, applied):
        self.append({"kind": COMMIT_APPLIED, "t": t, "node": str(node),
                     "local_idx": local_idx, "dc": dc, "idx": idx, "applied": applied})

    def sv_snapshot(self, t, node, sv):
        self.append({"kind": SV_SNAPSHOT, "t": t, "node": str(node), "sv": list(sv)})

    def crash(self, t, node):
        self.append({"kind": CRASH, "t": t, "node": str(node)})

    def restart(self, t, node):
        self.append({"kind": RESTART, "t": t, "node": str(node)})

    def final_state(self, t, node, snapshot):
        self.append({"kind": FINAL_STATE, "t": t, "node": str(node), "state": snapshot})

    # -- serialization -------------------------------------------------------

    def dumps(self) -> str:
        return "\n".join(json.dumps(ev, separators=(",", ":")) for ev in self.events) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    def sha256(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    @staticmethod
    def load(path) -> list[dict]:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
