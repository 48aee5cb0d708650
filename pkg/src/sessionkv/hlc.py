"""Hybrid logical clock: physical-time-tracking timestamps that capture happens-before."""

from __future__ import annotations

from dataclasses import dataclass

L_BITS = 48
C_BITS = 16
L_MAX = (1 << L_BITS) - 1
C_MAX = (1 << C_BITS) - 1


class HlcOverflowError(RuntimeError):
    """Counter or wall-time component left its fixed-width range.

    Wrapping would silently break the total order, so this is fatal. In
    practice it signals pathological clock skew in the scenario config.
    """


@dataclass(frozen=True, order=True, slots=True)
class HlcTimestamp:
    """A ⟨l, c⟩ pair: l is milliseconds of (simulated) physical time, c breaks ties.

    Dataclass ordering is lexicographic on (l, c), which is the total order
    used everywhere (version winners, dependency comparisons).
    """

    l: int = 0
    c: int = 0

    def packed(self) -> int:
        """64-bit encoding (48-bit l, 16-bit c); integer order equals tuple order."""
        return (self.l << C_BITS) | self.c

    @classmethod
    def unpack(cls, raw: int) -> HlcTimestamp:
        return cls(raw >> C_BITS, raw & C_MAX)

    def as_dict(self) -> dict:
        return {"l": self.l, "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> HlcTimestamp:
        return cls(d["l"], d["c"])

    def is_zero(self) -> bool:
        return self.l == 0 and self.c == 0


ZERO = HlcTimestamp(0, 0)


def compare(a: HlcTimestamp, b: HlcTimestamp) -> int:
    """Three-way lexicographic comparison: negative, zero, or positive."""
    if a.l != b.l:
        return -1 if a.l < b.l else 1
    if a.c != b.c:
        return -1 if a.c < b.c else 1
    return 0


class HlcClock:
    """One node's clock state. All access is serialized by the simulation loop.

    Returned timestamps are immutable and strictly increase across any mix of
    advance/merge calls on the same clock.
    """

    __slots__ = ("current",)

    def __init__(self, start: HlcTimestamp = ZERO):
        self.current = start

    def merge(self, t: HlcTimestamp, pc: int) -> HlcTimestamp:
        """Fold a remote timestamp into the clock at physical time pc (ms).

        The result is strictly greater than both the previous clock value and
        t, with l equal to max(previous l, pc, t.l).
        """
        prev = self.current
        l = prev.l
        if pc > l:
            l = pc
        if t.l > l:
            l = t.l

        if l == prev.l and l == t.l:
            c = max(prev.c, t.c) + 1
        elif l == prev.l:
            c = prev.c + 1
        elif l == t.l:
            c = t.c + 1
        else:
            c = 0

        if c > C_MAX:
            raise HlcOverflowError(f"counter overflow at l={l}: c={c} > {C_MAX}")
        if l > L_MAX:
            raise HlcOverflowError(f"wall component overflow: l={l} > {L_MAX}")

        self.current = HlcTimestamp(l, c)
        return self.current

    def advance(self, pc: int) -> HlcTimestamp:
        """Tick the clock for a local event: same code path as merging ⟨0,0⟩."""
        return self.merge(ZERO, pc)
