import random

import pytest

from sessionkv.hlc import (C_MAX, ZERO, HlcClock, HlcOverflowError, HlcTimestamp,
                           compare)


def ts(l, c):
    return HlcTimestamp(l, c)


class TestAdvance:
    # hand-evaluated against the four update branches
    def test_stale_physical_time_bumps_counter(self):
        clk = HlcClock(ts(10, 3))
        assert clk.advance(5) == ts(10, 4)

    def test_fresh_physical_time_resets_counter(self):
        clk = HlcClock(ts(10, 3))
        assert clk.advance(20) == ts(20, 0)

    def test_all_zero_equality_branch(self):
        clk = HlcClock()
        assert clk.advance(0) == ts(0, 1)

    def test_result_at_least_physical(self):
        clk = HlcClock(ts(3, 7))
        for pc in [0, 2, 3, 9, 9, 9, 50]:
            out = clk.advance(pc)
            assert out.l >= pc


class TestMerge:
    def test_equal_wall_components_take_max_counter(self):
        clk = HlcClock(ts(10, 4))
        assert clk.merge(ts(10, 2), 5) == ts(10, 5)

    def test_physical_time_dominates(self):
        clk = HlcClock(ts(10, 7))
        assert clk.merge(ZERO, 20) == ts(20, 0)

    def test_remote_wall_dominates(self):
        clk = HlcClock(ts(5, 1))
        assert clk.merge(ts(9, 6), 3) == ts(9, 7)

    def test_put_stamp_examples(self):
        clk = HlcClock(ts(95, 1))
        assert clk.merge(ts(100, 2), 90) == ts(100, 3)
        clk = HlcClock(ts(40, 0))
        assert clk.merge(ZERO, 50) == ts(50, 0)

    def test_strictly_greater_than_both_inputs(self):
        rng = random.Random(7)
        clk = HlcClock()
        for _ in range(2000):
            prev = clk.current
            t = ts(rng.randrange(0, 50), rng.randrange(0, 5))
            pc = rng.randrange(0, 50)
            out = clk.merge(t, pc)
            assert out > prev
            assert out > t
            assert out.l == max(prev.l, pc, t.l)

    def test_counter_overflow_is_fatal(self):
        clk = HlcClock(ts(10, C_MAX))
        with pytest.raises(HlcOverflowError):
            clk.advance(5)


class TestOrdering:
    def test_compare_identity(self):
        assert compare(ts(5, 0), ts(5, 0)) == 0

    def test_wall_component_dominates(self):
        assert compare(ts(5, 9), ts(6, 0)) < 0

    def test_counter_breaks_ties(self):
        assert compare(ts(5, 1), ts(5, 2)) < 0

    def test_zero_is_minimum(self):
        rng = random.Random(3)
        for _ in range(200):
            t = ts(rng.randrange(0, 1000), rng.randrange(0, 100))
            assert ZERO <= t

    def test_packed_order_matches_tuple_order(self):
        rng = random.Random(11)
        pts = [ts(rng.randrange(0, 64), rng.randrange(0, 8)) for _ in range(300)]
        for a in pts[:50]:
            for b in pts[:50]:
                assert (a < b) == (a.packed() < b.packed())
                assert HlcTimestamp.unpack(a.packed()) == a

    def test_dict_round_trip(self):
        t = ts(123, 9)
        assert HlcTimestamp.from_dict(t.as_dict()) == t


class TestClockProperties:
    def test_monotonic_over_random_interleavings(self):
        rng = random.Random(42)
        clk = HlcClock()
        prev = clk.current
        for _ in range(5000):
            if rng.random() < 0.5:
                out = clk.advance(rng.randrange(0, 200))
            else:
                out = clk.merge(ts(rng.randrange(0, 200), rng.randrange(0, 9)), rng.randrange(0, 200))
            assert out > prev
            prev = out

    def test_happens_before_over_message_dags(self):
        # random message exchanges between clocks: every receive lands after the send
        rng = random.Random(9)
        clocks = [HlcClock() for _ in range(5)]
        inflight = []
        for step in range(3000):
            pc = step // 10  # shared coarse physical time
            i = rng.randrange(5)
            if inflight and rng.random() < 0.4:
                j, t_sent = inflight.pop(rng.randrange(len(inflight)))
                got = clocks[j].merge(t_sent, pc)
                assert got > t_sent
            else:
                t = clocks[i].advance(pc)
                inflight.append((rng.randrange(5), t))

    def test_wall_component_stays_near_real_time(self):
        # l never exceeds the highest physical time any clock has observed
        rng = random.Random(21)
        clocks = [HlcClock() for _ in range(4)]
        max_pc = 0
        msgs = []
        for _ in range(2000):
            pc = rng.randrange(0, 500)
            max_pc = max(max_pc, pc)
            c = clocks[rng.randrange(4)]
            if msgs and rng.random() < 0.5:
                out = c.merge(msgs.pop(), pc)
            else:
                out = c.advance(pc)
            msgs.append(out)
            assert out.l <= max_pc

    def test_counter_stays_small_at_realistic_rates(self):
        # events at >= 1ms spacing per node keep c tiny
        clk = HlcClock()
        for ms in range(0, 5000):
            out = clk.advance(ms)
            assert out.c < 2
