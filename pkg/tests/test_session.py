import random

from sessionkv.hlc import ZERO, HlcTimestamp
from sessionkv.session import ReadLevel, SessionState, WriteLevel


def make_session(dcs=2, partitions=4):
    return SessionState(dcs, partitions)


class TestBuildGet:
    def test_eventual_sends_zero_vectors(self):
        s = make_session()
        assert s.build_get(1, ReadLevel.EVENTUAL) == ((0, 0), (0, 0))

    def test_monotonic_read_projects_read_column(self):
        s = make_session()
        s.read_idx[0][2] = 2
        s.read_idx[1][2] = 5
        s.write_idx[0][2] = 9
        assert s.build_get(2, ReadLevel.MONOTONIC_READ) == ((2, 5), (0, 0))

    def test_read_your_write_projects_write_column(self):
        s = make_session()
        s.write_idx[1][0] = 7
        assert s.build_get(0, ReadLevel.READ_YOUR_WRITE) == ((0, 0), (0, 7))

    def test_combined_level_projects_both(self):
        s = make_session()
        s.read_idx[0][3] = 1
        s.write_idx[1][3] = 4
        assert s.build_get(3, ReadLevel.MONOTONIC_READ_YOUR_WRITE) == ((1, 0), (0, 4))


class TestAbsorbGet:
    def test_takes_max_of_log_index(self):
        s = make_session()
        s.read_idx[0][1] = 3
        s.absorb_get_reply(1, 0, 5, HlcTimestamp(1, 0))
        assert s.read_idx[0][1] == 5

    def test_smaller_index_ignored(self):
        s = make_session()
        s.read_idx[0][1] = 3
        s.absorb_get_reply(1, 0, 2, HlcTimestamp(1, 0))
        assert s.read_idx[0][1] == 3

    def test_dependency_time_tracks_max(self):
        s = make_session()
        s.dt_r = HlcTimestamp(4, 0)
        s.absorb_get_reply(0, 0, 1, HlcTimestamp(9, 1))
        assert s.dt_r == HlcTimestamp(9, 1)


class TestBuildPut:
    def test_monotonic_write_sends_write_time(self):
        s = make_session()
        s.dt_w = HlcTimestamp(8, 2)
        dt, blocking = s.build_put(0, WriteLevel.MONOTONIC_WRITE, hlc_mode=True)
        assert dt == HlcTimestamp(8, 2)
        assert blocking is None

    def test_eventual_sends_zero(self):
        s = make_session()
        s.dt_w = HlcTimestamp(8, 2)
        dt, blocking = s.build_put(0, WriteLevel.EVENTUAL, hlc_mode=True)
        assert dt == ZERO
        assert blocking is None

    def test_combined_takes_max_of_scalars(self):
        s = make_session()
        s.dt_r = HlcTimestamp(9, 0)
        s.dt_w = HlcTimestamp(8, 2)
        dt, _ = s.build_put(0, WriteLevel.MONOTONIC_WRITE_FOLLOWS_READS, hlc_mode=True)
        assert dt == HlcTimestamp(9, 0)

    def test_write_follows_reads_sends_read_time(self):
        s = make_session()
        s.dt_r = HlcTimestamp(3, 1)
        s.dt_w = HlcTimestamp(8, 2)
        dt, _ = s.build_put(0, WriteLevel.WRITE_FOLLOWS_READS, hlc_mode=True)
        assert dt == HlcTimestamp(3, 1)

    def test_blocking_vectors_without_hlc(self):
        s = make_session()
        s.read_idx[0][1] = 2
        s.write_idx[1][1] = 6
        dt, blocking = s.build_put(1, WriteLevel.MONOTONIC_WRITE, hlc_mode=False)
        assert dt == ZERO
        assert blocking == ((0, 0), (0, 6))
        _, blocking = s.build_put(1, WriteLevel.WRITE_FOLLOWS_READS, hlc_mode=False)
        assert blocking == ((2, 0), (0, 0))
        _, blocking = s.build_put(1, WriteLevel.MONOTONIC_WRITE_FOLLOWS_READS, hlc_mode=False)
        assert blocking == ((2, 0), (0, 6))
        _, blocking = s.build_put(1, WriteLevel.EVENTUAL, hlc_mode=False)
        assert blocking == ((0, 0), (0, 0))


class TestAbsorbPut:
    def test_first_write(self):
        s = make_session()
        s.absorb_put_reply(2, 1, 1, HlcTimestamp(7, 0))
        assert s.write_idx[1][2] == 1
        assert s.dt_w == HlcTimestamp(7, 0)

    def test_stale_reply_no_change(self):
        s = make_session()
        s.write_idx[1][2] = 5
        s.absorb_put_reply(2, 1, 3, HlcTimestamp(1, 0))
        assert s.write_idx[1][2] == 5

    def test_equal_time_idempotent(self):
        s = make_session()
        s.dt_w = HlcTimestamp(7, 0)
        s.absorb_put_reply(0, 0, 1, HlcTimestamp(7, 0))
        assert s.dt_w == HlcTimestamp(7, 0)


def test_session_state_never_decreases():
    rng = random.Random(13)
    s = make_session(3, 5)
    for _ in range(4000):
        before_r = [row[:] for row in s.read_idx]
        before_w = [row[:] for row in s.write_idx]
        dtr, dtw = s.dt_r, s.dt_w
        p = rng.randrange(5)
        dc = rng.randrange(3)
        idx = rng.randrange(0, 50)
        t = HlcTimestamp(rng.randrange(0, 40), rng.randrange(0, 4))
        if rng.random() < 0.5:
            s.absorb_get_reply(p, dc, idx, t)
        else:
            s.absorb_put_reply(p, dc, idx, t)
        for d in range(3):
            for q in range(5):
                assert s.read_idx[d][q] >= before_r[d][q]
                assert s.write_idx[d][q] >= before_w[d][q]
        assert s.dt_r >= dtr and s.dt_w >= dtw
