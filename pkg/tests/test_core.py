"""Unit tests for the shared domain types and packet timing arithmetic."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpsched.core import (
    CongestionMode,
    CongestionState,
    MissingTimestampError,
    Packet,
    PathConfig,
    QueueCounters,
    SubflowState,
    grow_on_ack,
    rtt_of,
    service_time_of,
    shrink_on_loss,
    wait_of,
)


class TestPacketTiming:
    def test_rtt_simple(self):
        p = Packet(id=1, size=1448, t_sched=1.0, t_ack=1.050)
        assert rtt_of(p) == pytest.approx(0.050)

    def test_rtt_zero_delay(self):
        p = Packet(id=2, size=1448, t_sched=2.0, t_ack=2.0)
        assert rtt_of(p) == 0.0

    def test_rtt_from_origin(self):
        p = Packet(id=3, size=1448, t_sched=0.0, t_ack=0.320)
        assert rtt_of(p) == pytest.approx(0.320)

    def test_rtt_missing_ack(self):
        p = Packet(id=4, size=1448, t_sched=1.0)
        with pytest.raises(MissingTimestampError):
            rtt_of(p)

    def test_service_time_simple(self):
        p = Packet(id=5, size=1448, t_sched=1.0, t_service_start=1.010, t_ack=1.050)
        assert service_time_of(p) == pytest.approx(0.040)

    def test_service_time_no_wait(self):
        # Empty queue: service starts at assignment, so service time is
        # the whole round trip.
        p = Packet(id=6, size=1448, t_sched=0.5, t_service_start=0.5, t_ack=0.9)
        assert service_time_of(p) == rtt_of(p)

    def test_service_time_instantaneous(self):
        p = Packet(id=7, size=1448, t_sched=0.0, t_service_start=0.5, t_ack=0.5)
        assert service_time_of(p) == 0.0

    def test_service_time_missing_start(self):
        p = Packet(id=8, size=1448, t_sched=0.0, t_ack=1.0)
        with pytest.raises(MissingTimestampError):
            service_time_of(p)

    def test_wait_missing_start(self):
        p = Packet(id=9, size=1448, t_sched=0.0)
        with pytest.raises(MissingTimestampError):
            wait_of(p)

    @given(
        sched=st.fractions(min_value=0, max_value=100),
        wait=st.fractions(min_value=0, max_value=10),
        service=st.fractions(min_value=0, max_value=10),
    )
    def test_rtt_decomposition_exact(self, sched, wait, service):
        # rtt = wait + service is definitional; exact over exact arithmetic.
        p = Packet(
            id=0,
            size=1448,
            t_sched=sched,
            t_service_start=sched + wait,
            t_ack=sched + wait + service,
        )
        assert rtt_of(p) == wait_of(p) + service_time_of(p)
        assert rtt_of(p) >= 0 and wait_of(p) >= 0 and service_time_of(p) >= 0


class TestQueueCounters:
    def test_occupancy_tracks_difference(self):
        c = QueueCounters()
        assert c.occupancy == 0
        c.num_queued += 3
        assert c.occupancy == 3
        c.num_completed += 2
        assert c.occupancy == 1

    @given(st.lists(st.booleans(), max_size=200))
    def test_monotone_and_bounded(self, ops):
        c = QueueCounters()
        prev_q, prev_d = 0, 0
        for enqueue in ops:
            if enqueue:
                c.num_queued += 1
            elif c.occupancy > 0:
                c.num_completed += 1
            assert c.num_queued >= prev_q
            assert c.num_completed >= prev_d
            assert c.num_completed <= c.num_queued
            prev_q, prev_d = c.num_queued, c.num_completed


class TestSubflowState:
    def test_occupancy_mirrors_counters(self):
        s = SubflowState(id=1)
        s.counters.num_queued = 7
        s.counters.num_completed = 4
        assert s.occupancy == 3

    def test_srtt_unset_initially(self):
        assert SubflowState(id=1).srtt is None


class TestPathConfig:
    def test_valid_path(self):
        p = PathConfig(link_rate_bps=6e6, prop_delay_s=0.010)
        assert p.validate() == []

    def test_invalid_fields_all_reported(self):
        p = PathConfig(
            link_rate_bps=0, prop_delay_s=-1, loss_rate=2.0, queue_capacity=0
        )
        errors = p.validate()
        assert len(errors) == 4


class TestCongestionWindow:
    def test_slow_start_doubles_over_window(self):
        cs = CongestionState(cwnd=4)
        for _ in range(4):
            grow_on_ack(cs)
        assert cs.cwnd == 8

    def test_avoidance_grows_one_per_window(self):
        cs = CongestionState(
            cwnd=10, ssthresh=10, mode=CongestionMode.CONGESTION_AVOIDANCE
        )
        for _ in range(10):
            grow_on_ack(cs)
        assert cs.cwnd == 11

    def test_loss_halves(self):
        cs = CongestionState(cwnd=20)
        shrink_on_loss(cs)
        assert cs.ssthresh == 10
        assert cs.cwnd == 10
        assert cs.mode == CongestionMode.CONGESTION_AVOIDANCE

    def test_loss_floor(self):
        cs = CongestionState(cwnd=2)
        shrink_on_loss(cs)
        assert cs.cwnd == 2

    def test_slow_start_exits_at_threshold(self):
        cs = CongestionState(cwnd=4, ssthresh=5)
        grow_on_ack(cs)
        assert cs.mode == CongestionMode.CONGESTION_AVOIDANCE
