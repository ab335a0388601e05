"""Domain types shared by the scheduler, estimator, engine, and workloads."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

NS_PER_S = 1_000_000_000

# Fixed-size data packets: 1448 payload bytes plus 52 bytes of header
# overhead gives the 1500-byte wire size used for serialization delay.
DEFAULT_PAYLOAD_BYTES = 1448
DEFAULT_OVERHEAD_BYTES = 52

# Prior for the smoothed service-time estimate before the first ACK: a small
# positive floor keeps the occupancy-weighted cost finite and positive.
SERVICE_ESTIMATE_FLOOR_S = 1e-6


class MissingTimestampError(ValueError):
    """Raised when a packet timing query needs a timestamp that is absent."""


class EventKind(IntEnum):
    APP_ARRIVAL = 0
    DEQUEUE_COMPLETE = 1
    DELIVERY = 2
    ACK_RECEIVED = 3
    LOSS_DETECTED = 4
    WORKLOAD_TIMER = 5
    CROSS_TRAFFIC_ARRIVAL = 6
    SAMPLE_TICK = 7
    TRACE_TICK = 8


@dataclass(order=True)
class Event:
    """Timestamped discrete event; (time, seq) ordering is total."""

    time: float
    seq: int
    kind: EventKind = field(compare=False)
    subflow_id: Optional[int] = field(default=None, compare=False)
    packet_id: Optional[int] = field(default=None, compare=False)


@dataclass
class Packet:
    """Unit of scheduling with its assignment, service-start, and ACK times."""

    id: int
    size: int
    subflow_id: Optional[int] = None
    t_sched: Optional[float] = None
    t_service_start: Optional[float] = None
    t_ack: Optional[float] = None


def rtt_of(p: Packet) -> float:
    """Round-trip time: ACK receipt minus assignment to the subflow."""
    if p.t_ack is None or p.t_sched is None:
        raise MissingTimestampError(f"packet {p.id}: rtt needs t_sched and t_ack")
    return p.t_ack - p.t_sched


def wait_of(p: Packet) -> float:
    """Device-queue waiting time: service start minus assignment."""
    if p.t_service_start is None or p.t_sched is None:
        raise MissingTimestampError(
            f"packet {p.id}: wait needs t_sched and t_service_start"
        )
    return p.t_service_start - p.t_sched


def service_time_of(p: Packet) -> float:
    """Service time: round-trip time minus device-queue waiting time."""
    if p.t_ack is None or p.t_service_start is None:
        raise MissingTimestampError(
            f"packet {p.id}: service time needs t_service_start and t_ack"
        )
    return p.t_ack - p.t_service_start


@dataclass
class QueueCounters:
    """Cumulative enqueue/dequeue counters for one device queue.

    Both counters only grow; their difference is the instantaneous queue
    occupancy.
    """

    num_queued: int = 0
    num_completed: int = 0

    @property
    def occupancy(self) -> int:
        return self.num_queued - self.num_completed


@dataclass
class PathConfig:
    """Static parameters of one network path."""

    link_rate_bps: float
    prop_delay_s: float
    loss_rate: float = 0.0
    queue_capacity: int = 1000
    label: str = ""

    def validate(self) -> list[str]:
        errors = []
        if self.link_rate_bps <= 0:
            errors.append(f"path {self.label!r}: link_rate_bps must be > 0")
        if self.prop_delay_s < 0:
            errors.append(f"path {self.label!r}: prop_delay_s must be >= 0")
        if not 0.0 <= self.loss_rate <= 1.0:
            errors.append(f"path {self.label!r}: loss_rate must be in [0, 1]")
        if self.queue_capacity < 1:
            errors.append(f"path {self.label!r}: queue_capacity must be >= 1")
        return errors


@dataclass
class SubflowState:
    """Per-path state visible to the scheduling policies.

    srtt is None until the first RTT sample arrives; the engine substitutes
    a physically derived prior when policies need a number earlier.
    dequeue_rate_sample is the (delta_packets, delta_t) pair from the most
    recent sampling window, used by the wait-time approximation.
    """

    id: int
    counters: QueueCounters = field(default_factory=QueueCounters)
    device_queue: deque = field(default_factory=deque)
    queue_capacity: int = 1000
    srtt: Optional[float] = None
    service_estimate: float = SERVICE_ESTIMATE_FLOOR_S
    wait_estimate: float = 0.0
    dequeue_rate_sample: tuple[int, float] = (0, 0.0)
    cwnd: int = 10
    in_flight: int = 0

    @property
    def occupancy(self) -> int:
        return self.counters.occupancy


class CongestionMode(IntEnum):
    SLOW_START = 0
    CONGESTION_AVOIDANCE = 1


# Stands in for an unbounded slow-start threshold; growth stays in slow
# start until the first loss, which is what lets queues inflate.
SSTHRESH_UNSET = 1 << 30


@dataclass
class CongestionState:
    """Minimal per-subflow additive-increase/multiplicative-decrease window."""

    cwnd: int = 10
    ssthresh: int = SSTHRESH_UNSET
    mode: CongestionMode = CongestionMode.SLOW_START
    ca_acks: int = 0


def grow_on_ack(cs: CongestionState) -> None:
    """Window growth per ACK: +1 in slow start, +1 per window in avoidance."""
    if cs.mode == CongestionMode.SLOW_START:
        cs.cwnd += 1
        if cs.cwnd >= cs.ssthresh:
            cs.mode = CongestionMode.CONGESTION_AVOIDANCE
            cs.ca_acks = 0
    else:
        cs.ca_acks += 1
        if cs.ca_acks >= cs.cwnd:
            cs.ca_acks -= cs.cwnd
            cs.cwnd += 1


def shrink_on_loss(cs: CongestionState) -> None:
    """Multiplicative decrease with a floor of two packets."""
    cs.ssthresh = max(cs.cwnd // 2, 2)
    cs.cwnd = cs.ssthresh
    cs.mode = CongestionMode.CONGESTION_AVOIDANCE
    cs.ca_acks = 0
