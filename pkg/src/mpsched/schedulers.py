"""Pluggable packet scheduling policies over per-subflow state.

Every policy is a pure function from subflow states to a decision: assign
the packet to one subflow, hold it hoping a faster subflow frees up, or
report that nothing can take it right now. Policies never assign to a
subflow whose window is exhausted or whose device queue is full, and all
tie-breaks go to the lowest subflow id, so decisions are deterministic.

The engine guarantees that srtt is numeric (it substitutes a physical prior
before the first RTT sample), so policies treat state fields as plain
numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union


@dataclass(frozen=True)
class Assign:
    subflow_id: int


class WaitForFaster:
    """Hold the packet; sending on a slower subflow now would cost more."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "WaitForFaster()"


class NoCapacity:
    """No subflow passes the admission rule."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoCapacity()"


WAIT_FOR_FASTER = WaitForFaster()
NO_CAPACITY = NoCapacity()

SchedulerDecision = Union[Assign, WaitForFaster, NoCapacity]


class PolicyKind(str, Enum):
    QAWARE = "qaware"
    MIN_SRTT = "minsrtt"
    ECF = "ecf"
    DAPS_LITE = "daps_lite"
    BLEST_LITE = "blest_lite"


def admissible(flow) -> bool:
    """Window room and queue space, both required to accept a packet."""
    return flow.in_flight < flow.cwnd and flow.occupancy < flow.queue_capacity


def schedule_qaware(flows: Sequence) -> SchedulerDecision:
    """Assign to the subflow minimizing (occupancy + 1) * service_estimate.

    The cost is the expected time for the new packet to clear the subflow's
    system: everything already queued plus itself, each taking one expected
    service time. Queue occupancy is read live, so the policy reacts to
    congestion immediately instead of waiting for it to surface in RTT
    samples.
    """
    best_id = None
    best_cost = None
    for f in flows:
        if not admissible(f):
            continue
        cost = (f.occupancy + 1) * f.service_estimate
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_id = f.id
    if best_id is None:
        return NO_CAPACITY
    return Assign(best_id)


def schedule_min_srtt(flows: Sequence) -> SchedulerDecision:
    """Assign to the admissible subflow with the smallest smoothed RTT."""
    candidates = [f for f in flows if admissible(f)]
    if not candidates:
        return NO_CAPACITY
    best = min(candidates, key=lambda f: (f.srtt, f.id))
    return Assign(best.id)


def schedule_ecf(flows: Sequence, pending: int = 0) -> SchedulerDecision:
    """Prefer the fastest subflow; wait for it unless a slower one finishes sooner.

    When the fastest subflow is blocked, sending via it means waiting for
    window room first: roughly one fastest-RTT scaled by how full its window
    is. If that still beats the slower subflow's RTT, hold the packet. The
    send-queue depth (`pending`) is accepted for interface completeness but
    does not enter the estimate.
    """
    if not flows:
        return NO_CAPACITY
    fastest = min(flows, key=lambda f: (f.srtt, f.id))
    if admissible(fastest):
        return Assign(fastest.id)
    others = [f for f in flows if f.id != fastest.id and admissible(f)]
    if not others:
        return NO_CAPACITY
    slower = min(others, key=lambda f: (f.srtt, f.id))
    t_wait = fastest.srtt * (1 + fastest.in_flight / fastest.cwnd)
    t_slow = slower.srtt
    if t_wait <= t_slow:
        return WAIT_FOR_FASTER
    return Assign(slower.id)


def schedule_blest_lite(flows: Sequence, send_window: float = math.inf) -> SchedulerDecision:
    """Prefer the fastest subflow; avoid window-blocking sends on slower ones.

    When only a slower subflow is open, estimate how many packets the
    fastest subflow could move during one slower round trip. If that
    exceeds the remaining send window, a slow send would sit in front of
    them and block the window, so hold the packet instead.
    """
    if not flows:
        return NO_CAPACITY
    fastest = min(flows, key=lambda f: (f.srtt, f.id))
    if admissible(fastest):
        return Assign(fastest.id)
    others = [f for f in flows if f.id != fastest.id and admissible(f)]
    if not others:
        return NO_CAPACITY
    slower = min(others, key=lambda f: (f.srtt, f.id))
    if fastest.srtt > 0:
        fast_delivery = slower.srtt / fastest.srtt * fastest.cwnd
    else:
        fast_delivery = math.inf
    if fast_delivery > send_window:
        return WAIT_FOR_FASTER
    return Assign(slower.id)


def schedule_daps_lite(flows: Sequence, burst: int) -> list[tuple[int, int]]:
    """Precompute an allocation of the next `burst` packets by RTT ratio.

    With the slower subflow's RTT r times the faster one's (r rounded half
    up), the faster subflow gets r packets for every one on the slower,
    i.e. floor(burst * r / (r + 1)) of the burst. The allocation is returned
    fastest first and is consumed in full before recomputation, which is
    what makes the policy slow to react to change.
    """
    if len(flows) != 2:
        raise ValueError(f"daps_lite supports exactly 2 subflows, got {len(flows)}")
    fast, slow = sorted(flows, key=lambda f: (f.srtt, f.id))
    ratio = max(int(math.floor(slow.srtt / fast.srtt + 0.5)), 1)
    fast_count = burst * ratio // (ratio + 1)
    return [(fast.id, fast_count), (slow.id, burst - fast_count)]


def daps_order(allocation: list[tuple[int, int]]) -> list[int]:
    """Expand a two-subflow allocation into an evenly interleaved send order."""
    (fast_id, fast_count), (slow_id, slow_count) = allocation
    total = fast_count + slow_count
    order = []
    for i in range(total):
        if slow_count and (i + 1) * slow_count // total > i * slow_count // total:
            order.append(slow_id)
        else:
            order.append(fast_id)
    return order
