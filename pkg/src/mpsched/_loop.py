"""Discrete-event simulation kernel.

Single-threaded event loop over integer-nanosecond timestamps. Events are
(time_ns, seq, kind, a, b) tuples in a binary heap; seq makes ordering total,
so identical inputs replay identically. This module is plain Python and is
also compiled to a C extension at build time; the engine picks whichever is
available.

Each path is a facility: a finite FIFO device queue feeding a single server
that serializes one packet at a time. Delivery happens one propagation delay
after serialization ends, the ACK one turnaround plus propagation later.
A packet that draws a loss instead produces a loss notification one smoothed
RTT after its would-be delivery, and goes back to the front of the
connection send buffer.
"""

from __future__ import annotations

import math
import random
from collections import deque
from heapq import heappop, heappush

from .core import grow_on_ack, shrink_on_loss
from .estimator import (
    EwmaConfig,
    derive_service_from_rtt,
    estimate_wait,
    update_service_estimate,
    update_srtt,
    update_wait_estimate,
)
from .schedulers import (
    Assign,
    daps_order,
    schedule_blest_lite,
    schedule_daps_lite,
    schedule_ecf,
    schedule_min_srtt,
    schedule_qaware,
)

NS = 1_000_000_000

APP_ARRIVAL = 0
DEQUEUE_COMPLETE = 1
DELIVERY = 2
ACK_RECEIVED = 3
LOSS_DETECTED = 4
WORKLOAD_TIMER = 5
CROSS_TRAFFIC_ARRIVAL = 6
SAMPLE_TICK = 7
TRACE_TICK = 8

# Packet record fields.
R_FLOW = 0
R_SCHED = 1
R_START = 2
R_ACK = 3
R_RETX = 4
R_UDP = 5
R_PLAN = 6

# Lifecycle states for the debug census.
ST_PARKED = 0
ST_QUEUED = 1
ST_SERVING = 2
ST_WIRE = 3
ST_ACKED = 4
ST_DROPPED = 5
ST_UDP_DONE = 6


class Facility:
    """One path: device queue, server, window state, and estimators."""

    __slots__ = (
        "id",
        "rate_bps",
        "prop_ns",
        "tx_ns",
        "loss_rate",
        "queue_capacity",
        "fifo",
        "num_queued",
        "num_completed",
        "busy",
        "serving_pid",
        "cwnd",
        "ssthresh",
        "mode",
        "ca_acks",
        "in_flight",
        "srtt",
        "srtt_seen",
        "service_estimate",
        "wait_estimate",
        "dequeue_rate_sample",
        "rng",
        "sample_snapshot",
        "acked_bytes_window",
        "assigned_window",
        "acked_bytes_total",
        "acked_packets_total",
        "delivered_total",
        "occ_integral",
        "occ_changed_ns",
        "busy_ns",
        "enqueue_log",
        "delivery_log",
    )

    def __init__(self, fid, rate_bps, prop_ns, loss_rate, queue_capacity,
                 wire_bytes, initial_cwnd, seed):
        self.id = fid
        self.rate_bps = rate_bps
        self.prop_ns = prop_ns
        self.tx_ns = round(wire_bytes * 8 / rate_bps * NS)
        self.loss_rate = loss_rate
        self.queue_capacity = queue_capacity
        self.fifo = deque()
        self.num_queued = 0
        self.num_completed = 0
        self.busy = False
        self.serving_pid = -1
        self.cwnd = initial_cwnd
        self.ssthresh = 1 << 30
        self.mode = 0  # slow start
        self.ca_acks = 0
        self.in_flight = 0
        # Physical cold-start priors: one handshake round trip for srtt, and
        # propagation plus serialization for the service estimate.
        prior = (2 * prop_ns + self.tx_ns) / NS
        self.srtt = prior
        self.srtt_seen = False
        self.service_estimate = prior
        self.wait_estimate = 0.0
        self.dequeue_rate_sample = (0, 0.0)
        self.rng = random.Random(f"{seed}/loss/{fid}")
        self.sample_snapshot = 0
        self.acked_bytes_window = 0
        self.assigned_window = 0
        self.acked_bytes_total = 0
        self.acked_packets_total = 0
        self.delivered_total = 0
        self.occ_integral = 0
        self.occ_changed_ns = 0
        self.busy_ns = 0
        self.enqueue_log = None
        self.delivery_log = None

    @property
    def occupancy(self):
        return self.num_queued - self.num_completed

    def bump_occupancy_integral(self, now_ns):
        self.occ_integral += (self.num_queued - self.num_completed) * (
            now_ns - self.occ_changed_ns
        )
        self.occ_changed_ns = now_ns


def simulate(
    paths,
    arrivals,
    udp_arrivals=(),
    web_plans=(),
    *,
    policy="qaware",
    estimator_mode="direct",
    alpha=0.8,
    payload=1448,
    overhead=52,
    duration_ns=10 * NS,
    seed=1,
    send_buffer_cap=5000,
    send_window=0,
    trace_window_ns=100_000_000,
    sample_window_ns=10_000_000,
    initial_cwnd=10,
    turnaround_ns=0,
    collect_packets=False,
    debug=False,
):
    """Run one scenario and return raw counters, traces, and timings."""
    wire = payload + overhead
    cfg = EwmaConfig(alpha=alpha)
    flows = [
        Facility(k, r, p, l, q, wire, initial_cwnd, seed)
        for k, (r, p, l, q) in enumerate(paths)
    ]
    nflows = len(flows)
    direct_mode = estimator_mode == "direct"

    heap = []
    seq = 0
    for t, size in arrivals:
        heappush(heap, (t, seq, APP_ARRIVAL, size, -1))
        seq += 1
    for t, size, k in udp_arrivals:
        heappush(heap, (t, seq, CROSS_TRAFFIC_ARRIVAL, k, size))
        seq += 1

    plans = []
    for idx, plan in enumerate(web_plans):
        plans.append(
            {
                "packets": list(plan.object_packets),
                "next_object": 0,
                "outstanding": 0,
                "draw": plan.draw_rate,
                "done_ns": -1,
            }
        )
    # Kick off each site's first object at time zero.
    wire_bits = wire * 8

    def launch_object(plan_idx, start_ns):
        nonlocal seq
        p = plans[plan_idx]
        i = p["next_object"]
        if i >= len(p["packets"]):
            return
        p["next_object"] = i + 1
        count = p["packets"][i]
        p["outstanding"] = count
        interval = round(wire_bits / p["draw"]() * NS)
        t = start_ns
        for _ in range(count):
            heappush(heap, (t, seq, APP_ARRIVAL, payload, plan_idx))
            seq += 1
            t += interval

    for idx in range(len(plans)):
        launch_object(idx, 0)

    if sample_window_ns and sample_window_ns <= duration_ns:
        heappush(heap, (sample_window_ns, seq, SAMPLE_TICK, 0, 0))
        seq += 1
    if trace_window_ns and trace_window_ns <= duration_ns:
        heappush(heap, (trace_window_ns, seq, TRACE_TICK, 0, 0))
        seq += 1

    packets = []  # per-packet records, indexed by pid
    state = []  # lifecycle per pid, debug census only
    send_buffer = deque()
    daps_queue = deque()
    total_in_flight = 0
    generated = 0
    acked_total = 0
    delivered_total = 0
    dropped_buffer = 0
    retransmitted = 0
    udp_generated = 0
    udp_delivered = 0
    udp_dropped = 0
    udp_lost = 0
    wait_fallbacks = 0
    last_ack_ns = -1
    traces = []
    sample_window_s = sample_window_ns / NS

    if debug:
        for f in flows:
            f.enqueue_log = []
            f.delivery_log = []

    def new_packet(flow, udp, plan_idx):
        packets.append([flow, -1, -1, -1, 0, udp, plan_idx])
        if debug:
            state.append(-1)
        return len(packets) - 1

    def start_service(f, now):
        nonlocal seq
        pid = f.fifo.popleft()
        f.bump_occupancy_integral(now)
        f.num_completed += 1
        rec = packets[pid]
        rec[R_START] = now
        f.busy = True
        f.serving_pid = pid
        if debug:
            state[pid] = ST_SERVING
        heappush(heap, (now + f.tx_ns, seq, DEQUEUE_COMPLETE, f.id, pid))
        seq += 1

    def place(pid, f, now):
        nonlocal total_in_flight
        rec = packets[pid]
        rec[R_FLOW] = f.id
        rec[R_SCHED] = now
        rec[R_START] = -1
        rec[R_ACK] = -1
        f.bump_occupancy_integral(now)
        f.num_queued += 1
        f.fifo.append(pid)
        f.in_flight += 1
        total_in_flight += 1
        f.assigned_window += 1
        if debug:
            state[pid] = ST_QUEUED
            f.enqueue_log.append(pid)
        if not f.busy:
            start_service(f, now)

    def decide():
        """Pick a subflow for the head-of-line packet, or None to hold it."""
        if send_window and total_in_flight >= send_window:
            return None
        if policy == "qaware":
            d = schedule_qaware(flows)
        elif policy == "minsrtt":
            d = schedule_min_srtt(flows)
        elif policy == "ecf":
            d = schedule_ecf(flows, len(send_buffer))
        elif policy == "blest_lite":
            remaining = send_window - total_in_flight if send_window else math.inf
            d = schedule_blest_lite(flows, remaining)
        elif policy == "daps_lite":
            if not daps_queue:
                burst = max(flows[0].cwnd + flows[1].cwnd, 8)
                daps_queue.extend(daps_order(schedule_daps_lite(flows, burst)))
            f = flows[daps_queue[0]]
            if f.in_flight < f.cwnd and f.occupancy < f.queue_capacity:
                daps_queue.popleft()
                return f
            return None
        else:
            raise ValueError(f"unknown policy {policy!r}")
        if isinstance(d, Assign):
            return flows[d.subflow_id]
        return None

    def admit(pid, now):
        """Place the packet if a subflow will take it, else park it."""
        nonlocal dropped_buffer
        f = decide()
        if f is not None:
            place(pid, f, now)
            return
        if len(send_buffer) >= send_buffer_cap:
            dropped_buffer += 1
            if debug:
                state[pid] = ST_DROPPED
            return
        send_buffer.append(pid)
        if debug:
            state[pid] = ST_PARKED

    def drain(now):
        while send_buffer:
            f = decide()
            if f is None:
                return
            place(send_buffer.popleft(), f, now)

    def census_check(now):
        parked = sum(1 for s in state if s == ST_PARKED)
        queued = sum(1 for s in state if s == ST_QUEUED)
        assert parked == len(send_buffer), "send buffer census mismatch"
        assert queued == sum(len(f.fifo) for f in flows), "queue census mismatch"
        for f in flows:
            assert f.num_queued - f.num_completed == len(f.fifo), (
                f"occupancy drifted on subflow {f.id}"
            )
            assert f.in_flight >= 0
            tracked = sum(
                1
                for pid, s in enumerate(state)
                if s in (ST_QUEUED, ST_SERVING, ST_WIRE)
                and packets[pid][R_FLOW] == f.id
                and not packets[pid][R_UDP]
            )
            assert tracked == f.in_flight, f"in_flight drifted on subflow {f.id}"
        resolved = sum(1 for s in state if s in (ST_ACKED, ST_DROPPED, ST_UDP_DONE))
        floating = sum(
            1 for s in state if s in (ST_PARKED, ST_QUEUED, ST_SERVING, ST_WIRE)
        )
        assert resolved + floating == len(packets), "packet census leak"

    stopped_at = 0
    while heap:
        t, _, kind, a, b = heappop(heap)
        if t > duration_ns:
            break
        stopped_at = t

        if kind == APP_ARRIVAL:
            pid = new_packet(-1, 0, b)
            generated += 1
            if send_buffer:
                # Keep connection-level FIFO order behind parked packets.
                if len(send_buffer) >= send_buffer_cap:
                    dropped_buffer += 1
                    if debug:
                        state[pid] = ST_DROPPED
                else:
                    send_buffer.append(pid)
                    if debug:
                        state[pid] = ST_PARKED
                drain(t)
            else:
                admit(pid, t)

        elif kind == DEQUEUE_COMPLETE:
            f = flows[a]
            pid = b
            f.busy = False
            f.serving_pid = -1
            f.busy_ns += f.tx_ns
            if f.fifo:
                start_service(f, t)
            rec = packets[pid]
            if rec[R_UDP]:
                if f.loss_rate and f.rng.random() < f.loss_rate:
                    udp_lost += 1
                    if debug:
                        state[pid] = ST_UDP_DONE
                else:
                    heappush(heap, (t + f.prop_ns, seq, DELIVERY, a, pid))
                    seq += 1
                    if debug:
                        state[pid] = ST_WIRE
            else:
                if f.loss_rate and f.rng.random() < f.loss_rate:
                    detect_ns = t + f.prop_ns + round(f.srtt * NS)
                    heappush(heap, (detect_ns, seq, LOSS_DETECTED, a, pid))
                    seq += 1
                else:
                    heappush(heap, (t + f.prop_ns, seq, DELIVERY, a, pid))
                    seq += 1
                if debug:
                    state[pid] = ST_WIRE
            drain(t)

        elif kind == DELIVERY:
            f = flows[a]
            rec = packets[b]
            if rec[R_UDP]:
                udp_delivered += 1
                if debug:
                    state[b] = ST_UDP_DONE
            else:
                f.delivered_total += 1
                delivered_total += 1
                if debug:
                    f.delivery_log.append(b)
                heappush(
                    heap, (t + turnaround_ns + f.prop_ns, seq, ACK_RECEIVED, a, b)
                )
                seq += 1

        elif kind == ACK_RECEIVED:
            f = flows[a]
            rec = packets[b]
            assert rec[R_ACK] == -1, f"duplicate ack for packet {b}"
            rec[R_ACK] = t
            f.in_flight -= 1
            total_in_flight -= 1
            f.acked_bytes_window += wire
            f.acked_bytes_total += wire
            f.acked_packets_total += 1
            acked_total += 1
            last_ack_ns = t
            if debug:
                state[b] = ST_ACKED
            grow_on_ack(f)
            rtt_s = (t - rec[R_SCHED]) / NS
            if not f.srtt_seen:
                f.srtt = rtt_s
                f.srtt_seen = True
            else:
                update_srtt(f, rtt_s, cfg)
            if direct_mode:
                update_service_estimate(f, (t - rec[R_START]) / NS, cfg)
            else:
                dp, _ = f.dequeue_rate_sample
                if f.occupancy > 0 and dp <= 0:
                    wait_fallbacks += 1
                update_wait_estimate(f, estimate_wait(f), cfg)
                f.service_estimate = derive_service_from_rtt(f)
            plan_idx = rec[R_PLAN]
            if plan_idx >= 0:
                p = plans[plan_idx]
                p["outstanding"] -= 1
                if p["outstanding"] == 0:
                    if p["next_object"] >= len(p["packets"]):
                        p["done_ns"] = t
                    else:
                        launch_object(plan_idx, t)
            drain(t)

        elif kind == LOSS_DETECTED:
            f = flows[a]
            rec = packets[b]
            f.in_flight -= 1
            total_in_flight -= 1
            shrink_on_loss(f)
            retransmitted += 1
            rec[R_RETX] += 1
            # Retransmissions go to the head of the send queue.
            send_buffer.appendleft(b)
            if debug:
                state[b] = ST_PARKED
            drain(t)

        elif kind == CROSS_TRAFFIC_ARRIVAL:
            f = flows[a]
            udp_generated += 1
            pid = new_packet(a, 1, -1)
            if f.occupancy < f.queue_capacity:
                f.bump_occupancy_integral(t)
                f.num_queued += 1
                f.fifo.append(pid)
                rec = packets[pid]
                rec[R_SCHED] = t
                if debug:
                    state[pid] = ST_QUEUED
                    f.enqueue_log.append(pid)
                if not f.busy:
                    start_service(f, t)
            else:
                udp_dropped += 1
                if debug:
                    state[pid] = ST_UDP_DONE

        elif kind == SAMPLE_TICK:
            for f in flows:
                delta = f.num_completed - f.sample_snapshot
                f.sample_snapshot = f.num_completed
                f.dequeue_rate_sample = (delta, sample_window_s)
            nxt = t + sample_window_ns
            if nxt <= duration_ns:
                heappush(heap, (nxt, seq, SAMPLE_TICK, 0, 0))
                seq += 1

        elif kind == TRACE_TICK:
            for f in flows:
                traces.append(
                    (
                        t,
                        f.id,
                        f.acked_bytes_window,
                        f.occupancy,
                        f.srtt,
                        f.service_estimate,
                        f.assigned_window,
                    )
                )
                f.acked_bytes_window = 0
                f.assigned_window = 0
            nxt = t + trace_window_ns
            if nxt <= duration_ns:
                heappush(heap, (nxt, seq, TRACE_TICK, 0, 0))
                seq += 1

        if debug:
            census_check(t)

    end_ns = duration_ns if heap else stopped_at
    for f in flows:
        f.bump_occupancy_integral(end_ns)

    fully_drained = (
        not send_buffer
        and total_in_flight == 0
        and generated == acked_total + dropped_buffer
    )

    result = {
        "end_ns": end_ns,
        "generated": generated,
        "delivered": delivered_total,
        "acked": acked_total,
        "dropped": dropped_buffer,
        "retransmitted": retransmitted,
        "last_ack_ns": last_ack_ns,
        "fully_drained": fully_drained,
        "parked": len(send_buffer),
        "in_flight": total_in_flight,
        "traces": traces,
        "wait_fallbacks": wait_fallbacks,
        "udp": {
            "generated": udp_generated,
            "delivered": udp_delivered,
            "dropped": udp_dropped,
            "lost": udp_lost,
        },
        "web_done_ns": [p["done_ns"] for p in plans],
        "flows": [
            {
                "id": f.id,
                "acked_bytes": f.acked_bytes_total,
                "acked_packets": f.acked_packets_total,
                "delivered": f.delivered_total,
                "num_queued": f.num_queued,
                "num_completed": f.num_completed,
                "occupancy": f.occupancy,
                "occ_integral": f.occ_integral,
                "busy_ns": f.busy_ns,
                "srtt": f.srtt,
                "service_estimate": f.service_estimate,
                "cwnd": f.cwnd,
            }
            for f in flows
        ],
    }
    if collect_packets:
        result["packets"] = packets
    if debug:
        result["enqueue_logs"] = [f.enqueue_log for f in flows]
        result["delivery_logs"] = [f.delivery_log for f in flows]
    return result
