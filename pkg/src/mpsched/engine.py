"""Simulation engine: turns a validated scenario into a report.

The inner event loop lives in a kernel module that exists in two forms: the
plain-Python `_loop` and a compiled twin `_loop_c` built from the same
source. The compiled form is preferred when importable; setting the
environment variable `MPSCHED_PURE` to any non-empty value forces the pure
interpreter path. Both produce byte-identical reports.
"""

from __future__ import annotations

import os

from .core import NS_PER_S, CongestionState, grow_on_ack, shrink_on_loss  # noqa: F401
from .metrics import SimulationReport, build_report
from .scenario import ScenarioConfig, ScenarioError
from .workloads import (
    CbrSpec,
    FileSpec,
    UdpBurstSpec,
    WebSpec,
    cbr_arrivals,
    file_arrivals,
    udp_arrivals,
    web_plan,
)

if os.environ.get("MPSCHED_PURE"):
    from . import _loop as _kernel
else:
    try:
        from . import _loop_c as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _loop as _kernel

#: True when the compiled kernel is active for this process.
KERNEL_COMPILED = getattr(_kernel, "__file__", "").endswith((".so", ".pyd"))

# Dequeue-rate counters are sampled on a fixed short window so the wait
# approximation tracks queue drain at sub-RTT resolution.
SAMPLE_WINDOW_NS = 10_000_000


def kernel_name() -> str:
    return "compiled" if KERNEL_COMPILED else "pure"


def run(
    scenario: ScenarioConfig,
    *,
    collect_packets: bool = False,
    debug: bool = False,
) -> SimulationReport:
    """Run one scenario to completion and return its report.

    Identical scenario and seed give a byte-identical report. `debug` turns
    on per-event conservation and census assertions (slow; small runs only).
    """
    errors = scenario.validate()
    if errors:
        raise ScenarioError(errors)
    raw = simulate_raw(scenario, collect_packets=collect_packets, debug=debug)
    return build_report(scenario, raw)


def simulate_raw(
    scenario: ScenarioConfig,
    *,
    collect_packets: bool = False,
    debug: bool = False,
    initial_cwnd: int = 10,
    arrivals_override=None,
) -> dict:
    """Run the kernel and return its raw counters and traces.

    Test hook: `arrivals_override` replaces generated workload arrivals with
    an explicit [(t_ns, payload_bytes)] list, and `initial_cwnd` opens the
    window wide for open-loop queueing checks.
    """
    payload = scenario.packet_payload_bytes
    overhead = scenario.packet_overhead_bytes

    arrivals: list[tuple[int, int]] = []
    udp: list[tuple[int, int, int]] = []
    plans = []
    backlog = 0
    for w in scenario.workloads:
        if isinstance(w, CbrSpec):
            arrivals.extend(cbr_arrivals(w, payload, overhead))
        elif isinstance(w, FileSpec):
            batch = file_arrivals(w, payload)
            # A file source is backlogged: the application hands over data as
            # the connection accepts it, so the whole transfer must fit in
            # the send buffer rather than overflow it at t=0.
            backlog += len(batch)
            arrivals.extend(batch)
        elif isinstance(w, UdpBurstSpec):
            udp.extend(
                (t, size, w.path_id) for t, size in udp_arrivals(w, payload, overhead)
            )
        elif isinstance(w, WebSpec):
            plans.append(web_plan(w, payload, scenario.seed))
        else:
            raise TypeError(f"unrecognized workload {type(w).__name__}")
    if arrivals_override is not None:
        arrivals = list(arrivals_override)
    arrivals.sort(key=lambda a: a[0])
    udp.sort(key=lambda a: a[0])
    buffer_cap = max(scenario.send_buffer_pkts, backlog)

    paths = [
        (p.link_rate_bps, round(p.prop_delay_s * NS_PER_S), p.loss_rate,
         p.queue_capacity)
        for p in scenario.paths
    ]
    return _kernel.simulate(
        paths,
        arrivals,
        udp,
        plans,
        policy=scenario.scheduler.value,
        estimator_mode=scenario.estimator_mode,
        payload=payload,
        overhead=overhead,
        duration_ns=round(scenario.duration_s * NS_PER_S),
        seed=scenario.seed,
        send_buffer_cap=buffer_cap,
        send_window=scenario.send_window_pkts,
        trace_window_ns=round(scenario.trace_window_s * NS_PER_S),
        sample_window_ns=SAMPLE_WINDOW_NS,
        initial_cwnd=initial_cwnd,
        collect_packets=collect_packets,
        debug=debug,
    )
