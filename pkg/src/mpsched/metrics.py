"""Measurement collection: per-flow traces, run reports, serialization.

Throughput is goodput counted at ACK receipt, in wire bytes (payload plus
header overhead), so a CBR source offered at R bps measures ≈ R when fully
carried. Trace rows are stamped at the end of each window: throughput covers
the preceding window, occupancy and estimator values are read at the stamp
instant.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Optional

from .core import NS_PER_S
from .scenario import ScenarioConfig
from .workloads import FileSpec, WebSpec

TRACE_CSV_HEADER = ("time", "subflow", "throughput_bps", "queue_pkts",
                    "srtt_s", "service_est_s")


@dataclass(frozen=True)
class FlowTraceSample:
    """One subflow's measurements for one trace window."""

    time_s: float
    subflow_id: int
    throughput_bps: float
    queue_pkts: int
    srtt_s: float
    service_est_s: float
    assigned_pkts: int


@dataclass(frozen=True)
class FlowSummary:
    """Final per-subflow state and totals at end of run."""

    subflow_id: int
    label: str
    acked_bytes: int
    acked_packets: int
    delivered_packets: int
    throughput_bps: float
    srtt_s: float
    service_est_s: float
    cwnd: int
    queue_pkts: int
    busy_s: float


@dataclass(frozen=True)
class SimulationReport:
    """Immutable result of one run; serializable as JSON and CSV."""

    scenario_digest: str
    scheduler: str
    duration_s: float
    aggregate_throughput_bps: float
    per_flow_throughput_bps: list[float]
    completion_time_s: Optional[float]
    packets: dict
    flows: list[FlowSummary]
    traces: list[FlowTraceSample]
    udp: dict
    web_completion_s: list[Optional[float]]
    fully_drained: bool
    wait_estimate_fallbacks: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["traces"] = [asdict(t) for t in self.traces]
        d["flows"] = [asdict(f) for f in self.flows]
        return d

    def to_json(self) -> str:
        """Canonical serialization: identical runs give identical bytes."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def build_report(cfg: ScenarioConfig, raw: dict) -> SimulationReport:
    """Assemble the report from kernel counters and the resolved scenario."""
    duration = cfg.duration_s
    per_flow = [f["acked_bytes"] * 8 / duration for f in raw["flows"]]
    traces = [
        FlowTraceSample(
            time_s=t / NS_PER_S,
            subflow_id=fid,
            throughput_bps=acked_bytes * 8 / cfg.trace_window_s,
            queue_pkts=occ,
            srtt_s=srtt,
            service_est_s=s_est,
            assigned_pkts=assigned,
        )
        for (t, fid, acked_bytes, occ, srtt, s_est, assigned) in raw["traces"]
    ]
    flows = [
        FlowSummary(
            subflow_id=f["id"],
            label=cfg.paths[f["id"]].label,
            acked_bytes=f["acked_bytes"],
            acked_packets=f["acked_packets"],
            delivered_packets=f["delivered"],
            throughput_bps=per_flow[f["id"]],
            srtt_s=f["srtt"],
            service_est_s=f["service_estimate"],
            cwnd=f["cwnd"],
            queue_pkts=f["occupancy"],
            busy_s=f["busy_ns"] / NS_PER_S,
        )
        for f in raw["flows"]
    ]

    finite = any(isinstance(w, (FileSpec, WebSpec)) for w in cfg.workloads)
    web_done = [t / NS_PER_S if t >= 0 else None for t in raw["web_done_ns"]]
    completion: Optional[float] = None
    # Completion is only meaningful when every generated packet was ACKed.
    if (
        finite
        and raw["fully_drained"]
        and raw["dropped"] == 0
        and raw["last_ack_ns"] >= 0
        and all(t is not None for t in web_done)
    ):
        completion = raw["last_ack_ns"] / NS_PER_S

    return SimulationReport(
        scenario_digest=cfg.digest(),
        scheduler=cfg.scheduler.value,
        duration_s=duration,
        aggregate_throughput_bps=sum(per_flow),
        per_flow_throughput_bps=per_flow,
        completion_time_s=completion,
        packets={
            "generated": raw["generated"],
            "delivered": raw["delivered"],
            "acked": raw["acked"],
            "dropped": raw["dropped"],
            "retransmitted": raw["retransmitted"],
        },
        flows=flows,
        traces=traces,
        udp=dict(raw["udp"]),
        web_completion_s=web_done,
        fully_drained=raw["fully_drained"],
        wait_estimate_fallbacks=raw["wait_fallbacks"],
        seed=cfg.seed,
    )


def write_report_json(report: SimulationReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def write_traces_csv(report: SimulationReport, path) -> None:
    """Trace time series, one row per (window, subflow)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_CSV_HEADER)
        for t in report.traces:
            w.writerow(
                [
                    f"{t.time_s:.6f}",
                    t.subflow_id,
                    f"{t.throughput_bps:.3f}",
                    t.queue_pkts,
                    f"{t.srtt_s:.9f}",
                    f"{t.service_est_s:.9f}",
                ]
            )


def summarize(values: list[float]) -> tuple[float, float]:
    """Mean and population standard deviation; (0, 0) for an empty list."""
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, var**0.5
