"""Application traffic generators for the simulated experiment families.

Arrival streams are lists of (time_ns, payload_bytes) pairs. Constant-rate
streams space packets by wire size over the offered rate, so the offered
rate counts the same bits the links serialize. File transfers are fully
backlogged at time zero. Web browsing fetches a site's objects one after
another, each at a freshly drawn rate, driven by the engine as each object
completes. UDP cross traffic is a constant-rate stream aimed at a single
path, bypassing scheduling and congestion control.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Union

from .core import NS_PER_S


@dataclass(frozen=True)
class WebSite:
    name: str
    object_count: int
    total_size_kb: float

    @property
    def total_size_bytes(self) -> int:
        return round(self.total_size_kb * 1000)

    @property
    def object_size_bytes(self) -> int:
        return round(self.total_size_bytes / self.object_count)


def load_websites() -> dict[str, WebSite]:
    """Bundled object-count/size table, keyed by site name.

    Fractional object counts in the source data (averages over visits) are
    rounded half up to whole objects.
    """
    sites = {}
    path = resources.files("mpsched.data") / "websites.csv"
    with path.open(newline="") as f:
        for row in csv.DictReader(f):
            count = int(math.floor(float(row["objects"]) + 0.5))
            sites[row["name"]] = WebSite(
                name=row["name"],
                object_count=count,
                total_size_kb=float(row["total_kb"]),
            )
    return sites


@dataclass(frozen=True)
class CbrSpec:
    rate_bps: float
    duration_s: float


@dataclass(frozen=True)
class FileSpec:
    size_bytes: int


@dataclass(frozen=True)
class WebSpec:
    site: WebSite
    rate_min_bps: float
    rate_max_bps: float


@dataclass(frozen=True)
class UdpBurstSpec:
    path_id: int
    rate_bps: float
    start_s: float
    stop_s: float


WorkloadSpec = Union[CbrSpec, FileSpec, WebSpec, UdpBurstSpec]


def packet_count_for_bytes(size_bytes: int, payload_bytes: int) -> int:
    return math.ceil(size_bytes / payload_bytes)


def cbr_arrivals(
    spec: CbrSpec, payload_bytes: int, overhead_bytes: int, start_s: float = 0.0
) -> list[tuple[int, int]]:
    """Fixed-size packets at exact wire-rate spacing over the duration."""
    wire_bits = (payload_bytes + overhead_bytes) * 8
    count = int(spec.rate_bps * spec.duration_s / wire_bits)
    interval_ns = round(wire_bits / spec.rate_bps * NS_PER_S)
    start_ns = round(start_s * NS_PER_S)
    return [(start_ns + i * interval_ns, payload_bytes) for i in range(count)]


def file_arrivals(spec: FileSpec, payload_bytes: int) -> list[tuple[int, int]]:
    """The whole file available at time zero, split into payload-size packets."""
    count = packet_count_for_bytes(spec.size_bytes, payload_bytes)
    return [(0, payload_bytes) for _ in range(count)]


def udp_arrivals(
    spec: UdpBurstSpec, payload_bytes: int, overhead_bytes: int
) -> list[tuple[int, int]]:
    """Constant-rate packets inside [start, stop)."""
    wire_bits = (payload_bytes + overhead_bytes) * 8
    count = int(spec.rate_bps * (spec.stop_s - spec.start_s) / wire_bits)
    interval_ns = round(wire_bits / spec.rate_bps * NS_PER_S)
    start_ns = round(spec.start_s * NS_PER_S)
    stop_ns = round(spec.stop_s * NS_PER_S)
    return [
        (t, payload_bytes)
        for t in (start_ns + i * interval_ns for i in range(count))
        if t < stop_ns
    ]


@dataclass
class WebPlan:
    """Per-object packet counts and the rate draw stream for one site visit."""

    object_packets: list[int]
    rate_min_bps: float
    rate_max_bps: float
    rng: random.Random

    def draw_rate(self) -> float:
        return self.rng.uniform(self.rate_min_bps, self.rate_max_bps)


def web_plan(spec: WebSpec, payload_bytes: int, seed: int) -> WebPlan:
    """Sequential-object download plan; object rates drawn per object."""
    per_object = packet_count_for_bytes(spec.site.object_size_bytes, payload_bytes)
    return WebPlan(
        object_packets=[per_object] * spec.site.object_count,
        rate_min_bps=spec.rate_min_bps,
        rate_max_bps=spec.rate_max_bps,
        rng=random.Random(f"{seed}/web/{spec.site.name}"),
    )
