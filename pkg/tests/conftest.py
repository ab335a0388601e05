"""Shared fixtures and scenario-building helpers for the test suite."""

from __future__ import annotations

from typing import Any

from mpsched.scenario import ScenarioConfig, from_dict


def make_scenario(
    *,
    paths: list[dict[str, Any]] | None = None,
    workloads: list[dict[str, Any]] | None = None,
    duration_s: float = 10.0,
    seed: int = 1,
    scheduler: str = "qaware",
    **extra: Any,
) -> ScenarioConfig:
    """Build a validated ScenarioConfig from compact keyword arguments.

    Defaults give two identical 6 Mbps / 10 ms paths carrying a 4 Mbps
    constant-bitrate source, which is comfortably underloaded.
    """
    if paths is None:
        paths = [
            {"label": "wlan0", "rate_mbps": 6.0, "delay_ms": 10.0},
            {"label": "wlan1", "rate_mbps": 6.0, "delay_ms": 10.0},
        ]
    if workloads is None:
        workloads = [{"kind": "cbr", "rate_mbps": 4.0, "duration_s": duration_s}]
    data: dict[str, Any] = {
        "duration_s": duration_s,
        "seed": seed,
        "scheduler": scheduler,
        "paths": paths,
        "workloads": workloads,
    }
    data.update(extra)
    return from_dict(data)


def path(
    rate_mbps: float = 6.0,
    delay_ms: float = 10.0,
    *,
    loss_rate: float = 0.0,
    queue_capacity_pkts: int = 1000,
    label: str | None = None,
) -> dict[str, Any]:
    d: dict[str, Any] = {
        "rate_mbps": rate_mbps,
        "delay_ms": delay_ms,
        "loss_rate": loss_rate,
        "queue_capacity_pkts": queue_capacity_pkts,
    }
    if label is not None:
        d["label"] = label
    return d
