"""Scenario configuration: schema, TOML loading, and validation.

A scenario is a plain key-value tree with units spelled in key names
(`rate_mbps`, `delay_ms`) so preset files diff cleanly. Validation is
field-by-field and collects every problem instead of stopping at the first.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import DEFAULT_OVERHEAD_BYTES, DEFAULT_PAYLOAD_BYTES, PathConfig
from .schedulers import PolicyKind
from .workloads import (
    CbrSpec,
    FileSpec,
    UdpBurstSpec,
    WebSpec,
    WorkloadSpec,
    load_websites,
)

ESTIMATOR_MODES = ("direct", "rtt_minus_wait")

_TOP_KEYS = {
    "duration_s",
    "seed",
    "scheduler",
    "estimator_mode",
    "trace_window_ms",
    "packet_payload_bytes",
    "packet_overhead_bytes",
    "send_buffer_pkts",
    "send_window_pkts",
    "paths",
    "workloads",
}

_PATH_KEYS = {"label", "rate_mbps", "delay_ms", "loss_rate", "queue_capacity_pkts"}

_WORKLOAD_KEYS = {
    "cbr": {"kind", "rate_mbps", "duration_s"},
    "file": {"kind", "size_mb"},
    "web": {"kind", "site", "rate_min_mbps", "rate_max_mbps"},
    "udp": {"kind", "path", "rate_mbps", "start_s", "stop_s"},
}


class ScenarioError(ValueError):
    """Raised when a scenario fails validation; carries all field errors."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ScenarioConfig:
    """Resolved description of one simulation run."""

    paths: list[PathConfig]
    workloads: list[WorkloadSpec]
    duration_s: float
    seed: int
    scheduler: PolicyKind = PolicyKind.QAWARE
    estimator_mode: str = "direct"
    trace_window_s: float = 0.1
    packet_payload_bytes: int = DEFAULT_PAYLOAD_BYTES
    packet_overhead_bytes: int = DEFAULT_OVERHEAD_BYTES
    send_buffer_pkts: int = 5000
    # Cap on unacknowledged packets across all subflows; 0 disables the cap.
    # Models the connection-level send window a finite receive buffer imposes.
    send_window_pkts: int = 0
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def validate(self) -> list[str]:
        errors: list[str] = []
        if not self.paths:
            errors.append("paths: at least one path is required")
        for i, p in enumerate(self.paths):
            errors.extend(f"paths[{i}].{e}" for e in p.validate())
        if self.duration_s <= 0:
            errors.append(f"duration_s: must be positive, got {self.duration_s}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            errors.append("seed: must be an integer")
        elif not 0 <= self.seed < 2**64:
            errors.append(f"seed: must fit in 64 bits, got {self.seed}")
        if self.estimator_mode not in ESTIMATOR_MODES:
            errors.append(
                f"estimator_mode: expected one of {ESTIMATOR_MODES}, "
                f"got {self.estimator_mode!r}"
            )
        if self.trace_window_s <= 0:
            errors.append(
                f"trace_window_s: must be positive, got {self.trace_window_s}"
            )
        if self.packet_payload_bytes <= 0:
            errors.append("packet_payload_bytes: must be positive")
        if self.packet_overhead_bytes < 0:
            errors.append("packet_overhead_bytes: must be non-negative")
        if self.send_buffer_pkts <= 0:
            errors.append("send_buffer_pkts: must be positive")
        if self.send_window_pkts < 0:
            errors.append("send_window_pkts: must be non-negative (0 = unlimited)")
        if not self.workloads:
            errors.append("workloads: at least one workload is required")
        for i, w in enumerate(self.workloads):
            errors.extend(f"workloads[{i}].{e}" for e in _validate_workload(w, self))
        if self.scheduler == PolicyKind.DAPS_LITE and len(self.paths) != 2:
            errors.append("scheduler: daps_lite requires exactly two paths")
        return errors

    def digest(self) -> str:
        """Stable hash of the resolved configuration."""
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def resolved(self) -> dict:
        """Canonical plain-data form with every default filled in."""
        return {
            "duration_s": self.duration_s,
            "seed": self.seed,
            "scheduler": self.scheduler.value,
            "estimator_mode": self.estimator_mode,
            "trace_window_s": self.trace_window_s,
            "packet_payload_bytes": self.packet_payload_bytes,
            "packet_overhead_bytes": self.packet_overhead_bytes,
            "send_buffer_pkts": self.send_buffer_pkts,
            "send_window_pkts": self.send_window_pkts,
            "paths": [
                {
                    "label": p.label,
                    "rate_bps": p.link_rate_bps,
                    "delay_s": p.prop_delay_s,
                    "loss_rate": p.loss_rate,
                    "queue_capacity_pkts": p.queue_capacity,
                }
                for p in self.paths
            ],
            "workloads": [_workload_resolved(w) for w in self.workloads],
        }


def _validate_workload(w: WorkloadSpec, cfg: ScenarioConfig) -> list[str]:
    errors = []
    if isinstance(w, CbrSpec):
        if w.rate_bps <= 0:
            errors.append(f"rate_mbps: must be positive, got {w.rate_bps / 1e6}")
        if w.duration_s <= 0:
            errors.append(f"duration_s: must be positive, got {w.duration_s}")
    elif isinstance(w, FileSpec):
        if w.size_bytes <= 0:
            errors.append(f"size_mb: must be positive, got {w.size_bytes / 1e6}")
    elif isinstance(w, WebSpec):
        if w.rate_min_bps <= 0 or w.rate_max_bps < w.rate_min_bps:
            errors.append(
                "rate range: need 0 < rate_min_mbps <= rate_max_mbps, got "
                f"[{w.rate_min_bps / 1e6}, {w.rate_max_bps / 1e6}]"
            )
    elif isinstance(w, UdpBurstSpec):
        if not 0 <= w.path_id < len(cfg.paths):
            errors.append(f"path: no path with index {w.path_id}")
        if w.rate_bps <= 0:
            errors.append(f"rate_mbps: must be positive, got {w.rate_bps / 1e6}")
        if not w.start_s < w.stop_s:
            errors.append(f"start_s/stop_s: need start < stop, got [{w.start_s}, {w.stop_s}]")
    else:
        errors.append(f"kind: unrecognized workload {type(w).__name__}")
    return errors


def _workload_resolved(w: WorkloadSpec) -> dict:
    if isinstance(w, CbrSpec):
        return {"kind": "cbr", "rate_bps": w.rate_bps, "duration_s": w.duration_s}
    if isinstance(w, FileSpec):
        return {"kind": "file", "size_bytes": w.size_bytes}
    if isinstance(w, WebSpec):
        return {
            "kind": "web",
            "site": w.site.name,
            "rate_min_bps": w.rate_min_bps,
            "rate_max_bps": w.rate_max_bps,
        }
    if isinstance(w, UdpBurstSpec):
        return {
            "kind": "udp",
            "path": w.path_id,
            "rate_bps": w.rate_bps,
            "start_s": w.start_s,
            "stop_s": w.stop_s,
        }
    raise TypeError(f"unrecognized workload {type(w).__name__}")


def _num(d: dict, key: str, errors: list, where: str, *, default=None, minimum=None):
    if key not in d:
        if default is None:
            errors.append(f"{where}{key}: required field is missing")
            return None
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{where}{key}: expected a number, got {v!r}")
        return None
    if minimum is not None and v < minimum:
        errors.append(f"{where}{key}: must be >= {minimum}, got {v}")
        return None
    return v


def _check_unknown(d: dict, allowed: set, errors: list, where: str) -> None:
    for k in sorted(set(d) - allowed):
        errors.append(f"{where}{k}: unknown field")


def _parse_path(d: dict, i: int, errors: list) -> Optional[PathConfig]:
    where = f"paths[{i}]."
    if not isinstance(d, dict):
        errors.append(f"paths[{i}]: expected a table, got {d!r}")
        return None
    _check_unknown(d, _PATH_KEYS, errors, where)
    rate = _num(d, "rate_mbps", errors, where)
    delay = _num(d, "delay_ms", errors, where, minimum=0)
    loss = _num(d, "loss_rate", errors, where, default=0.0, minimum=0)
    qcap = _num(d, "queue_capacity_pkts", errors, where, default=1000, minimum=1)
    if rate is not None and rate <= 0:
        errors.append(f"{where}rate_mbps: must be > 0, got {rate}")
        rate = None
    if loss is not None and loss > 1:
        errors.append(f"{where}loss_rate: must be in [0, 1], got {loss}")
        loss = None
    if rate is None or delay is None or loss is None or qcap is None:
        return None
    return PathConfig(
        link_rate_bps=float(rate) * 1e6,
        prop_delay_s=float(delay) / 1e3,
        loss_rate=float(loss),
        queue_capacity=int(qcap),
        label=str(d.get("label", f"path{i}")),
    )


def _parse_workload(d: dict, i: int, errors: list, sites: dict) -> Optional[WorkloadSpec]:
    where = f"workloads[{i}]."
    if not isinstance(d, dict):
        errors.append(f"workloads[{i}]: expected a table, got {d!r}")
        return None
    kind = d.get("kind")
    if kind not in _WORKLOAD_KEYS:
        errors.append(
            f"{where}kind: expected one of {sorted(_WORKLOAD_KEYS)}, got {kind!r}"
        )
        return None
    _check_unknown(d, _WORKLOAD_KEYS[kind], errors, where)
    if kind == "cbr":
        rate = _num(d, "rate_mbps", errors, where)
        dur = _num(d, "duration_s", errors, where)
        if rate is None or dur is None:
            return None
        return CbrSpec(rate_bps=float(rate) * 1e6, duration_s=float(dur))
    if kind == "file":
        size = _num(d, "size_mb", errors, where)
        if size is None:
            return None
        return FileSpec(size_bytes=round(float(size) * 1e6))
    if kind == "web":
        name = d.get("site")
        lo = _num(d, "rate_min_mbps", errors, where)
        hi = _num(d, "rate_max_mbps", errors, where)
        if not isinstance(name, str) or name not in sites:
            errors.append(
                f"{where}site: expected one of {sorted(sites)}, got {name!r}"
            )
            return None
        if lo is None or hi is None:
            return None
        return WebSpec(
            site=sites[name],
            rate_min_bps=float(lo) * 1e6,
            rate_max_bps=float(hi) * 1e6,
        )
    path = _num(d, "path", errors, where)
    rate = _num(d, "rate_mbps", errors, where)
    start = _num(d, "start_s", errors, where)
    stop = _num(d, "stop_s", errors, where)
    if path is None or rate is None or start is None or stop is None:
        return None
    return UdpBurstSpec(
        path_id=int(path),
        rate_bps=float(rate) * 1e6,
        start_s=float(start),
        stop_s=float(stop),
    )


def from_dict(data: dict, *, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed key-value tree.

    `overrides` maps top-level field names (`scheduler`, `seed`) to
    replacement values applied before validation. Raises ScenarioError
    listing every invalid field.
    """
    errors: list[str] = []
    data = dict(data)
    if overrides:
        for k, v in overrides.items():
            if v is not None:
                data[k] = v
    _check_unknown(data, _TOP_KEYS, errors, "")

    sites = load_websites()
    paths = []
    raw_paths = data.get("paths")
    if not isinstance(raw_paths, list) or not raw_paths:
        errors.append("paths: at least one [[paths]] table is required")
    else:
        for i, p in enumerate(raw_paths):
            parsed = _parse_path(p, i, errors)
            if parsed is not None:
                paths.append(parsed)

    workloads = []
    raw_loads = data.get("workloads")
    if not isinstance(raw_loads, list) or not raw_loads:
        errors.append("workloads: at least one [[workloads]] table is required")
    else:
        for i, w in enumerate(raw_loads):
            parsed = _parse_workload(w, i, errors, sites)
            if parsed is not None:
                workloads.append(parsed)

    if "seed" not in data:
        errors.append("seed: required field is missing (no wall-clock default)")
        seed = 0
    else:
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            errors.append(f"seed: must be an integer, got {seed!r}")
            seed = 0

    scheduler = data.get("scheduler", "qaware")
    try:
        policy = PolicyKind(scheduler)
    except ValueError:
        errors.append(
            f"scheduler: expected one of {[k.value for k in PolicyKind]}, "
            f"got {scheduler!r}"
        )
        policy = PolicyKind.QAWARE

    duration = _num(data, "duration_s", errors, "")
    trace_ms = _num(data, "trace_window_ms", errors, "", default=100.0)
    payload = _num(data, "packet_payload_bytes", errors, "", default=DEFAULT_PAYLOAD_BYTES)
    overhead = _num(data, "packet_overhead_bytes", errors, "", default=DEFAULT_OVERHEAD_BYTES)
    sbuf = _num(data, "send_buffer_pkts", errors, "", default=5000)
    swin = _num(data, "send_window_pkts", errors, "", default=0)

    cfg = ScenarioConfig(
        paths=paths,
        workloads=workloads,
        duration_s=float(duration) if duration is not None else 0.0,
        seed=seed if isinstance(seed, int) and not isinstance(seed, bool) else -1,
        scheduler=policy,
        estimator_mode=str(data.get("estimator_mode", "direct")),
        trace_window_s=float(trace_ms) / 1e3 if trace_ms else 0.0,
        packet_payload_bytes=int(payload) if payload else 0,
        packet_overhead_bytes=int(overhead) if overhead is not None else 0,
        send_buffer_pkts=int(sbuf) if sbuf else 0,
        send_window_pkts=int(swin) if swin is not None else 0,
        raw=data,
    )
    errors.extend(cfg.validate())
    if errors:
        raise ScenarioError(sorted(set(errors)))
    return cfg


def from_toml(path: str, *, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Load a scenario from a TOML file. Raises ScenarioError on bad content."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError([f"config parse error: {exc}"]) from exc
    return from_dict(data, overrides=overrides)


def set_sweep_value(data: dict, field_name: str, value: Any) -> dict:
    """Return a copy of the raw config tree with one swept field replaced.

    Accepts a dotted path rooted at the tree (`workloads.0.rate_mbps`,
    `paths.1.loss_rate`), the special top-level name `scheduler` or any
    other top-level key, or a bare key which is applied to every workload
    table that already carries it. Raises KeyError if nothing matches.
    """
    tree = json.loads(json.dumps(data))  # deep copy of plain data
    if "." in field_name:
        parts = field_name.split(".")
        node: Any = tree
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            elif isinstance(node, dict) and p in node:
                node = node[p]
            else:
                raise KeyError(field_name)
        leaf = parts[-1]
        if isinstance(node, list):
            node[int(leaf)] = value
        elif isinstance(node, dict) and leaf in node:
            node[leaf] = value
        else:
            raise KeyError(field_name)
        return tree
    if field_name in _TOP_KEYS - {"paths", "workloads"}:
        tree[field_name] = value
        return tree
    hit = False
    for w in tree.get("workloads", []):
        if isinstance(w, dict) and field_name in w:
            w[field_name] = value
            hit = True
    if not hit:
        raise KeyError(field_name)
    return tree
