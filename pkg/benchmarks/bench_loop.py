"""Compare the plain-Python event loop against the compiled twin.

Runs the same saturated two-path scenario through both kernels and reports
wall time, packets simulated per second, and the speedup ratio.

Usage:  python3 benchmarks/bench_loop.py [--duration SECONDS] [--repeat N]
"""

from __future__ import annotations

import argparse
import statistics
import time

from mpsched import engine
from mpsched import _loop
from mpsched.scenario import from_dict

try:
    from mpsched import _loop_c
except ImportError:
    _loop_c = None


def scenario(duration_s: float):
    return from_dict(
        {
            "duration_s": duration_s,
            "seed": 1,
            "scheduler": "qaware",
            "send_window_pkts": 256,
            "paths": [
                {"label": "wlan0", "rate_mbps": 6.0, "delay_ms": 10.0},
                {"label": "wlan1", "rate_mbps": 6.0, "delay_ms": 10.0},
            ],
            "workloads": [
                {"kind": "cbr", "rate_mbps": 12.0, "duration_s": duration_s}
            ],
        }
    )


def bench(kernel, cfg, repeat: int) -> tuple[float, int]:
    engine._kernel = kernel
    times = []
    packets = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        raw = engine.simulate_raw(cfg)
        times.append(time.perf_counter() - t0)
        packets = raw["generated"]
    return statistics.median(times), packets


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration", type=float, default=30.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cfg = scenario(args.duration)
    original = engine._kernel
    try:
        rows = []
        for name, kernel in (("pure", _loop), ("compiled", _loop_c)):
            if kernel is None:
                print(f"{name:>9}: not available (extension not built)")
                continue
            wall, packets = bench(kernel, cfg, args.repeat)
            rows.append((name, wall, packets))
            print(
                f"{name:>9}: {wall * 1e3:8.1f} ms  "
                f"({packets} packets, {packets / wall:,.0f} packets/s)"
            )
        if len(rows) == 2:
            print(f"  speedup: {rows[0][1] / rows[1][1]:.2f}x")
    finally:
        engine._kernel = original


if __name__ == "__main__":
    main()
