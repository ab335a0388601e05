"""Command-line front end: run single scenarios or parameter sweeps.

Exit status: 0 on success, 1 when the config fails validation (every
bad field is listed) or the sweep expression is malformed, 2 on I/O
problems. Output files are append-only; pass --force to overwrite.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .engine import kernel_name, run as run_engine
from .metrics import summarize, write_report_json, write_traces_csv
from .scenario import ScenarioError, from_dict, from_toml, set_sweep_value
from .schedulers import PolicyKind
from .workloads import FileSpec, WebSpec

log = logging.getLogger("mpsched")

DEFAULT_SWEEP_SCHEDULERS = ("qaware", "minsrtt", "ecf")


def list_presets() -> list[str]:
    """Names of the scenario files bundled with the package."""
    from importlib import resources

    root = resources.files("mpsched.presets")
    return sorted(
        p.name.removesuffix(".toml")
        for p in root.iterdir()
        if p.name.endswith(".toml")
    )


def resolve_config(name: str) -> str:
    """Map a config argument to a readable file path.

    An existing file wins; otherwise the name (with or without the .toml
    suffix) is looked up among the bundled presets.
    """
    if os.path.exists(name):
        return name
    from importlib import resources

    base = name.removesuffix(".toml")
    candidate = resources.files("mpsched.presets") / f"{base}.toml"
    if candidate.is_file():
        return str(candidate)
    raise FileNotFoundError(
        f"no config file {name!r}; bundled presets: {', '.join(list_presets())}"
    )


def _configure_logging() -> None:
    level_name = os.environ.get("MPSCHED_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpsched",
        description="Deterministic multipath transport scheduling simulator.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario config file (TOML)")
    common.add_argument("-o", "--out", required=True, help="output directory")
    common.add_argument(
        "--scheduler",
        choices=[k.value for k in PolicyKind],
        help="override the scenario's scheduler",
    )
    common.add_argument("--seed", type=int, help="override the scenario's seed")
    common.add_argument(
        "--format",
        choices=["json", "csv"],
        help="restrict run artifacts to report.json or traces.csv (default both)",
    )
    common.add_argument(
        "--force",
        action="store_true",
        help="overwrite existing output files",
    )

    p_run = sub.add_parser("run", parents=[common], help="run one scenario")

    p_sweep = sub.add_parser(
        "sweep", parents=[common], help="run a scenario over a list of field values"
    )
    p_sweep.add_argument(
        "--over",
        required=True,
        metavar="FIELD=V1,V2,...",
        help="field to sweep and its values, e.g. rate_mbps=4,6,8,10,12",
    )
    p_sweep.add_argument(
        "--repeats",
        type=int,
        default=1,
        metavar="N",
        help="runs per point with seeds seed..seed+N-1 (default 1)",
    )
    return parser


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            continue
    return text


def _check_fresh(paths: list[Path], force: bool) -> None:
    if force:
        return
    stale = [str(p) for p in paths if p.exists()]
    if stale:
        raise FileExistsError(
            f"refusing to overwrite {', '.join(stale)} (pass --force)"
        )


def _write_outputs(report, out_dir: Path, fmt, force: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = []
    if fmt in (None, "json"):
        targets.append((out_dir / "report.json", write_report_json))
    if fmt in (None, "csv"):
        targets.append((out_dir / "traces.csv", write_traces_csv))
    _check_fresh([p for p, _ in targets], force)
    for path, writer in targets:
        writer(report, path)


def _cmd_run(args) -> int:
    overrides = {"scheduler": args.scheduler, "seed": args.seed}
    cfg = from_toml(resolve_config(args.config), overrides=overrides)
    report = run_engine(cfg)
    _write_outputs(report, Path(args.out), args.format, args.force)
    print(f"scenario digest: {report.scenario_digest}")
    print(
        f"{cfg.scheduler.value}: aggregate {report.aggregate_throughput_bps / 1e6:.3f}"
        f" Mbps over {cfg.duration_s:g} s"
        + (
            f", completion {report.completion_time_s:.3f} s"
            if report.completion_time_s is not None
            else ""
        )
    )
    log.info("kernel: %s", kernel_name())
    return 0


def _sweep_points(expr: str):
    field_name, _, rest = expr.partition("=")
    field_name = field_name.strip()
    values = [_parse_value(v.strip()) for v in rest.split(",") if v.strip()]
    if not field_name or not values:
        raise ScenarioError(
            [f"--over: expected FIELD=V1,V2,... with at least one value, got {expr!r}"]
        )
    return field_name, values


def _cmd_sweep(args) -> int:
    with open(resolve_config(args.config), "rb") as fh:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            base = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError([f"config parse error: {exc}"]) from exc

    field_name, values = _sweep_points(args.over)
    if args.repeats < 1:
        raise ScenarioError([f"--repeats: must be >= 1, got {args.repeats}"])

    if field_name == "scheduler":
        points = [(v, (str(v),)) for v in values]
    elif args.scheduler:
        points = [(v, (args.scheduler,)) for v in values]
    else:
        points = [(v, DEFAULT_SWEEP_SCHEDULERS) for v in values]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_csv = out_dir / "sweep.csv"
    _check_fresh([sweep_csv], args.force)

    rows = []
    for value, schedulers in points:
        try:
            tree = set_sweep_value(base, field_name, value)
        except KeyError:
            raise ScenarioError(
                [f"--over: config has no field named {field_name!r}"]
            ) from None
        for sched in schedulers:
            samples = []
            metric = "aggregate_throughput_bps"
            base_seed = args.seed if args.seed is not None else tree.get("seed", 0)
            for rep in range(args.repeats):
                overrides = {"scheduler": sched, "seed": base_seed + rep}
                if field_name == "scheduler":
                    overrides.pop("scheduler")
                cfg = from_dict(tree, overrides=overrides)
                report = run_engine(cfg)
                finite = any(
                    isinstance(w, (FileSpec, WebSpec)) for w in cfg.workloads
                )
                if finite:
                    # NaN marks a transfer that did not finish in time.
                    metric = "completion_time_s"
                    samples.append(
                        report.completion_time_s
                        if report.completion_time_s is not None
                        else float("nan")
                    )
                else:
                    samples.append(report.aggregate_throughput_bps)
                run_dir = out_dir / f"{field_name}={value}" / sched / f"seed{cfg.seed}"
                _write_outputs(report, run_dir, args.format, args.force)
            mean, std = summarize(samples)
            rows.append((value, sched, metric, mean, std))
            print(f"{field_name}={value} {sched}: {metric} mean={mean:.3f} stddev={std:.3f}")

    with open(sweep_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("value,scheduler,metric,mean,stddev\n")
        for value, sched, metric, mean, std in rows:
            fh.write(f"{value},{sched},{metric},{mean:.6f},{std:.6f}\n")
    print(f"wrote {sweep_csv}")
    return 0


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except ScenarioError as exc:
        print("invalid scenario:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return 1
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
