"""Tests for the command-line interface: exit codes, outputs, sweeps."""

from __future__ import annotations

import csv
import json

import pytest

from mpsched.cli import main

MINIMAL = """
duration_s = 3.0
seed = 1
scheduler = "qaware"

[[paths]]
rate_mbps = 6.0
delay_ms = 10.0

[[paths]]
rate_mbps = 6.0
delay_ms = 10.0

[[workloads]]
kind = "cbr"
rate_mbps = 5.0
duration_s = 2.0
"""


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "scenario.toml"
    p.write_text(MINIMAL)
    return p


class TestRunCommand:
    def test_run_writes_report_and_traces(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["run", str(config_file), "-o", str(out)])
        assert rc == 0
        assert (out / "report.json").is_file()
        assert (out / "traces.csv").is_file()
        printed = capsys.readouterr().out
        assert "scenario digest:" in printed
        report = json.loads((out / "report.json").read_text())
        assert report["scheduler"] == "qaware"
        assert report["seed"] == 1

    def test_run_accepts_bundled_preset_by_name(self, tmp_path):
        out = tmp_path / "preset_out"
        rc = main(
            [
                "run",
                "cbr_homogeneous_6+6",
                "-o",
                str(out),
                "--seed",
                "3",
                "--format",
                "json",
            ]
        )
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 3
        assert not (out / "traces.csv").exists()

    def test_existing_output_requires_force(self, config_file, tmp_path):
        out = tmp_path / "out"
        assert main(["run", str(config_file), "-o", str(out)]) == 0
        assert main(["run", str(config_file), "-o", str(out)]) == 2
        assert main(["run", str(config_file), "-o", str(out), "--force"]) == 0

    def test_scheduler_override_changes_report(self, config_file, tmp_path):
        out = tmp_path / "ecf"
        rc = main(
            ["run", str(config_file), "-o", str(out), "--scheduler", "ecf"]
        )
        assert rc == 0
        assert json.loads((out / "report.json").read_text())["scheduler"] == "ecf"

    def test_format_csv_writes_only_traces(self, config_file, tmp_path):
        out = tmp_path / "csvonly"
        rc = main(
            ["run", str(config_file), "-o", str(out), "--format", "csv"]
        )
        assert rc == 0
        assert (out / "traces.csv").is_file()
        assert not (out / "report.json").exists()

    def test_invalid_scenario_exits_1_naming_fields(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text(MINIMAL.replace("seed = 1\n", ""))
        rc = main(["run", str(bad), "-o", str(tmp_path / "x")])
        assert rc == 1
        err = capsys.readouterr().err
        assert "invalid scenario" in err
        assert "seed" in err

    def test_unparseable_toml_exits_1(self, tmp_path):
        bad = tmp_path / "broken.toml"
        bad.write_text("[[paths\n")
        assert main(["run", str(bad), "-o", str(tmp_path / "x")]) == 1

    def test_missing_config_exits_2(self, tmp_path, capsys):
        rc = main(["run", str(tmp_path / "ghost.toml"), "-o", str(tmp_path / "x")])
        assert rc == 2
        assert "ghost.toml" in capsys.readouterr().err


class TestSweepCommand:
    def test_sweep_over_rate_builds_grid(self, config_file, tmp_path):
        out = tmp_path / "sweep"
        rc = main(
            [
                "sweep",
                str(config_file),
                "-o",
                str(out),
                "--over",
                "rate_mbps=4,8",
                "--scheduler",
                "qaware",
                "--repeats",
                "2",
            ]
        )
        assert rc == 0
        with (out / "sweep.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert [r["value"] for r in rows] == ["4", "8"]
        assert all(r["scheduler"] == "qaware" for r in rows)
        for rate in ("4", "8"):
            for seed in ("seed1", "seed2"):
                assert (
                    out / f"rate_mbps={rate}" / "qaware" / seed / "report.json"
                ).is_file()

    def test_sweep_csv_header(self, config_file, tmp_path):
        out = tmp_path / "hdr"
        main(
            [
                "sweep",
                str(config_file),
                "-o",
                str(out),
                "--over",
                "rate_mbps=5",
                "--scheduler",
                "minsrtt",
            ]
        )
        first = (out / "sweep.csv").read_text().splitlines()[0]
        assert first == "value,scheduler,metric,mean,stddev"

    def test_sweep_default_compares_three_schedulers(self, config_file, tmp_path):
        out = tmp_path / "multi"
        rc = main(
            ["sweep", str(config_file), "-o", str(out), "--over", "rate_mbps=6"]
        )
        assert rc == 0
        with (out / "sweep.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert {r["scheduler"] for r in rows} == {"qaware", "minsrtt", "ecf"}

    def test_sweep_over_scheduler_uses_values_as_set(self, config_file, tmp_path):
        out = tmp_path / "schedsweep"
        rc = main(
            [
                "sweep",
                str(config_file),
                "-o",
                str(out),
                "--over",
                "scheduler=qaware,daps_lite",
            ]
        )
        assert rc == 0
        with (out / "sweep.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert {r["scheduler"] for r in rows} == {"qaware", "daps_lite"}

    def test_sweep_unknown_field_exits_1(self, config_file, tmp_path, capsys):
        rc = main(
            [
                "sweep",
                str(config_file),
                "-o",
                str(tmp_path / "u"),
                "--over",
                "jitter_ms=1,2",
            ]
        )
        assert rc == 1
        assert "jitter_ms" in capsys.readouterr().err

    def test_file_size_sweep_reports_completion_metric(self, tmp_path):
        cfgtext = MINIMAL.replace(
            'kind = "cbr"\nrate_mbps = 5.0\nduration_s = 2.0',
            'kind = "file"\nsize_mb = 1.0',
        ).replace("duration_s = 3.0", "duration_s = 30.0")
        cfg = tmp_path / "file.toml"
        cfg.write_text(cfgtext)
        out = tmp_path / "fsweep"
        rc = main(
            [
                "sweep",
                str(cfg),
                "-o",
                str(out),
                "--over",
                "size_mb=1,2",
                "--scheduler",
                "qaware",
            ]
        )
        assert rc == 0
        with (out / "sweep.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["metric"] == "completion_time_s"
        t1, t2 = (float(r["mean"]) for r in rows)
        assert 0 < t1 < t2
