"""Config parsing, serialization, sweeps, plots and the CLI."""

import filecmp
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import tripodsim as ts
from tripodsim.errors import ConfigError
from tripodsim.shell import parse_config, render_config, run_sweep, write_outputs
from tripodsim.shell.cli import main as cli_main
from tripodsim.shell.sweep import SweepSpec, apply_parameter
from tests.conftest import mini_storage, mini_transparency

MINIMAL_CONFIG = """
# reference storage setup
gamma_ab = 1.0
gamma_ac = 1.0
gamma_ad = 1.0
delta1 = 0.0
delta2 = 0.0
delta3 = 0.0
alpha = 4000.0
signal.kind = sine-square
signal.amplitude = 0.025
signal.t_start = 5.0
signal.t_end = 44.7
control2.kind = tanh-switch
control2.amplitude = 5.0
control2.t_start = -inf
control2.t_end = 54.7
control2.rise = 2.0
control3.kind = tanh-switch
control3.amplitude = 5.0
control3.t_start = -inf
control3.t_end = 54.7
control3.rise = 2.0
grid.n_xi = 300
grid.d_tau = 0.005
grid.t_final = 360.0
"""


class TestParseConfig:
    def test_minimal_config(self):
        scenario = parse_config(MINIMAL_CONFIG)
        assert scenario.control2[0].amplitude == 5.0
        assert scenario.control3[0].amplitude == 5.0
        assert scenario.signal.amplitude == 0.025
        assert scenario.coupling_alpha == 4000.0
        assert scenario.magnetic is None

    def test_empty_text_lists_every_missing_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("")
        message = str(err.value)
        from tripodsim.shell.config import REQUIRED_KEYS

        for key in REQUIRED_KEYS:
            assert key in message

    def test_unknown_key_names_line(self):
        text = MINIMAL_CONFIG + "\nbogus_knob = 1.0\n"
        line_no = len(text.strip().splitlines()) + 1  # leading blank line
        with pytest.raises(ConfigError, match="unknown key 'bogus_knob'"):
            parse_config(text)

    def test_malformed_number_names_key_and_line(self):
        text = MINIMAL_CONFIG.replace("alpha = 4000.0", "alpha = fast")
        with pytest.raises(ConfigError, match="malformed number for 'alpha'"):
            parse_config(text)

    def test_negative_d_tau_names_key(self):
        text = MINIMAL_CONFIG.replace("grid.d_tau = 0.005", "grid.d_tau = -1")
        with pytest.raises(ConfigError, match="grid.d_tau"):
            parse_config(text)

    def test_duplicate_key_rejected(self):
        text = MINIMAL_CONFIG + "\nalpha = 10.0\n"
        with pytest.raises(ConfigError, match="duplicate key 'alpha'"):
            parse_config(text)

    def test_partial_magnetic_keys_rejected(self):
        text = MINIMAL_CONFIG + "\nmagnetic.b_tesla = 1e-5\n"
        with pytest.raises(ConfigError, match="magnetic"):
            parse_config(text)

    def test_partial_zeeman_level_rejected(self):
        text = MINIMAL_CONFIG + "\nzeeman.b.f = 2.0\n"
        with pytest.raises(ConfigError, match="zeeman.b"):
            parse_config(text)

    @pytest.mark.parametrize(
        "build",
        [
            lambda: ts.storage_scenario(magnetic_area=math.pi / 2, snapshot_times=(170.0, 300.0)),
            lambda: ts.storage_scenario(b_field_tesla=0.0),
            lambda: ts.delayed_release_scenario(3.6),
            lambda: ts.transparency_scenario(),
            lambda: mini_storage(magnetic_area=1.0),
        ],
    )
    def test_render_parse_round_trip(self, build):
        scenario = build()
        assert parse_config(render_config(scenario)) == scenario


class TestWriteOutputs:
    @pytest.fixture(scope="class")
    def record(self):
        return ts.run_simulation(mini_transparency(t_final=40.0, n_xi=60,
                                                   snapshot_times=(10.0, 20.0)))

    def test_boundary_row_count(self, record, tmp_path):
        paths = write_outputs(record, tmp_path)
        lines = paths["boundary"].read_text().strip().splitlines()
        assert lines[0] == "tau_invGamma,re_omega1,im_omega1,abs_omega1"
        assert len(lines) - 1 == record.grid.n_tau + 1

    def test_snapshot_line_count_and_schema(self, record, tmp_path):
        paths = write_outputs(record, tmp_path)
        lines = paths["snapshots"].read_text().strip().splitlines()
        assert len(lines) == len(record.snapshots)
        frame = json.loads(lines[0])
        for key in ("tau", "xi", "pop_a", "pop_b", "pop_c", "pop_d",
                    "re_coh_ab", "im_coh_ab", "re_coh_bc", "im_coh_bc",
                    "re_coh_cd", "im_coh_cd", "re_psi", "im_psi", "re_z", "im_z"):
            assert key in frame
        assert len(frame["xi"]) == record.scenario.grid.n_xi

    def test_metrics_payload(self, record, tmp_path):
        paths = write_outputs(record, tmp_path)
        payload = json.loads(paths["metrics"].read_text())
        assert payload["metrics"]["transmitted_peak"] > 0.0
        assert payload["metrics"]["released_peak"] is None  # no storage stage
        assert payload["scenario"]["alpha"] == record.scenario.coupling_alpha
        assert payload["grid"]["n_tau"] == record.grid.n_tau

    def test_rerun_is_byte_identical(self, tmp_path):
        scenario = mini_transparency(t_final=30.0, n_xi=50)
        write_outputs(ts.run_simulation(scenario), tmp_path / "a")
        write_outputs(ts.run_simulation(scenario), tmp_path / "b")
        for name in ("boundary.csv", "snapshots.ndjson", "metrics.json"):
            assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)

    def test_roundtrip_readable_by_plotter(self, record, tmp_path):
        from tripodsim.shell.plots import render_plot

        paths = write_outputs(record, tmp_path)
        svg = render_plot(paths["boundary"])
        assert svg.read_text()[:200].lstrip().startswith("<?xml")
        assert "<svg" in svg.read_text()[:500]


class TestSweep:
    @pytest.fixture(scope="class")
    def base(self):
        return mini_storage(magnetic_area=math.pi, t_final=180.0, n_xi=120)

    def test_delta_sweep_rows_and_laws(self, base, tmp_path):
        spec = SweepSpec(
            parameter="delta",
            values=(0.0, math.pi),
            base_scenario=base,
            outputs_dir=tmp_path,
        )
        summary, records = run_sweep(spec)
        assert len(summary.rows) == 2
        by_value = {row.value: row for row in summary.rows}
        assert by_value[0.0].released_peak_ratio == pytest.approx(1.0, abs=1e-9)
        assert by_value[math.pi].released_peak_ratio == pytest.approx(0.0, abs=0.02)
        assert by_value[math.pi].z_peak_ratio == pytest.approx(1.0)
        assert by_value[0.0].predicted_ratio == pytest.approx(1.0)
        assert (tmp_path / "summary.csv").exists()
        assert (tmp_path / "baseline" / "metrics.json").exists()
        assert (tmp_path / f"delta_{math.pi:.6g}" / "boundary.csv").exists()

    def test_sequential_matches_parallel(self, base, tmp_path):
        spec_seq = SweepSpec("delta", (0.0, 2.0), base, tmp_path / "seq")
        spec_par = SweepSpec("delta", (0.0, 2.0), base, tmp_path / "par")
        run_sweep(spec_seq, max_workers=1)
        run_sweep(spec_par, max_workers=2)
        assert filecmp.cmp(tmp_path / "seq" / "summary.csv",
                           tmp_path / "par" / "summary.csv", shallow=False)

    def test_apply_parameter_variants(self, base):
        with_field = apply_parameter(base, "b_field", 2.0e-5)
        assert with_field.magnetic.b_field_tesla == 2.0e-5
        delayed = apply_parameter(base, "control3_lead", 1.0)
        lead = ts.convert_units(base.units, 1.0, "us", "1/Gamma")
        assert delayed.control3[-1].t_start == pytest.approx(
            base.control2[-1].t_start - lead
        )

    def test_values_validated(self, base):
        with pytest.raises(Exception):
            SweepSpec("delta", (), base)
        with pytest.raises(Exception):
            SweepSpec("detuning", (1.0,), base)


class TestCli:
    @pytest.fixture(scope="class")
    def config_path(self, tmp_path_factory):
        path = tmp_path_factory.mktemp("cfg") / "mini.cfg"
        path.write_text(render_config(mini_storage(magnetic_area=math.pi / 2,
                                                   t_final=180.0, n_xi=120)))
        return path

    def test_run_writes_outputs(self, config_path, tmp_path, capsys):
        code = cli_main(["run", "--config", str(config_path), "--out", str(tmp_path)])
        assert code == 0
        for name in ("boundary.csv", "snapshots.ndjson", "metrics.json"):
            assert (tmp_path / name).exists()
        assert "released_peak" in capsys.readouterr().out

    def test_run_quiet_silences_stdout(self, config_path, tmp_path, capsys):
        code = cli_main(["run", "--config", str(config_path),
                         "--out", str(tmp_path / "q"), "--quiet"])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_missing_config_is_one_line_error(self, tmp_path, capsys):
        code = cli_main(["run", "--config", str(tmp_path / "nope.cfg"),
                         "--out", str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("tripodsim:")
        assert len(err.strip().splitlines()) == 1

    def test_sweep_summary(self, config_path, tmp_path, capsys):
        code = cli_main([
            "sweep", "--config", str(config_path), "--param", "delta",
            "--values", "0,3.14159", "--out", str(tmp_path / "sweep"), "--quiet",
        ])
        assert code == 0
        summary = (tmp_path / "sweep" / "summary.csv").read_text()
        assert summary.startswith("# parameter = delta")
        assert len(summary.strip().splitlines()) == 4  # comment + header + 2 rows

    def test_check_reports_pass(self, config_path, capsys):
        code = cli_main(["check", "--config", str(config_path), "--refine", "1", "--quiet"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS trace-conservation" in out
        assert "PASS magnetic-dual-route" in out
        assert "PASS grid-convergence" in out

    def test_plot_subcommand(self, config_path, tmp_path):
        out_dir = tmp_path / "plotrun"
        assert cli_main(["run", "--config", str(config_path),
                         "--out", str(out_dir), "--quiet"]) == 0
        assert cli_main(["plot", str(out_dir / "boundary.csv"), "--quiet"]) == 0
        assert (out_dir / "boundary.svg").exists()

    def test_console_entry_point(self):
        result = subprocess.run(
            [sys.executable, "-m", "tripodsim", "--help"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert "run" in result.stdout and "sweep" in result.stdout
