"""Tests for the config parser and the CLI subcommands.

Each subcommand is exercised through run_subcommand into a temp
directory; determinism is asserted byte for byte.  Config parsing is
tested value by value against the documented unit conventions.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from jpmsim.cli import main, run_subcommand
from jpmsim.config import RunConfig, SCHEMA, parse_value
from jpmsim.errors import ConfigError
from jpmsim.potential import DEFAULT_PARAMS, PHI0
from jpmsim.protocol import DEFAULT_DEPLETION_RATE, DEFAULT_IQ_MODEL, ProtocolConfig

SUBCOMMANDS = [
    "potential-sweep",
    "bifurcation",
    "transfer-curves",
    "transfer-peak",
    "budget",
    "ramsey",
    "rabi",
    "stark",
    "depletion",
    "iq",
    "tomo-synth",
    "tomo-fit",
]

ARTIFACTS = {
    "potential-sweep": "potential_sweep.csv",
    "bifurcation": "bifurcation.csv",
    "transfer-curves": "transfer_curves.csv",
    "transfer-peak": "transfer_peak.json",
    "budget": "budget.json",
    "ramsey": "ramsey.csv",
    "rabi": "rabi.csv",
    "stark": "stark.csv",
    "depletion": "depletion.csv",
    "iq": "iq.json",
    "tomo-synth": "tomogram.csv",
    "tomo-fit": "tomo_fit.json",
}

# Fast settings for repeated CLI runs; values stay statistically
# meaningful while keeping the suite quick.
FAST = {
    "budget": ("budget.n_shots=10000",),
    "iq": ("iq.n_shots=20000",),
    "ramsey": ("ramsey.delay_points=21",),
    "rabi": ("rabi.duration_points=21",),
    "potential-sweep": ("potential.flux_points=9",),
}


def run_fast(name, out_dir, extra=()):
    overrides = FAST.get(name, ()) + tuple(extra)
    return run_subcommand(name, overrides=overrides, output_dir=str(out_dir))


def test_unit_parsing_round_trip():
    cfg = RunConfig.from_sources(
        overrides=(
            "protocol.t_prep=780ns",
            "device.critical_current=1uA",
            "device.loop_inductance=1.1nH",
            "device.shunt_capacitance=2pF",
            "source.frequency=5.02GHz",
            "capture.decay_time=40ns",
            "line.impedance=50ohm",
            "potential.flux_start=0.5phi0",
            "protocol.stark_shift_per_photon=-2MHz",
        )
    )
    assert cfg.get("protocol.t_prep") == 780e-9
    assert cfg.get("device.critical_current") == 1e-6
    assert cfg.get("device.loop_inductance") == 1.1e-9
    assert cfg.get("device.shunt_capacitance") == 2e-12
    # Frequencies are written in Hz and stored angular.
    assert cfg.get("source.frequency") == pytest.approx(2.0 * math.pi * 5.02e9, rel=1e-15)
    assert cfg.get("protocol.stark_shift_per_photon") == pytest.approx(
        -2.0 * 2e6 * math.pi, rel=1e-15
    )
    # Decay rates are written as 1/e decay times.
    assert cfg.transfer_config().target.decay_rate == pytest.approx(1.0 / 40e-9, rel=1e-15)
    assert cfg.get("line.impedance") == 50.0
    assert cfg.get("potential.flux_start") == pytest.approx(0.5 * PHI0, rel=1e-15)


def test_config_defaults_match_module_defaults():
    cfg = RunConfig.from_sources()
    assert cfg.protocol_config() == ProtocolConfig()
    assert cfg.iq_model() == DEFAULT_IQ_MODEL
    assert cfg.jpm_params() == DEFAULT_PARAMS
    assert cfg.protocol_config().depletion_rate == DEFAULT_DEPLETION_RATE


def test_optional_none_values():
    cfg = RunConfig.from_sources(overrides=("protocol.depletion_decay_time=none",))
    assert cfg.get("protocol.depletion_decay_time") is None
    assert cfg.protocol_config().depletion_rate == DEFAULT_DEPLETION_RATE
    cfg2 = RunConfig.from_sources(overrides=("protocol.depletion_decay_time=20ns",))
    assert cfg2.protocol_config().depletion_rate == pytest.approx(1.0 / 20e-9, rel=1e-15)


def test_list_values():
    cfg = RunConfig.from_sources(overrides=("stark.powers=0.5,1.5,2.5",))
    assert cfg.get("stark.powers") == [0.5, 1.5, 2.5]
    empty = RunConfig.from_sources(overrides=("stark.powers=",))
    assert empty.get("stark.powers") == []
    freqs = RunConfig.from_sources(overrides=("ramsey.detunings=-1MHz,0Hz,1MHz",))
    assert freqs.get("ramsey.detunings") == pytest.approx(
        [-2e6 * math.pi, 0.0, 2e6 * math.pi], rel=1e-15
    )


def test_config_rejections():
    bad = [
        "protocol.t_prep=780",  # bare number on a dimensioned key
        "protocol.t_prep=780parsec",  # unknown unit
        "protocol.nonsense=1",  # unknown key
        "tomo.beta=0.09ns",  # unit on a dimensionless key
        "budget.n_shots=none",  # none on a required key
        "budget.n_shots=1e4",  # non-integer int
        "output.format=xml",  # not in choices
        "protocol.t_prep",  # no assignment
    ]
    for line in bad:
        with pytest.raises(ConfigError):
            RunConfig.from_sources(overrides=(line,))


def test_config_file_and_precedence(tmp_path):
    doc = tmp_path / "run.cfg"
    doc.write_text(
        "# comment line\n"
        "protocol.t_prep = 500ns  # trailing comment\n"
        "budget.n_shots = 12345\n"
    )
    cfg = RunConfig.from_sources(config_path=str(doc))
    assert cfg.get("protocol.t_prep") == 500e-9
    assert cfg.get("budget.n_shots") == 12345
    # Overrides outrank the file.
    cfg2 = RunConfig.from_sources(config_path=str(doc), overrides=("protocol.t_prep=600ns",))
    assert cfg2.get("protocol.t_prep") == 600e-9
    # Unlisted keys keep their defaults.
    assert cfg.get("protocol.t1") == 6.6e-6


def test_config_file_duplicate_key(tmp_path):
    doc = tmp_path / "dup.cfg"
    doc.write_text("protocol.t_prep = 500ns\nprotocol.t_prep = 600ns\n")
    with pytest.raises(ConfigError) as err:
        RunConfig.from_sources(config_path=str(doc))
    assert "duplicate" in str(err.value)


def test_config_missing_file():
    with pytest.raises(ConfigError):
        RunConfig.from_sources(config_path="/nonexistent/path.cfg")


def test_schema_defaults_all_parse():
    for key, spec in SCHEMA.items():
        parse_value(spec.default, spec, key)


def test_every_subcommand_writes_artifact(tmp_path):
    # tomo-fit consumes the tomogram the tomo-synth step produces.
    synth = tmp_path / "tomo-synth"
    for name in SUBCOMMANDS:
        out = tmp_path / name
        extra = ()
        if name == "tomo-fit":
            extra = (f"tomo.input={synth / 'tomogram.csv'}",)
        code, paths = run_fast(name, out, extra)
        assert code == 0, name
        assert (out / ARTIFACTS[name]).exists(), name
        assert [p.name for p in paths] == [ARTIFACTS[name]]


def test_csv_headers(tmp_path):
    code, paths = run_fast("stark", tmp_path)
    assert code == 0
    lines = (tmp_path / "stark.csv").read_text().splitlines()
    assert lines[0] == "power (1),n_bar (1),qubit_shift (Hz)"
    # Shift column is an ordinary frequency: -2 MHz per photon at ten
    # photons of full-power occupation.
    last = lines[-1].split(",")
    assert float(last[0]) == 1.0
    assert float(last[1]) == 10.0
    assert float(last[2]) == pytest.approx(-2e6 * 10.0, rel=1e-12)


def test_byte_stable_outputs(tmp_path):
    for name in ("potential-sweep", "transfer-peak", "budget", "iq", "tomo-synth"):
        out1 = tmp_path / "a" / name
        out2 = tmp_path / "b" / name
        assert run_fast(name, out1)[0] == 0
        assert run_fast(name, out2)[0] == 0
        b1 = (out1 / ARTIFACTS[name]).read_bytes()
        b2 = (out2 / ARTIFACTS[name]).read_bytes()
        assert b1 == b2, name


def test_budget_report_contents(tmp_path):
    code, _ = run_subcommand(
        "budget", overrides=("budget.n_shots=20000",), output_dir=str(tmp_path)
    )
    assert code == 0
    text = (tmp_path / "budget.json").read_text()
    record = json.loads(text)
    assert record["n_shots"] == 20000
    total = (
        record["F_raw"]
        + record["epsilon_relax"]
        + record["epsilon_dark"]
        + record["epsilon_other"]
    )
    assert total == pytest.approx(1.0, abs=1e-12)
    # Insertion-ordered keys, two-space indent, trailing newline.
    assert text.startswith('{\n  "F_raw":')
    assert text.endswith("\n")


def test_tomo_synth_fit_pipeline(tmp_path):
    synth_dir = tmp_path / "synth"
    code, paths = run_subcommand(
        "tomo-synth",
        overrides=("tomo.n_shots=200000", "tomo.beta=0.09", "tomo.r=0.02"),
        output_dir=str(synth_dir),
    )
    assert code == 0
    fit_dir = tmp_path / "fit"
    code, _ = run_subcommand(
        "tomo-fit",
        overrides=(f"tomo.input={paths[0]}",),
        output_dir=str(fit_dir),
    )
    assert code == 0
    record = json.loads((fit_dir / "tomo_fit.json").read_text())
    assert record["beta"] == pytest.approx(0.09, abs=0.005)
    assert record["r"] == pytest.approx(0.02, abs=0.005)
    assert record["t_pi_s"] == pytest.approx(50e-9, rel=1e-2)
    assert record["rho_11"] == pytest.approx(record["beta"], rel=1e-12)
    assert 0.0 <= record["fidelity_vs_ground"] <= 1.0
    assert not record["projected"]


def test_tomo_fit_noiseless_defaults(tmp_path):
    # Default synthesis is noiseless; the fit must round-trip through
    # the 12-significant-digit CSV encoding.
    code, paths = run_subcommand("tomo-synth", output_dir=str(tmp_path))
    assert code == 0
    code, _ = run_subcommand(
        "tomo-fit", overrides=(f"tomo.input={paths[0]}",), output_dir=str(tmp_path)
    )
    assert code == 0
    record = json.loads((tmp_path / "tomo_fit.json").read_text())
    assert record["beta"] == pytest.approx(0.09, rel=1e-6)
    assert record["r"] == pytest.approx(0.02, rel=1e-6)
    assert record["t_pi_s"] == pytest.approx(50e-9, rel=1e-6)
    assert record["residual_rms"] < 1e-9
    assert record["fidelity_vs_ground"] == pytest.approx(0.91, abs=1e-6)


def test_exit_code_config_error(tmp_path, capsys):
    code, paths = run_subcommand(
        "stark", overrides=("protocol.t_prep=780",), output_dir=str(tmp_path)
    )
    assert code == 2 and paths == []
    assert "config error" in capsys.readouterr().err
    code, _ = run_subcommand("stark", overrides=("stark.powers=",), output_dir=str(tmp_path))
    assert code == 2
    code, _ = run_subcommand("stark", config_path="/no/such/file.cfg", output_dir=str(tmp_path))
    assert code == 2


def test_exit_code_numerical_error(tmp_path, capsys):
    # A two-angle tomogram is degenerate: identifiability failure maps
    # to the numerical-error exit code.
    code, paths = run_subcommand(
        "tomo-synth", overrides=("tomo.theta_points=2",), output_dir=str(tmp_path)
    )
    assert code == 0
    code, paths = run_subcommand(
        "tomo-fit", overrides=(f"tomo.input={paths[0]}",), output_dir=str(tmp_path)
    )
    assert code == 3 and paths == []
    assert "numerical error" in capsys.readouterr().err


def test_exit_code_io_error(tmp_path, capsys):
    code, paths = run_subcommand(
        "tomo-fit",
        overrides=("tomo.input=/no/such/tomogram.csv",),
        output_dir=str(tmp_path),
    )
    assert code == 4 and paths == []
    assert "i/o error" in capsys.readouterr().err


def test_output_directory_resolution(tmp_path, monkeypatch):
    env_dir = tmp_path / "from_env"
    cfg_dir = tmp_path / "from_cfg"
    flag_dir = tmp_path / "from_flag"

    monkeypatch.setenv("JPMSIM_OUTPUT_DIR", str(env_dir))
    code, paths = run_subcommand("stark")
    assert code == 0 and paths[0].parent == env_dir

    code, paths = run_subcommand("stark", overrides=(f"output.directory={cfg_dir}",))
    assert code == 0 and paths[0].parent == cfg_dir

    code, paths = run_subcommand(
        "stark", overrides=(f"output.directory={cfg_dir}",), output_dir=str(flag_dir)
    )
    assert code == 0 and paths[0].parent == flag_dir

    monkeypatch.delenv("JPMSIM_OUTPUT_DIR")
    work = tmp_path / "cwd"
    work.mkdir()
    monkeypatch.chdir(work)
    code, paths = run_subcommand("stark")
    assert code == 0 and paths[0].parent.resolve() == work.resolve()


def test_json_table_format(tmp_path):
    code, _ = run_subcommand(
        "stark", overrides=("output.format=json",), output_dir=str(tmp_path)
    )
    assert code == 0
    rows = json.loads((tmp_path / "stark.json").read_text())
    assert isinstance(rows, list) and len(rows) == 10
    assert rows[-1]["power (1)"] == 1.0
    assert rows[-1]["n_bar (1)"] == 10.0


def test_main_entry_point(tmp_path, capsys):
    assert main(["stark", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert f"wrote {tmp_path}" in out
    assert main(["stark", "-s", "protocol.t_prep=780", "-o", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        main(["no-such-command"])
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_main_config_flag(tmp_path):
    doc = tmp_path / "run.cfg"
    doc.write_text("stark.powers = 0.5,1\n")
    assert main(["stark", "-c", str(doc), "-o", str(tmp_path)]) == 0
    lines = (tmp_path / "stark.csv").read_text().splitlines()
    assert len(lines) == 3  # header + two rows


def test_transfer_curves_labels(tmp_path):
    code, _ = run_subcommand("transfer-curves", output_dir=str(tmp_path))
    assert code == 0
    lines = (tmp_path / "transfer_curves.csv").read_text().splitlines()
    labels = {line.rsplit(",", 1)[1] for line in lines[1:]}
    assert "kappa_ratio=1" in labels
    assert "detuning_ratio=0.5" in labels
    # Both families empty is a config error.
    code, _ = run_subcommand(
        "transfer-curves",
        overrides=("transfer.kappa_ratios=", "transfer.detuning_ratios="),
        output_dir=str(tmp_path),
    )
    assert code == 2


def test_potential_sweep_contents(tmp_path):
    code, _ = run_subcommand(
        "potential-sweep",
        overrides=("potential.flux_points=3", "potential.flux_stop=0.5phi0"),
        output_dir=str(tmp_path),
    )
    assert code == 0
    lines = (tmp_path / "potential_sweep.csv").read_text().splitlines()
    assert lines[0].split(",")[0] == "flux (phi0)"
    # Flux 0 is single-welled: the barrier column holds nan and the
    # height column inf.
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] == "1"
    assert first[4] == "nan"
    assert first[5] == "inf"
    # Half flux: two rows (left and right wells) at the same bias.
    half_rows = [line for line in lines[1:] if line.startswith("0.5,")]
    assert len(half_rows) == 2


def test_bifurcation_artifact(tmp_path):
    code, _ = run_subcommand("bifurcation", output_dir=str(tmp_path))
    assert code == 0
    lines = (tmp_path / "bifurcation.csv").read_text().splitlines()
    assert lines[0] == "critical_flux (phi0),minima_below (1),minima_above (1)"
    assert len(lines) == 3
    for line in lines[1:]:
        _, below, above = line.split(",")
        assert abs(int(below) - int(above)) == 1
