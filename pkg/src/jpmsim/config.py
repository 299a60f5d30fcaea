"""Flat key/value run configuration with mandatory unit suffixes.

A config document is a sequence of "section.key = value" lines; "#"
starts a comment.  Every dimensioned value carries a unit suffix
("780ns", "1uA", "50ohm") and bare numbers are rejected for such keys,
so a GHz/rad-per-second mixup cannot slip through the boundary.
Frequencies are written as ordinary (cycles/second) frequencies and
converted to angular internally; decay rates are written as 1/e decay
times ("capture.decay_time = 40ns").  Unknown and duplicated keys are
rejected.  The literal "none" clears an optional key.

One global schema defines every key, its kind, and its default, so a
missing config file or a partial one behaves identically to a fully
written-out document.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal, localcontext

from .errors import ConfigError
from .potential import PHI0, FluxBias, JpmParams
from .protocol import DEFAULT_DEPLETION_RATE, IqModel, ProtocolConfig
from .transfer import CavityMode, TransferConfig

_UNIT_TABLES = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "freq": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "current": {"A": 1.0, "mA": 1e-3, "uA": 1e-6, "nA": 1e-9},
    "inductance": {"H": 1.0, "mH": 1e-3, "uH": 1e-6, "nH": 1e-9, "pH": 1e-12},
    "capacitance": {"F": 1.0, "uF": 1e-6, "nF": 1e-9, "pF": 1e-12, "fF": 1e-15},
    "impedance": {"ohm": 1.0, "Ohm": 1.0, "kohm": 1e3},
    "voltage": {"V": 1.0, "mV": 1e-3, "uV": 1e-6},
    "flux": {"Wb": 1.0, "phi0": PHI0, "Phi0": PHI0},
}
# Angular frequencies share the ordinary-frequency unit table and pick
# up the 2 pi internally.
_UNIT_TABLES["afreq"] = _UNIT_TABLES["freq"]

_NUMBER_RE = re.compile(r"([+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)\s*(\S*)")


@dataclass(frozen=True)
class ValueSpec:
    """Schema entry: value kind, default (in config syntax), options."""

    kind: str
    default: str
    optional: bool = False
    choices: tuple[str, ...] | None = None


SCHEMA: dict[str, ValueSpec] = {
    "seed": ValueSpec("int", "12345"),
    "device.critical_current": ValueSpec("current", "1uA"),
    "device.loop_inductance": ValueSpec("inductance", "1.1nH"),
    "device.shunt_capacitance": ValueSpec("capacitance", "2pF"),
    "device.mutual_inductance": ValueSpec("inductance", "1pH"),
    "source.frequency": ValueSpec("afreq", "5.02GHz"),
    "source.decay_time": ValueSpec("time", "260ns"),
    "capture.frequency": ValueSpec("afreq", "5.02GHz"),
    "capture.decay_time": ValueSpec("time", "40ns"),
    "line.impedance": ValueSpec("impedance", "50ohm"),
    "line.drive_amplitude": ValueSpec("voltage", "1V"),
    "protocol.t_prep": ValueSpec("time", "780ns"),
    "protocol.window": ValueSpec("str", "hamming", choices=("hamming", "rectangular")),
    "protocol.t1": ValueSpec("time", "6.6us"),
    "protocol.dark_prob": ValueSpec("float", "0.02"),
    "protocol.bright_detect_prob": ValueSpec("float", "0.99"),
    "protocol.stark_shift_per_photon": ValueSpec("afreq", "-2MHz"),
    "protocol.n_bar_qubit_cavity": ValueSpec("float", "10"),
    "protocol.depletion_decay_time": ValueSpec("time", "none", optional=True),
    "protocol.depletion_time": ValueSpec("time", "40ns"),
    "protocol.cycle_time": ValueSpec("time", "2.8us"),
    "protocol.relaxation_override": ValueSpec("float", "0.05", optional=True),
    "iq.sigma": ValueSpec("float", "0.14144271570014144"),
    "iq.n_samples": ValueSpec("int", "1"),
    "iq.centroid_0": ValueSpec("list:float", "0,0"),
    "iq.centroid_1": ValueSpec("list:float", "1,0"),
    "iq.n_shots": ValueSpec("int", "100000"),
    "output.directory": ValueSpec("str", "none", optional=True),
    "output.format": ValueSpec("str", "csv", choices=("csv", "json")),
    "potential.flux_start": ValueSpec("flux", "0phi0"),
    "potential.flux_stop": ValueSpec("flux", "1phi0"),
    "potential.flux_points": ValueSpec("int", "25"),
    "transfer.t_max_scaled": ValueSpec("float", "8"),
    "transfer.time_points": ValueSpec("int", "400"),
    "transfer.kappa_ratios": ValueSpec("list:float", "1,2,5,10"),
    "transfer.detuning_ratios": ValueSpec("list:float", "0,0.5,1,2,4"),
    "budget.n_shots": ValueSpec("int", "100000"),
    "ramsey.detunings": ValueSpec("list:afreq", "-2MHz,-1MHz,0Hz,1MHz,2MHz"),
    "ramsey.delay_stop": ValueSpec("time", "2us"),
    "ramsey.delay_points": ValueSpec("int", "81"),
    "ramsey.t2": ValueSpec("time", "none", optional=True),
    "ramsey.amplitude": ValueSpec("float", "1"),
    "ramsey.n_shots": ValueSpec("int", "none", optional=True),
    "rabi.detunings": ValueSpec("list:afreq", "-10MHz,-5MHz,0Hz,5MHz,10MHz"),
    "rabi.duration_stop": ValueSpec("time", "400ns"),
    "rabi.duration_points": ValueSpec("int", "81"),
    "rabi.rate": ValueSpec("afreq", "5MHz"),
    "rabi.n_shots": ValueSpec("int", "none", optional=True),
    "stark.powers": ValueSpec("list:float", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"),
    "depletion.time_stop": ValueSpec("time", "100ns"),
    "depletion.time_points": ValueSpec("int", "51"),
    "tomo.beta": ValueSpec("float", "0.09"),
    "tomo.r": ValueSpec("float", "0.02"),
    "tomo.phi": ValueSpec("float", "0"),
    "tomo.t_pi": ValueSpec("time", "50ns"),
    "tomo.theta_points": ValueSpec("int", "8"),
    "tomo.duration_points": ValueSpec("int", "33"),
    "tomo.duration_stop": ValueSpec("time", "none", optional=True),
    "tomo.n_shots": ValueSpec("int", "none", optional=True),
    "tomo.noise_sigma": ValueSpec("float", "none", optional=True),
    "tomo.input": ValueSpec("str", "none", optional=True),
}


def _parse_scalar(text: str, kind: str, key: str, choices: tuple[str, ...] | None):
    if kind == "str":
        if choices is not None and text not in choices:
            raise ConfigError(f"{key}: expected one of {', '.join(choices)}, got {text!r}")
        return text
    if kind == "bool":
        if text in ("true", "false"):
            return text == "true"
        raise ConfigError(f"{key}: expected true or false, got {text!r}")
    if kind == "int":
        if re.fullmatch(r"[+-]?[0-9]+", text):
            return int(text)
        raise ConfigError(f"{key}: expected an integer, got {text!r}")

    match = _NUMBER_RE.fullmatch(text.strip())
    if not match:
        raise ConfigError(f"{key}: cannot parse value {text!r}")
    number = match.group(1)
    unit = match.group(2)

    if kind == "float":
        if unit:
            raise ConfigError(f"{key}: dimensionless value must not carry a unit, got {text!r}")
        return float(number)

    table = _UNIT_TABLES.get(kind)
    if table is None:
        raise ConfigError(f"{key}: unknown value kind {kind!r}")
    if not unit:
        raise ConfigError(f"{key}: unit suffix is mandatory (one of {', '.join(table)})")
    if unit not in table:
        raise ConfigError(f"{key}: unknown unit {unit!r} (expected one of {', '.join(table)})")
    factors = [table[unit]]
    if kind == "afreq":
        factors.append(2.0 * math.pi)
    return _scaled(number, factors)


def _scaled(number: str, factors: list[float]) -> float:
    # Scale in decimal so "6.6us" equals the literal 6.6e-6 bit for bit;
    # naive float multiplication by 1e-6 rounds twice and can be off by
    # one ulp from the value a dataclass default spells out directly.
    with localcontext() as ctx:
        ctx.prec = 60
        product = Decimal(number)
        for factor in factors:
            product *= Decimal(repr(factor))
        return float(product)


def parse_value(text: str, spec: ValueSpec, key: str):
    """Parse one config value according to its schema entry."""
    text = text.strip()
    if text == "none":
        if spec.optional:
            return None
        raise ConfigError(f"{key}: none is not allowed here")
    if spec.kind.startswith("list:"):
        inner = spec.kind.split(":", 1)[1]
        if text == "":
            return []
        return [_parse_scalar(part.strip(), inner, key, None) for part in text.split(",")]
    if text == "":
        raise ConfigError(f"{key}: empty value")
    return _parse_scalar(text, spec.kind, key, spec.choices)


def _parse_lines(lines, origin: str, seen: set[str], values: dict) -> None:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        values[key] = parse_value(text, SCHEMA[key], key)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one CLI invocation."""

    values: dict

    @classmethod
    def from_sources(cls, config_path: str | None = None, overrides=()) -> "RunConfig":
        """Resolve defaults, then a config file, then override strings.

        Overrides use the same "key=value" syntax as file lines and are
        applied last; within each source a key may appear only once.
        """
        values = {key: parse_value(spec.default, spec, key) for key, spec in SCHEMA.items()}
        if config_path is not None:
            try:
                with open(config_path, encoding="utf-8") as fh:
                    lines = fh.readlines()
            except OSError as exc:
                raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
            _parse_lines(lines, str(config_path), set(), values)
        _parse_lines(overrides, "override", set(), values)
        return cls(values)

    def get(self, key: str):
        if key not in SCHEMA:
            raise KeyError(f"unknown config key {key!r}")
        return self.values[key]

    def jpm_params(self) -> JpmParams:
        try:
            return JpmParams(
                critical_current=self.get("device.critical_current"),
                loop_inductance=self.get("device.loop_inductance"),
                shunt_capacitance=self.get("device.shunt_capacitance"),
                mutual_inductance=self.get("device.mutual_inductance"),
            )
        except ValueError as exc:
            raise ConfigError(f"device section invalid: {exc}") from exc

    def flux_bias(self, webers: float) -> FluxBias:
        return FluxBias(external_flux=webers)

    def transfer_config(self) -> TransferConfig:
        try:
            return TransferConfig(
                source=CavityMode(
                    angular_frequency=self.get("source.frequency"),
                    decay_rate=1.0 / self.get("source.decay_time"),
                ),
                target=CavityMode(
                    angular_frequency=self.get("capture.frequency"),
                    decay_rate=1.0 / self.get("capture.decay_time"),
                ),
                line_impedance=self.get("line.impedance"),
                drive_amplitude=self.get("line.drive_amplitude"),
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cavity sections invalid: {exc}") from exc

    def protocol_config(self) -> ProtocolConfig:
        decay_time = self.get("protocol.depletion_decay_time")
        depletion_rate = DEFAULT_DEPLETION_RATE if decay_time is None else 1.0 / decay_time
        try:
            return ProtocolConfig(
                t_prep=self.get("protocol.t_prep"),
                window=self.get("protocol.window"),
                t1=self.get("protocol.t1"),
                dark_prob=self.get("protocol.dark_prob"),
                bright_detect_prob=self.get("protocol.bright_detect_prob"),
                stark_shift_per_photon=self.get("protocol.stark_shift_per_photon"),
                n_bar_qubit_cavity=self.get("protocol.n_bar_qubit_cavity"),
                depletion_rate=depletion_rate,
                depletion_time=self.get("protocol.depletion_time"),
                cycle_time=self.get("protocol.cycle_time"),
                rng_seed=self.get("seed"),
                relaxation_override=self.get("protocol.relaxation_override"),
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"protocol section invalid: {exc}") from exc

    def iq_model(self) -> IqModel:
        for key in ("iq.centroid_0", "iq.centroid_1"):
            if len(self.get(key)) != 2:
                raise ConfigError(f"{key} must have exactly two components")
        try:
            return IqModel(
                centroid_0=tuple(self.get("iq.centroid_0")),
                centroid_1=tuple(self.get("iq.centroid_1")),
                sigma=self.get("iq.sigma"),
                n_samples=self.get("iq.n_samples"),
            )
        except ValueError as exc:
            raise ConfigError(f"iq section invalid: {exc}") from exc
