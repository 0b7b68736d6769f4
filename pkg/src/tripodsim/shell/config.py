"""Flat ``key = value`` scenario configuration: parsing and rendering.

Units in the file: rates, detunings and amplitudes in Gamma, times in
1/Gamma, except the magnetic pulse (tesla, microseconds) and ``gamma_mhz``
(Gamma / 2 pi in MHz).  ``#`` starts a comment; unknown keys are an error.
"""

from __future__ import annotations

import math
from typing import Mapping

from ..errors import ConfigError, ScenarioError
from ..model import (
    AtomicSystem,
    GridSpec,
    LevelZeeman,
    MagneticPulse,
    OutputSpec,
    PulseShape,
    Scenario,
    UnitContext,
    convert_units,
    default_unit_context,
    default_zeeman_levels,
    derive_kappa,
)

__all__ = ["parse_config", "render_config", "scenario_to_mapping", "REQUIRED_KEYS"]

REQUIRED_KEYS: tuple[str, ...] = (
    "gamma_ab", "gamma_ac", "gamma_ad",
    "delta1", "delta2", "delta3",
    "alpha",
    "signal.kind", "signal.amplitude", "signal.t_start", "signal.t_end",
    "control2.kind", "control2.amplitude", "control2.t_start", "control2.t_end",
    "control3.kind", "control3.amplitude", "control3.t_start", "control3.t_end",
    "grid.n_xi", "grid.d_tau", "grid.t_final",
)

_PULSE_OPTIONAL = ("rise", "phase")
_CONTROL_EXTRA = ("t_start_2", "t_end_2")
_MAGNETIC_KEYS = ("magnetic.b_tesla", "magnetic.t_start_us", "magnetic.duration_us")
_ZEEMAN_LEVELS = ("a", "b", "c", "d")

OPTIONAL_KEYS: tuple[str, ...] = tuple(
    [f"{fld}.{opt}" for fld in ("signal", "control2", "control3") for opt in _PULSE_OPTIONAL]
    + [f"{ctl}.{opt}" for ctl in ("control2", "control3") for opt in _CONTROL_EXTRA]
    + list(_MAGNETIC_KEYS)
    + [f"zeeman.{lvl}.{q}" for lvl in _ZEEMAN_LEVELS for q in ("f", "m", "g")]
    + ["gamma_mhz", "sample_length_cm", "outputs.snapshot_times"]
)

KNOWN_KEYS = frozenset(REQUIRED_KEYS) | frozenset(OPTIONAL_KEYS)


def _tokenize(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {line_no}: empty key")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(
                f"line {line_no}: duplicate key {key!r} (first set on line {entries[key][1]})"
            )
        entries[key] = (value, line_no)
    return entries


class _Entries:
    def __init__(self, entries: dict[str, tuple[str, int]]):
        self._entries = entries

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def raw(self, key: str) -> str:
        return self._entries[key][0]

    def line(self, key: str) -> int:
        return self._entries[key][1]

    def float(self, key: str, default: float | None = None) -> float | None:
        if key not in self._entries:
            return default
        raw, line_no = self._entries[key]
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"line {line_no}: malformed number for {key!r}: {raw!r}") from None

    def int(self, key: str) -> int:
        value = self.float(key)
        if value != int(value):
            raise ConfigError(f"line {self.line(key)}: {key!r} must be an integer")
        return int(value)

    def string(self, key: str, default: str | None = None) -> str | None:
        if key not in self._entries:
            return default
        return self._entries[key][0]


def _parse_pulse(entries: _Entries, prefix: str) -> PulseShape:
    kind = entries.string(f"{prefix}.kind")
    try:
        return PulseShape(
            kind=kind,
            amplitude=entries.float(f"{prefix}.amplitude"),
            t_start=entries.float(f"{prefix}.t_start"),
            t_end=entries.float(f"{prefix}.t_end"),
            rise=entries.float(f"{prefix}.rise", 0.0),
            phase=entries.float(f"{prefix}.phase", 0.0),
        )
    except ScenarioError as exc:
        raise ConfigError(f"{prefix}: {exc}") from None


def _parse_control(entries: _Entries, prefix: str) -> tuple[PulseShape, ...]:
    first = _parse_pulse(entries, prefix)
    has_2 = f"{prefix}.t_start_2" in entries or f"{prefix}.t_end_2" in entries
    if not has_2:
        return (first,)
    for sub in _CONTROL_EXTRA:
        if f"{prefix}.{sub}" not in entries:
            raise ConfigError(f"{prefix}: t_start_2 and t_end_2 must be given together")
    try:
        second = PulseShape(
            kind=first.kind,
            amplitude=first.amplitude,
            t_start=entries.float(f"{prefix}.t_start_2"),
            t_end=entries.float(f"{prefix}.t_end_2"),
            rise=first.rise,
            phase=first.phase,
        )
    except ScenarioError as exc:
        raise ConfigError(f"{prefix} (second window): {exc}") from None
    return (first, second)


def _parse_zeeman(entries: _Entries) -> tuple[LevelZeeman, ...]:
    levels = list(default_zeeman_levels())
    for idx, name in enumerate(_ZEEMAN_LEVELS):
        keys = [f"zeeman.{name}.{q}" for q in ("f", "m", "g")]
        present = [k for k in keys if k in entries]
        if not present:
            continue
        if len(present) != 3:
            raise ConfigError(f"zeeman.{name}: f, m and g must be given together")
        try:
            levels[idx] = LevelZeeman(
                f_quantum=entries.float(keys[0]),
                m_quantum=entries.float(keys[1]),
                g_factor=entries.float(keys[2]),
            )
        except ScenarioError as exc:
            raise ConfigError(f"zeeman.{name}: {exc}") from None
    return tuple(levels)


def parse_config(text: str) -> Scenario:
    """Parse configuration text into a validated :class:`Scenario`."""
    entries = _Entries(_tokenize(text))
    missing = [key for key in REQUIRED_KEYS if key not in entries]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    ctx = (
        UnitContext.from_mhz(entries.float("gamma_mhz"))
        if "gamma_mhz" in entries
        else default_unit_context()
    )
    sample_length_cm = entries.float("sample_length_cm", 1.0)
    alpha = entries.float("alpha")
    if not alpha > 0.0:
        raise ConfigError(f"line {entries.line('alpha')}: alpha must be > 0")

    try:
        grid = GridSpec(
            n_xi=entries.int("grid.n_xi"),
            d_tau=entries.float("grid.d_tau"),
            t_final=entries.float("grid.t_final"),
        )
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from None

    magnetic = None
    mag_present = [k for k in _MAGNETIC_KEYS if k in entries]
    if mag_present:
        if len(mag_present) != len(_MAGNETIC_KEYS):
            raise ConfigError(
                "magnetic stage needs all of b_tesla, t_start_us and duration_us"
            )
        try:
            magnetic = MagneticPulse(
                b_field_tesla=entries.float("magnetic.b_tesla"),
                t_start=convert_units(ctx, entries.float("magnetic.t_start_us"), "us", "1/Gamma"),
                duration=convert_units(
                    ctx, entries.float("magnetic.duration_us"), "us", "1/Gamma"
                ),
            )
        except ScenarioError as exc:
            raise ConfigError(f"magnetic: {exc}") from None

    snapshot_times: tuple[float, ...] = ()
    if "outputs.snapshot_times" in entries:
        raw = entries.raw("outputs.snapshot_times")
        try:
            snapshot_times = tuple(float(tok) for tok in raw.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(
                f"line {entries.line('outputs.snapshot_times')}: malformed snapshot list"
            ) from None

    try:
        system = AtomicSystem(
            gamma_ab=entries.float("gamma_ab"),
            gamma_ac=entries.float("gamma_ac"),
            gamma_ad=entries.float("gamma_ad"),
            delta1=entries.float("delta1"),
            delta2=entries.float("delta2"),
            delta3=entries.float("delta3"),
            kappa=derive_kappa(alpha, sample_length_cm, ctx),
            zeeman=_parse_zeeman(entries),
        )
        return Scenario(
            system=system,
            signal=_parse_pulse(entries, "signal"),
            control2=_parse_control(entries, "control2"),
            control3=_parse_control(entries, "control3"),
            coupling_alpha=alpha,
            grid=grid,
            magnetic=magnetic,
            sample_length_cm=sample_length_cm,
            outputs=OutputSpec(snapshot_times=snapshot_times),
            units=ctx,
        )
    except ConfigError:
        raise
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _pulse_mapping(prefix: str, shape: PulseShape) -> dict[str, object]:
    out: dict[str, object] = {
        f"{prefix}.kind": shape.kind,
        f"{prefix}.amplitude": shape.amplitude,
        f"{prefix}.t_start": shape.t_start,
        f"{prefix}.t_end": shape.t_end,
    }
    if shape.rise:
        out[f"{prefix}.rise"] = shape.rise
    if shape.phase:
        out[f"{prefix}.phase"] = shape.phase
    return out


def _control_mapping(prefix: str, segments: tuple[PulseShape, ...]) -> dict[str, object]:
    if len(segments) > 2:
        raise ConfigError(f"{prefix}: more than two segments cannot be rendered")
    out = _pulse_mapping(prefix, segments[0])
    if len(segments) == 2:
        first, second = segments
        if (second.kind, second.amplitude, second.rise, second.phase) != (
            first.kind, first.amplitude, first.rise, first.phase,
        ):
            raise ConfigError(
                f"{prefix}: second window must reuse the first window's kind, "
                "amplitude, rise and phase to be rendered"
            )
        out[f"{prefix}.t_start_2"] = second.t_start
        out[f"{prefix}.t_end_2"] = second.t_end
    return out


def scenario_to_mapping(scenario: Scenario) -> dict[str, object]:
    """Flat, ordered key -> value mapping equivalent to the config format."""
    sys = scenario.system
    out: dict[str, object] = {
        "gamma_mhz": scenario.units.gamma_mhz,
        "gamma_ab": sys.gamma_ab,
        "gamma_ac": sys.gamma_ac,
        "gamma_ad": sys.gamma_ad,
        "delta1": sys.delta1,
        "delta2": sys.delta2,
        "delta3": sys.delta3,
        "alpha": scenario.coupling_alpha,
        "sample_length_cm": scenario.sample_length_cm,
    }
    out.update(_pulse_mapping("signal", scenario.signal))
    out.update(_control_mapping("control2", scenario.control2))
    out.update(_control_mapping("control3", scenario.control3))
    if scenario.magnetic is not None:
        mag = scenario.magnetic
        out["magnetic.b_tesla"] = mag.b_field_tesla
        out["magnetic.t_start_us"] = convert_units(scenario.units, mag.t_start, "1/Gamma", "us")
        out["magnetic.duration_us"] = convert_units(scenario.units, mag.duration, "1/Gamma", "us")
    for name, level in zip(_ZEEMAN_LEVELS, sys.zeeman):
        out[f"zeeman.{name}.f"] = level.f_quantum
        out[f"zeeman.{name}.m"] = level.m_quantum
        out[f"zeeman.{name}.g"] = level.g_factor
    out["grid.n_xi"] = scenario.grid.n_xi
    out["grid.d_tau"] = scenario.grid.d_tau
    out["grid.t_final"] = scenario.grid.t_final
    if scenario.outputs.snapshot_times:
        out["outputs.snapshot_times"] = ",".join(
            repr(t) for t in scenario.outputs.snapshot_times
        )
    return out


def render_config(scenario: Scenario) -> str:
    """Render a scenario back to config text (inverse of :func:`parse_config`).

    Raises :class:`ConfigError` for scenarios outside the config schema
    (more than two control windows or heterogeneous window parameters).
    """
    lines = [
        "# tripodsim scenario",
        "# rates/amplitudes in Gamma, times in 1/Gamma; magnetic pulse in",
        "# microseconds and tesla; phases in radians",
    ]
    for key, value in scenario_to_mapping(scenario).items():
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"
