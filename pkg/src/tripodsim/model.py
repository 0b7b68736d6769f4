"""Shared vocabulary: units, atomic parameters, pulse envelopes, Zeeman shifts, scenarios.

Internal unit system
--------------------
The upper-state decay scale Gamma sets the frequency unit (Gamma = 1), time is
measured in 1/Gamma, and the sample length L = 1 spans the spatial coordinate
xi in [0, 1].  The vacuum light speed and the field-medium coupling constant
enter the propagation problem only through the single dimensionless group

    alpha = kappa**2 * L / (c * Gamma),

so a scenario is fully specified in internal units by alpha plus the envelope
parameters.  SI and atomic-unit quantities (microseconds, tesla) appearing in
configuration files are converted through a :class:`UnitContext`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ScenarioError, UnitError

__all__ = [
    "AU_TIME_SECONDS",
    "AU_FREQUENCY_RAD_PER_S",
    "AU_MAGNETIC_TESLA",
    "SPEED_OF_LIGHT_CM_PER_S",
    "DEFAULT_GAMMA_AU",
    "DARK_FIELD_THRESHOLD",
    "UnitContext",
    "convert_units",
    "LevelZeeman",
    "zeeman_shift",
    "zeeman_detuning_shifts",
    "AtomicSystem",
    "PulseShape",
    "evaluate_pulse",
    "envelope_value",
    "MagneticPulse",
    "MagneticPhases",
    "magnetic_phase_area",
    "GridSpec",
    "OutputSpec",
    "Scenario",
    "default_zeeman_levels",
    "default_unit_context",
    "derive_kappa",
    "storage_scenario",
    "delayed_release_scenario",
    "transparency_scenario",
]

# CODATA-style constants used for unit conversions.
AU_TIME_SECONDS = 2.4188843265857e-17
AU_FREQUENCY_RAD_PER_S = 1.0 / AU_TIME_SECONDS
AU_MAGNETIC_TESLA = 2.35051757024e5
SPEED_OF_LIGHT_CM_PER_S = 2.99792458e10

# Default upper-state decay rate in atomic units of angular frequency.
DEFAULT_GAMMA_AU = 4.0e-10

# Optical envelopes below this value (in Gamma units) count as "off"; the
# magnetic stage must sit strictly inside such a dark interval.
DARK_FIELD_THRESHOLD = 1.0e-6

PULSE_KINDS = ("sine-square", "tanh-switch", "rectangular", "zero")


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitContext:
    """Conversion context anchored on the SI value of the decay scale Gamma.

    ``gamma_mhz`` (Gamma / 2 pi, in MHz) is the stored primary quantity so a
    rendered configuration round-trips exactly; ``gamma_si`` (rad/s) is
    derived from it once at construction.
    """

    gamma_mhz: float
    gamma_si: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not (self.gamma_mhz > 0.0 and math.isfinite(self.gamma_mhz)):
            raise ScenarioError("gamma_mhz must be a positive finite number")
        object.__setattr__(self, "gamma_si", 2.0 * math.pi * 1.0e6 * self.gamma_mhz)

    @classmethod
    def from_mhz(cls, gamma_mhz: float) -> "UnitContext":
        return cls(gamma_mhz=gamma_mhz)

    @classmethod
    def from_au(cls, gamma_au: float) -> "UnitContext":
        """Build from Gamma given in atomic units of angular frequency."""
        return cls(gamma_mhz=gamma_au * AU_FREQUENCY_RAD_PER_S / (2.0 * math.pi * 1.0e6))


def default_unit_context() -> UnitContext:
    """Gamma = 4e-10 atomic units, about 2.6 MHz."""
    return UnitContext.from_au(DEFAULT_GAMMA_AU)


# unit name -> (dimension, factor to the dimension's base unit); frequency
# base is rad/s, time base is seconds, magnetic base is tesla, length base cm.
def _unit_table(ctx: UnitContext) -> dict[str, tuple[str, float]]:
    return {
        "au_freq": ("frequency", AU_FREQUENCY_RAD_PER_S),
        "rad/s": ("frequency", 1.0),
        "MHz": ("frequency", 2.0 * math.pi * 1.0e6),
        "Gamma": ("frequency", ctx.gamma_si),
        "us": ("time", 1.0e-6),
        "s": ("time", 1.0),
        "1/Gamma": ("time", 1.0 / ctx.gamma_si),
        "T": ("magnetic", 1.0),
        "au_B": ("magnetic", AU_MAGNETIC_TESLA),
        "cm": ("length", 1.0),
    }


def convert_units(ctx: UnitContext, value: float, from_unit: str, to_unit: str) -> float:
    """Exact linear conversion between the supported unit names.

    Frequencies in MHz are ordinary frequencies (omega / 2 pi); all other
    frequency units are angular.
    """
    table = _unit_table(ctx)
    try:
        dim_from, f_from = table[from_unit]
        dim_to, f_to = table[to_unit]
    except KeyError as exc:
        raise UnitError(
            f"unsupported unit {exc.args[0]!r}; supported: {sorted(table)}"
        ) from None
    if dim_from != dim_to:
        raise UnitError(
            f"cannot convert {from_unit!r} ({dim_from}) to {to_unit!r} ({dim_to})"
        )
    if from_unit == to_unit:
        return value
    return value * (f_from / f_to)


# ---------------------------------------------------------------------------
# Zeeman structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelZeeman:
    """Angular-momentum quantum numbers and Lande factor of one level."""

    f_quantum: float
    m_quantum: float
    g_factor: float

    def __post_init__(self) -> None:
        if abs(self.m_quantum) > self.f_quantum + 1e-12:
            raise ScenarioError(
                f"|m_quantum| = {abs(self.m_quantum)} exceeds f_quantum = {self.f_quantum}"
            )


def default_zeeman_levels() -> tuple[LevelZeeman, LevelZeeman, LevelZeeman, LevelZeeman]:
    """(F, M, g) assignment for the 87Rb-style level scheme, order (a, b, c, d)."""
    return (
        LevelZeeman(2.0, 0.0, 0.5),    # a
        LevelZeeman(2.0, -1.0, 0.5),   # b
        LevelZeeman(2.0, 1.0, 0.5),    # c
        LevelZeeman(1.0, 1.0, -0.5),   # d
    )


def zeeman_shift(level: LevelZeeman, b_field_au: float) -> float:
    """Level energy shift g_F * B * M / 2 in atomic units."""
    return level.g_factor * b_field_au * level.m_quantum / 2.0


def zeeman_detuning_shifts(
    zeeman: Sequence[LevelZeeman], b_field_tesla: float, ctx: UnitContext
) -> tuple[float, float, float]:
    """Shifts (E_b - E_a, E_c - E_a, E_d - E_a) in Gamma units for induction B.

    Added to the bare detunings they give the effective detunings while the
    magnetic pulse is on: the a-b coherence rotates at delta1 + (E_b - E_a),
    a-c at delta2 + (E_c - E_a), a-d at delta3 + (E_d - E_a).
    """
    b_au = convert_units(ctx, b_field_tesla, "T", "au_B")
    ea, eb, ec, ed = (zeeman_shift(lv, b_au) for lv in zeeman)
    to_gamma = AU_FREQUENCY_RAD_PER_S / ctx.gamma_si
    return ((eb - ea) * to_gamma, (ec - ea) * to_gamma, (ed - ea) * to_gamma)


# ---------------------------------------------------------------------------
# Atomic system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomicSystem:
    """Decay rates, detunings and coupling constant, all in Gamma units.

    ``kappa`` is the collective field-medium coupling (kappa**2 carries the
    atom density and dipole moment pre-combined); it only matters for the
    polariton diagnostics since propagation depends on alpha alone.
    ``density_note`` is descriptive metadata (atoms per cm^3).
    """

    gamma_ab: float
    gamma_ac: float
    gamma_ad: float
    delta1: float
    delta2: float
    delta3: float
    kappa: float
    gamma_total: float | None = None
    density_note: float = 2.0e12
    zeeman: tuple[LevelZeeman, LevelZeeman, LevelZeeman, LevelZeeman] = field(
        default_factory=default_zeeman_levels
    )

    def __post_init__(self) -> None:
        for name in ("gamma_ab", "gamma_ac", "gamma_ad"):
            if getattr(self, name) < 0.0:
                raise ScenarioError(f"{name} must be >= 0")
        if not self.kappa > 0.0:
            raise ScenarioError("kappa must be > 0")
        total = self.gamma_ab + self.gamma_ac + self.gamma_ad
        if self.gamma_total is None:
            object.__setattr__(self, "gamma_total", total)
        elif self.gamma_total != total:
            raise ScenarioError(
                f"gamma_total = {self.gamma_total} is not exactly the sum of the "
                f"partial decay rates ({total})"
            )
        if len(self.zeeman) != 4:
            raise ScenarioError("zeeman must list exactly four levels (a, b, c, d)")


def derive_kappa(alpha: float, sample_length_cm: float, ctx: UnitContext) -> float:
    """kappa in Gamma units from alpha = kappa^2 L / (c Gamma)."""
    c_internal = SPEED_OF_LIGHT_CM_PER_S / (sample_length_cm * ctx.gamma_si)
    return math.sqrt(alpha * c_internal)


# ---------------------------------------------------------------------------
# Pulse envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PulseShape:
    """One envelope segment: amplitude [Gamma], support/switch times [1/Gamma].

    ``rise`` is the tanh switching scale (tanh-switch only); ``phase`` is a
    constant phase in radians multiplying the real-nonnegative envelope.
    Infinite t_start / t_end are allowed for tanh-switch and rectangular
    segments (a switch that never happens).
    """

    kind: str
    amplitude: float
    t_start: float
    t_end: float
    rise: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in PULSE_KINDS:
            raise ScenarioError(f"unknown pulse kind {self.kind!r}; one of {PULSE_KINDS}")
        if self.amplitude < 0.0:
            raise ScenarioError("amplitude must be >= 0")
        if not self.t_end > self.t_start:
            raise ScenarioError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if self.kind == "tanh-switch" and not self.rise > 0.0:
            raise ScenarioError("rise must be > 0 for tanh-switch pulses")
        if self.kind == "sine-square" and not (
            math.isfinite(self.t_start) and math.isfinite(self.t_end)
        ):
            raise ScenarioError("sine-square support must be finite")


def evaluate_pulse(shape: PulseShape, t):
    """Complex envelope value(s) at time(s) ``t`` [1/Gamma].

    sine-square:  A sin^2(pi (t - t0) / (t1 - t0)) on [t0, t1], 0 outside
    tanh-switch:  A/2 [tanh((t - t0)/rise) - tanh((t - t1)/rise)]
    rectangular:  A on [t0, t1), 0 outside
    zero:         0
    The result is multiplied by exp(i phase).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if shape.kind == "sine-square":
        width = shape.t_end - shape.t_start
        inside = (t_arr >= shape.t_start) & (t_arr <= shape.t_end)
        u = np.where(inside, (t_arr - shape.t_start) / width, 0.0)
        env = shape.amplitude * np.sin(np.pi * u) ** 2 * inside
    elif shape.kind == "tanh-switch":
        env = 0.5 * shape.amplitude * (
            np.tanh((t_arr - shape.t_start) / shape.rise)
            - np.tanh((t_arr - shape.t_end) / shape.rise)
        )
    elif shape.kind == "rectangular":
        env = shape.amplitude * ((t_arr >= shape.t_start) & (t_arr < shape.t_end))
    else:  # zero
        env = np.zeros_like(t_arr)
    out = env * np.exp(1j * shape.phase)
    if np.ndim(t) == 0:
        return complex(out)
    return out


def envelope_value(segments: Sequence[PulseShape], t):
    """Sum of the segment envelopes at time(s) ``t``."""
    total = None
    for seg in segments:
        val = evaluate_pulse(seg, t)
        total = val if total is None else total + val
    if total is None:
        return 0.0j if np.ndim(t) == 0 else np.zeros(np.shape(t), dtype=np.complex128)
    return total


def _segments_phase(segments: Sequence[PulseShape], name: str) -> float:
    phases = {seg.phase for seg in segments}
    if len(phases) > 1:
        raise ScenarioError(
            f"{name}: all segments of one control must share a single constant phase"
        )
    return phases.pop() if phases else 0.0


# ---------------------------------------------------------------------------
# Magnetic stage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MagneticPulse:
    """Rectangular magnetic pulse: induction in tesla, window in 1/Gamma.

    ``t_start`` and ``duration`` are aligned to the scenario time grid during
    validation so that the grid integration and the analytic phase kick refer
    to exactly the same window.
    """

    b_field_tesla: float
    t_start: float
    duration: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.b_field_tesla)):
            raise ScenarioError("magnetic b_field must be finite")
        if self.t_start < 0.0 or not self.duration > 0.0:
            raise ScenarioError("magnetic window must have t_start >= 0 and duration > 0")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration


@dataclass(frozen=True)
class MagneticPhases:
    """Accumulated differential Zeeman phases [rad] over one magnetic pulse."""

    delta_bc: float
    delta_bd: float
    delta_cd: float


def magnetic_phase_area(scenario: "Scenario") -> MagneticPhases:
    """Phase acquired by each ground coherence during the magnetic stage.

    With level shifts dE_j from the induction B, the b-c coherence picks up
    -(dE_c - dE_b) * duration, the b-d coherence -(dE_d - dE_b) * duration
    and the c-d coherence -(dE_d - dE_c) * duration (hbar = 1 throughout).
    """
    if scenario.magnetic is None:
        raise ScenarioError("no magnetic stage in this scenario")
    sb, sc, sd = zeeman_detuning_shifts(
        scenario.system.zeeman, scenario.magnetic.b_field_tesla, scenario.units
    )
    dur = scenario.magnetic.duration
    return MagneticPhases(
        delta_bc=-(sc - sb) * dur,
        delta_bd=-(sd - sb) * dur,
        delta_cd=-(sd - sc) * dur,
    )


# ---------------------------------------------------------------------------
# Grid, outputs, scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform (xi, tau) discretization: n_xi points on [0, 1], step d_tau."""

    n_xi: int
    d_tau: float
    t_final: float

    def __post_init__(self) -> None:
        if self.n_xi < 2:
            raise ScenarioError("grid.n_xi must be >= 2")
        if not self.d_tau > 0.0:
            raise ScenarioError("grid.d_tau must be > 0")
        if not self.t_final > self.d_tau:
            raise ScenarioError("grid.t_final must exceed grid.d_tau")

    @property
    def n_tau(self) -> int:
        return max(1, round(self.t_final / self.d_tau))

    @property
    def d_xi(self) -> float:
        return 1.0 / (self.n_xi - 1)


@dataclass(frozen=True)
class OutputSpec:
    """Requested probes: extra full-grid snapshot times [1/Gamma]."""

    snapshot_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class Scenario:
    """Everything needed for one storage / manipulation / release run.

    Control envelopes are tuples of :class:`PulseShape` segments whose values
    add; a storage protocol uses one segment for the entry window and one for
    the release window of each control.
    """

    system: AtomicSystem
    signal: PulseShape
    control2: tuple[PulseShape, ...]
    control3: tuple[PulseShape, ...]
    coupling_alpha: float
    grid: GridSpec
    magnetic: MagneticPulse | None = None
    sample_length_cm: float = 1.0
    outputs: OutputSpec = field(default_factory=OutputSpec)
    units: UnitContext = field(default_factory=default_unit_context)

    def __post_init__(self) -> None:
        if not self.coupling_alpha > 0.0:
            raise ScenarioError("alpha must be > 0")
        if not self.sample_length_cm > 0.0:
            raise ScenarioError("sample_length_cm must be > 0")
        if not self.control2 or not self.control3:
            raise ScenarioError("control2 and control3 need at least one segment each")
        _segments_phase(self.control2, "control2")
        _segments_phase(self.control3, "control3")
        if self.magnetic is not None:
            object.__setattr__(self, "magnetic", self._snapped_magnetic())
            self._check_magnetic_window()

    # -- magnetic-stage validation ------------------------------------------------

    def _snapped_magnetic(self) -> MagneticPulse:
        d_tau = self.grid.d_tau
        start = round(self.magnetic.t_start / d_tau) * d_tau
        duration = max(1, round(self.magnetic.duration / d_tau)) * d_tau
        return MagneticPulse(self.magnetic.b_field_tesla, start, duration)

    def _check_magnetic_window(self) -> None:
        mag = self.magnetic
        if mag.t_end > self.grid.t_final:
            raise ScenarioError("magnetic stage extends past grid.t_final")
        ts = np.linspace(mag.t_start, mag.t_end, 2001)
        peak = max(
            np.abs(evaluate_pulse(self.signal, ts)).max(),
            np.abs(envelope_value(self.control2, ts)).max(),
            np.abs(envelope_value(self.control3, ts)).max(),
        )
        if peak >= DARK_FIELD_THRESHOLD:
            raise ScenarioError(
                "magnetic stage overlaps optical fields: envelope reaches "
                f"{peak:.3e} Gamma inside the magnetic window (limit "
                f"{DARK_FIELD_THRESHOLD:.0e})"
            )

    # -- envelope accessors ---------------------------------------------------------

    def signal_value(self, t):
        return evaluate_pulse(self.signal, t)

    def control2_value(self, t):
        return envelope_value(self.control2, t)

    def control3_value(self, t):
        return envelope_value(self.control3, t)

    def control_phases(self) -> tuple[float, float]:
        """Constant phases (chi2, chi3) of the two control fields."""
        return (
            _segments_phase(self.control2, "control2"),
            _segments_phase(self.control3, "control3"),
        )

    @property
    def c_internal(self) -> float:
        """Vacuum light speed in internal units (sample lengths per 1/Gamma)."""
        return self.system.kappa**2 / self.coupling_alpha


# ---------------------------------------------------------------------------
# Reference scenarios
# ---------------------------------------------------------------------------

def _delta_per_tesla(
    zeeman: Sequence[LevelZeeman], duration: float, ctx: UnitContext
) -> float:
    """b-c coherence phase per tesla for a pulse of the given duration."""
    sb, sc, _ = zeeman_detuning_shifts(zeeman, 1.0, ctx)
    return -(sc - sb) * duration


def _control_segments(
    amplitude: float,
    switch_off: float,
    release_on: float | None,
    rise: float,
    phase: float = 0.0,
) -> tuple[PulseShape, ...]:
    entry = PulseShape(
        "tanh-switch", amplitude, t_start=-math.inf, t_end=switch_off, rise=rise, phase=phase
    )
    if release_on is None:
        return (entry,)
    release = PulseShape(
        "tanh-switch", amplitude, t_start=release_on, t_end=math.inf, rise=rise, phase=phase
    )
    return (entry, release)


def storage_scenario(
    *,
    b_field_tesla: float | None = None,
    magnetic_area: float | None = None,
    alpha: float = 4000.0,
    control_amplitude: float = 5.0,
    signal_amplitude: float = 0.025,
    signal_width_us: float = 2.4,
    magnetic_duration_us: float = 2.4,
    magnetic_t_start: float = 90.0,
    control3_release_lead_us: float = 0.0,
    release_time: float = 230.0,
    gamma_rates: tuple[float, float, float] = (1.0, 1.0, 1.0),
    detunings: tuple[float, float, float] = (0.0, 0.0, 0.0),
    n_xi: int = 300,
    d_tau: float = 0.005,
    t_final: float | None = None,
    snapshot_times: tuple[float, ...] = (),
    units: UnitContext | None = None,
) -> Scenario:
    """Storage / manipulation / release run with the reference parameter set.

    Both controls (5 Gamma tanh switches) are on while the sine-square signal
    (0.025 Gamma, 2.4 us wide) enters, switch off to store it, and return for
    the release at ``release_time`` [1/Gamma].  A rectangular magnetic pulse
    of 2.4 us sits inside the dark interval; pass either the induction in
    tesla or the target phase area ``magnetic_area`` [rad] on the b-c
    coherence (the induction is solved from the level scheme).
    ``control3_release_lead_us`` advances the second control-3 switch-on to
    produce a staggered release.
    """
    ctx = units or default_unit_context()
    width = convert_units(ctx, signal_width_us, "us", "1/Gamma")
    lead = convert_units(ctx, control3_release_lead_us, "us", "1/Gamma")

    signal_t0 = 5.0
    switch_off = signal_t0 + width + 10.0
    release_on = release_time + lead
    if t_final is None:
        t_final = release_on + 130.0

    grid = GridSpec(n_xi=n_xi, d_tau=d_tau, t_final=t_final)
    magnetic = None
    if b_field_tesla is not None or magnetic_area is not None:
        duration = convert_units(ctx, magnetic_duration_us, "us", "1/Gamma")
        duration = max(1, round(duration / d_tau)) * d_tau
        if b_field_tesla is None:
            rate = _delta_per_tesla(default_zeeman_levels(), duration, ctx)
            if rate == 0.0:
                raise ScenarioError("level scheme gives zero phase per tesla")
            b_field_tesla = magnetic_area / rate
        magnetic = MagneticPulse(
            b_field_tesla=b_field_tesla, t_start=magnetic_t_start, duration=duration
        )

    system = AtomicSystem(
        gamma_ab=gamma_rates[0],
        gamma_ac=gamma_rates[1],
        gamma_ad=gamma_rates[2],
        delta1=detunings[0],
        delta2=detunings[1],
        delta3=detunings[2],
        kappa=derive_kappa(alpha, 1.0, ctx),
    )
    return Scenario(
        system=system,
        signal=PulseShape(
            "sine-square", signal_amplitude, t_start=signal_t0, t_end=signal_t0 + width
        ),
        control2=_control_segments(control_amplitude, switch_off, release_on=release_time + lead, rise=2.0),
        control3=_control_segments(control_amplitude, switch_off, release_on=release_time, rise=2.0),
        coupling_alpha=alpha,
        grid=grid,
        magnetic=magnetic,
        outputs=OutputSpec(snapshot_times=tuple(snapshot_times)),
        units=ctx,
    )


def delayed_release_scenario(
    lead_us: float = 3.6,
    *,
    t_final: float | None = None,
    **kwargs,
) -> Scenario:
    """Storage run whose control 3 switches back on ``lead_us`` before control 2."""
    return storage_scenario(
        control3_release_lead_us=lead_us,
        t_final=t_final,
        **kwargs,
    )


def transparency_scenario(
    *,
    alpha: float = 4000.0,
    control_amplitude: float = 5.0,
    signal_amplitude: float = 0.025,
    signal_width_us: float = 2.4,
    gamma_rates: tuple[float, float, float] = (1.0, 1.0, 1.0),
    detunings: tuple[float, float, float] = (0.0, 0.0, 0.0),
    n_xi: int = 300,
    d_tau: float = 0.005,
    t_final: float = 160.0,
    snapshot_times: tuple[float, ...] = (),
    units: UnitContext | None = None,
) -> Scenario:
    """Slow-light run: both controls held constant, no storage stage."""
    ctx = units or default_unit_context()
    width = convert_units(ctx, signal_width_us, "us", "1/Gamma")
    constant = (
        PulseShape("tanh-switch", control_amplitude, t_start=-math.inf, t_end=math.inf, rise=2.0),
    )
    system = AtomicSystem(
        gamma_ab=gamma_rates[0],
        gamma_ac=gamma_rates[1],
        gamma_ad=gamma_rates[2],
        delta1=detunings[0],
        delta2=detunings[1],
        delta3=detunings[2],
        kappa=derive_kappa(alpha, 1.0, ctx),
    )
    return Scenario(
        system=system,
        signal=PulseShape("sine-square", signal_amplitude, t_start=5.0, t_end=5.0 + width),
        control2=constant,
        control3=constant,
        coupling_alpha=alpha,
        grid=GridSpec(n_xi=n_xi, d_tau=d_tau, t_final=t_final),
        outputs=OutputSpec(snapshot_times=tuple(snapshot_times)),
        units=ctx,
    )
