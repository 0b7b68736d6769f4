"""Light storage in a tripod-configuration atomic medium.

Numerical simulator and analytic toolkit for pulse propagation, storage,
magnetic phase manipulation and release, described by the coupled
density-matrix and one-way field equations in the co-moving frame, together
with the two-polariton picture used to analyze the results.
"""

from .analytic import (
    CoherenceSplit,
    PredictedRelease,
    adiabatic_check,
    released_height_factor,
    released_pulse_prediction,
    split_coherences,
    trapped_z_amplitude,
)
from .backend import active_backend_name, get_backend
from .bloch import (
    FieldSample,
    SigmaState,
    apply_phase_kick,
    bloch_rhs,
    integrate_magnetic_stage,
    magnetic_route_difference,
    rk4_step,
)
from .errors import (
    ConfigError,
    DiagnosticsError,
    DivergenceError,
    ScenarioError,
    StorageConditionError,
    TripodError,
    UnitError,
)
from .model import (
    AtomicSystem,
    GridSpec,
    LevelZeeman,
    MagneticPhases,
    MagneticPulse,
    OutputSpec,
    PulseShape,
    Scenario,
    UnitContext,
    convert_units,
    default_unit_context,
    default_zeeman_levels,
    delayed_release_scenario,
    derive_kappa,
    evaluate_pulse,
    magnetic_phase_area,
    storage_scenario,
    transparency_scenario,
    zeeman_shift,
)
from .polariton import (
    PolaritonFields,
    PolaritonFrame,
    chi_rate,
    dark_polariton,
    decoupling_residual,
    frame_history,
    mixing_frame,
    z_polariton,
)
from .propagator import (
    Frame,
    Grid,
    SimulationRecord,
    convergence_probe,
    field_slice,
    run_simulation,
)

__version__ = "0.1.0"
