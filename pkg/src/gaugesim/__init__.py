"""gaugesim: synthetic electromagnetic fields on parametric lattices.

Simulates 2D tight-binding lattices of two-level sites whose couplings
are activated and phase-programmed by parametric modulation, together
with the effective flux-lattice models they realize.  Covers closed and
open time evolution, coupler calibration, interference and transport
experiments, and a semiclassical wave-packet picture.
"""

from ._backend import BACKEND, thread_count
from .lattice import (
    Bond,
    GaugeField,
    LatticeSpec,
    PotentialField,
    ScalarField,
    build_lattice,
    complete_gauge,
    gauge_to_csv,
    gauge_transform,
    linear_potential,
    plaquette_flux,
    reduce_phase,
    uniform_field_gauge,
)
from .model import (
    ModelSpec,
    Tone,
    bessel_j,
    build_hamiltonian,
    chain_tone_layout,
    device_tone_set,
    effective_rate,
    effective_rate_dual,
    frequency_shift_factor,
    gauge_with_drift,
    hamiltonian_to_csv,
    realized_bond_phase,
    ring_tone_layout,
    synthetic_efield_tones,
    tone_phase_for_target,
)
from .evolve import (
    EvolutionResult,
    NoiseSpec,
    disorder_average,
    evolve_lindblad,
    evolve_schrodinger,
    rate_scale,
    result_to_csv,
    step_cap,
)
from .calibrate import (
    AmplitudeCalibration,
    PhaseScan,
    RateFit,
    calibrate_amplitude,
    calibrate_device_amplitudes,
    effective_coupling_map,
    fit_hopping_rate,
    phase_offset_scan,
)
from .experiments import (
    DEFAULT_PLACEMENTS,
    GaugeCheck,
    HallRecord,
    HallScan,
    InterferencePattern,
    ShotSample,
    StarkResult,
    ab_ring_lattice,
    aharonov_bohm_scan,
    gauge_check,
    hall_coefficient,
    hall_experiment,
    hall_to_csv,
    mean_positions,
    pattern_to_csv,
    perimeter_ring_lattice,
    plaquette_lattice,
    sample_shots,
    wannier_stark_chain,
)
from .semiclassical import (
    HallVelocity,
    ModeSet,
    Trajectories,
    hall_velocity_ensemble,
    integrate_eom,
    linearized_hall_velocity,
    obc_eigencheck,
    obc_modes,
)
from .heatmap import emit_heatmap, heatmap_svg, parse_pattern_csv

__version__ = "0.1.0"

__all__ = [
    "AmplitudeCalibration",
    "BACKEND",
    "Bond",
    "DEFAULT_PLACEMENTS",
    "EvolutionResult",
    "GaugeCheck",
    "GaugeField",
    "HallRecord",
    "HallScan",
    "HallVelocity",
    "InterferencePattern",
    "LatticeSpec",
    "ModeSet",
    "ModelSpec",
    "NoiseSpec",
    "PhaseScan",
    "PotentialField",
    "RateFit",
    "ScalarField",
    "ShotSample",
    "StarkResult",
    "Tone",
    "Trajectories",
    "ab_ring_lattice",
    "aharonov_bohm_scan",
    "bessel_j",
    "calibrate_amplitude",
    "calibrate_device_amplitudes",
    "build_hamiltonian",
    "build_lattice",
    "chain_tone_layout",
    "complete_gauge",
    "device_tone_set",
    "disorder_average",
    "effective_coupling_map",
    "effective_rate",
    "effective_rate_dual",
    "emit_heatmap",
    "evolve_lindblad",
    "evolve_schrodinger",
    "fit_hopping_rate",
    "frequency_shift_factor",
    "gauge_check",
    "gauge_to_csv",
    "gauge_transform",
    "gauge_with_drift",
    "hall_coefficient",
    "hall_experiment",
    "hall_to_csv",
    "hall_velocity_ensemble",
    "hamiltonian_to_csv",
    "heatmap_svg",
    "integrate_eom",
    "linear_potential",
    "linearized_hall_velocity",
    "mean_positions",
    "obc_eigencheck",
    "obc_modes",
    "parse_pattern_csv",
    "pattern_to_csv",
    "perimeter_ring_lattice",
    "phase_offset_scan",
    "plaquette_flux",
    "plaquette_lattice",
    "rate_scale",
    "realized_bond_phase",
    "reduce_phase",
    "result_to_csv",
    "ring_tone_layout",
    "sample_shots",
    "step_cap",
    "synthetic_efield_tones",
    "thread_count",
    "tone_phase_for_target",
    "uniform_field_gauge",
    "wannier_stark_chain",
    "__version__",
]
