"""Resonance fluorescence of collective quantum-well excitons behind an
absorbing interface.

The package solves a coherently driven Kerr mode with single-photon loss on a
truncated Fock space, evaluates steady-state two-time correlators by quantum
regression, turns them into emission spectra, and applies the absorption
spectrum of the medium as a filter on first- and second-order field moments.
Squeezing and nonclassicality witnesses are derived from the filtered moments.

All energies and rates are in meV with hbar = 1; times are in units of
hbar/meV (~0.658 ps).
"""

from .errors import (
    QwfluorError,
    SolverError,
    TruncationError,
    StabilityError,
    GridError,
    ModelError,
    SpectralLeakageError,
    UnsupportedOrderError,
    UndefinedPhaseError,
    ConfigError,
)
from .model import PhysParams, ParamTable, builtin_table, demo_params, interpolate_params
from .fock import (
    annihilation,
    build_hamiltonian,
    build_liouvillian,
    steady_state,
    expectation,
    choose_truncation,
    TruncationResult,
)
from .qrt import (
    CorrelationTrace,
    default_tau_grid,
    step_propagator,
    evolve_operator,
    correlator_adag_a,
    correlator_a_a,
    both_correlators,
)
from .spectra import (
    Spectrum,
    AbsorptionModel,
    susceptibility,
    absorption,
    emission_spectrum,
    qw_spectrum,
    detector_convolve,
    moment_omega_grid,
    figure_omega_grid,
)
from .filtering import (
    MomentSet,
    coherent_moment_q,
    intensity_q,
    anomalous_moment_q,
    filtered_moment,
)
from .observables import (
    ObservableRow,
    PhaseReport,
    squeezing_variance,
    anomalous_nonclassicality,
    degree_of_coherence,
    phase_report,
    wrap_phase,
)
from .pipeline import Numerics, AbsorptionSpec, PointResult, compute_point, run_sweep_points, find_zero_crossings

__version__ = "0.1.0"

__all__ = [
    "QwfluorError", "SolverError", "TruncationError", "StabilityError",
    "GridError", "ModelError", "SpectralLeakageError", "UnsupportedOrderError",
    "UndefinedPhaseError", "ConfigError",
    "PhysParams", "ParamTable", "builtin_table", "demo_params", "interpolate_params",
    "annihilation", "build_hamiltonian", "build_liouvillian", "steady_state",
    "expectation", "choose_truncation", "TruncationResult",
    "CorrelationTrace", "default_tau_grid", "step_propagator", "evolve_operator",
    "correlator_adag_a", "correlator_a_a", "both_correlators",
    "Spectrum", "AbsorptionModel", "susceptibility", "absorption",
    "emission_spectrum", "qw_spectrum", "detector_convolve",
    "moment_omega_grid", "figure_omega_grid",
    "MomentSet", "coherent_moment_q", "intensity_q", "anomalous_moment_q", "filtered_moment",
    "ObservableRow", "PhaseReport", "squeezing_variance", "anomalous_nonclassicality",
    "degree_of_coherence", "phase_report", "wrap_phase",
    "Numerics", "AbsorptionSpec", "PointResult", "compute_point",
    "run_sweep_points", "find_zero_crossings",
    "__version__",
]
