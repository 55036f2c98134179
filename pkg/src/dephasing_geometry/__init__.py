"""Geometry of qubit dephasing under nonstationary, non-Markovian telegraph noise."""
from .decoherence import (
    CoherenceSeries,
    DegenerateModesError,
    ModeDecomposition,
    UndersampledPhaseError,
    coherence_series,
    cubic_roots,
    decompose,
    evaluate_dF,
    evaluate_F,
    make_factor,
    shift_and_rate,
    unwrap_phase,
)
from .dynamics import BlochState, SpectralState, Trajectory, evolve_analytic, evolve_ode, path_length, spectral
from .geometry import (
    MixedPhase,
    PhaseBreakdown,
    effective_phase,
    pancharatnam_phase,
    total_phase_mixed,
    total_phase_pure,
)
from .model import NoiseParams, ParameterError, SystemConfig, TimeGrid, uniform_grid, validate
from .nonmarkov import NonMarkovReport, non_markovianity, trace_distance
from .oracles import MarkovFactor, McConfig, OdeFactor, closed_form_markov_F, mc_F, ode_F

__version__ = "0.1.0"
