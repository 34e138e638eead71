"""Local density of states and fidelity decay in the Dicke model and its rotating-wave version."""

__version__ = "0.1.0"

from .fidelity import (
    DecayFit,
    FaTrace,
    averaged_loschmidt,
    decay_comparison,
    fidelity_amplitude,
    fit_decay,
    full_trace_amplitude,
)
from .hamiltonian import (
    ModelParams,
    build_hamiltonian,
    build_perturbation_operator,
    converged_state_count,
    decompose,
    sector_hamiltonian,
)
from .hilbert import BasisState, Parity, SectorBasis, build_basis, parity_of
from .ldos import (
    LdosHistogram,
    SweepResult,
    averaged_ldos,
    gamma_vs_delta,
    gamma_vs_lambda,
    overlap_weights,
    perturbation_profile,
    segmented_loglog_fit,
    validity_threshold,
    width_gamma,
)
from .spectral import (
    EigenDecomposition,
    SpacingStatistics,
    Window,
    diagonalize,
    mean_level_spacing,
    spacing_statistics,
    unfold,
)

__all__ = [
    "BasisState", "DecayFit", "EigenDecomposition", "FaTrace", "LdosHistogram", "ModelParams",
    "Parity", "SectorBasis", "SpacingStatistics", "SweepResult", "Window",
    "averaged_ldos", "averaged_loschmidt", "build_basis", "build_hamiltonian",
    "build_perturbation_operator", "converged_state_count", "decay_comparison", "decompose",
    "diagonalize", "fidelity_amplitude", "fit_decay", "full_trace_amplitude", "gamma_vs_delta",
    "gamma_vs_lambda", "mean_level_spacing", "overlap_weights", "parity_of",
    "perturbation_profile", "sector_hamiltonian", "segmented_loglog_fit", "spacing_statistics",
    "unfold", "validity_threshold", "width_gamma",
]
