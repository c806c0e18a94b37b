"""Quantum speed limit bounds and exact first-orthogonality times.

Dense, exact simulation of small composite quantum systems: value types and
linear-algebra primitives (``qcore``), unitary evolution and the
first-orthogonality-time solver (``dynamics``), the speed-limit bound family
(``bounds``), ready-made states and Hamiltonians with analytic oracles
(``constructions``), and a CLI (``cli``).
"""

from .bounds import (
    BoundResult,
    Branch,
    EnsembleAnalysis,
    TermReport,
    analyze_ensemble_at_qsl,
    homogeneous_gap_factor,
    mixed_state_bound,
    mixture_stats,
    qsl_time,
    separable_pure_bound,
)
from .constructions import (
    CollectiveSpec,
    EntangledChainSpec,
    collective_overlap_fn,
    collective_t_perp,
    grouped_t_perp,
    make_collective,
    make_grouped,
    make_mixture_demo,
    make_psi_ent,
    psi_ent_survival_amplitude,
)
from .dynamics import (
    OrthogonalityResult,
    SearchOptions,
    evolve,
    first_orthogonal_time,
    scan_first_zero,
    survival,
)
from .qcore import (
    DENSE_CAP,
    DensityMatrix,
    EnergyStats,
    Hamiltonian,
    InvariantViolation,
    NumericalFailure,
    PureState,
    SchemaError,
    SeparableEnsemble,
    SubsystemLayout,
    dump_system,
    embed_local,
    energy_stats,
    ground_shift,
    load_system,
    noninteracting_hamiltonian,
    spectral_decompose,
    state_overlap,
    system_from_json,
    system_to_json,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "Branch",
    "CollectiveSpec",
    "DENSE_CAP",
    "DensityMatrix",
    "EnergyStats",
    "EnsembleAnalysis",
    "EntangledChainSpec",
    "Hamiltonian",
    "InvariantViolation",
    "NumericalFailure",
    "OrthogonalityResult",
    "PureState",
    "SchemaError",
    "SearchOptions",
    "SeparableEnsemble",
    "SubsystemLayout",
    "TermReport",
    "analyze_ensemble_at_qsl",
    "collective_overlap_fn",
    "collective_t_perp",
    "dump_system",
    "embed_local",
    "energy_stats",
    "evolve",
    "first_orthogonal_time",
    "ground_shift",
    "grouped_t_perp",
    "homogeneous_gap_factor",
    "load_system",
    "make_collective",
    "make_grouped",
    "make_mixture_demo",
    "make_psi_ent",
    "mixed_state_bound",
    "mixture_stats",
    "noninteracting_hamiltonian",
    "psi_ent_survival_amplitude",
    "qsl_time",
    "scan_first_zero",
    "separable_pure_bound",
    "spectral_decompose",
    "state_overlap",
    "survival",
    "system_from_json",
    "system_to_json",
    "tensor_product",
]
