"""Key-rate accounting for entanglement-based high-dimensional QKD with subspace post-selection."""
from hdqkd.bases import (
    Flavor,
    ProjectiveBasis,
    SubspacePartition,
    computational_basis,
    conjugate_basis,
    mub_overlap_check,
    subspace_test_basis,
)
from hdqkd.coincidence import (
    CoincidenceTable,
    NoiseInjection,
    SourceModel,
    accidental_coincidence_rate,
    estimate_from_counts,
    noise_fraction_to_added_coincidences,
    simulate_run,
)
from hdqkd.keyrate import (
    FidelityBound,
    KeyRateReport,
    bps,
    entropy_bound_from_fidelity,
    keyrate_fidelity_method,
    keyrate_simple,
    keyrate_subspace,
)
from hdqkd.scenario import Scenario, emit_curves, run_scenario
from hdqkd.paper_data import reproduce_tables
from hdqkd.states import (
    BipartiteState,
    apply_isotropic_noise,
    fidelity_to_max_entangled,
    isotropic_state,
    max_entangled_state,
)
from hdqkd.stats import (
    JointDistribution,
    error_vector,
    joint_probabilities,
    shannon_entropy,
    subspace_postselect,
)

__version__ = "0.1.0"
