"""1D Kohn-Sham model of a doped nanocrystal chain and excitation-goal optimization."""

__version__ = "0.1.0"

from .excitation import (
    GOAL_KINDS,
    ExcitationPair,
    Goal,
    bandgap,
    bandgap_deviation,
    center_of_mass,
    charge_transfer,
    evaluate_goal,
    homo_lumo,
    lifetime,
    overlap,
)
from .grid import (
    CoulombKernel,
    Grid,
    build_grid,
    convolve,
    coulomb_kernel,
    inner,
    integrate,
    kinetic_apply,
    wire_potential,
)
from .nuclei import (
    DEFAULT_CONSTRAINTS,
    ModelParams,
    ProfileConstraints,
    external_potential,
    nuclear_density,
    profile_from_string,
    profile_to_string,
    uniform_profile,
    validate_profile,
)
from .optimize import (
    CandidateRecord,
    SearchResult,
    SearchSchedule,
    candidate_score,
    exhaustive_search,
    propose_increment,
    search,
)
from .scf import (
    GroundState,
    Hamiltonian,
    ScfParams,
    assemble,
    density_from,
    ks_energy,
    lowest_eigenpairs,
    scf_ground_state,
)
from .tddft import (
    EvolutionTrace,
    PropagationState,
    TddftParams,
    evolve,
    excited_initial_state,
    step,
)
