"""Metastability analysis for finite Markov chains with rare transitions."""

from raretrans.model import (
    INF,
    Model,
    ModelError,
    ValidationReport,
    build_metropolis,
    check_irreducible,
    check_weak_reversibility,
    dump_model,
    load_model,
    parse_model,
)
from raretrans.energy import (
    Arborescence,
    EnergyTable,
    ExitExponents,
    exit_exponent_oracle,
    exit_exponents_graph,
    min_arborescence,
    reconstruct_potential,
    virtual_energy,
)
from raretrans.chain import (
    expected_hitting_solve,
    stationary_solve,
    transition_matrix,
)
from raretrans.landscape import (
    Landscape,
    PathRecord,
    bottom,
    comm_height,
    comm_height_sets,
    external_boundary,
    height_matrix,
    path_elevation,
)
from raretrans.cycles import (
    Cycle,
    CycleTree,
    VtjGraph,
    check_isolated_union,
    cycle_tree,
    depth,
    exit_costs,
    is_cycle,
    max_strict_subcycles,
    maximal_partition,
    principal_boundary,
    vtj_exit_path,
    vtj_graph,
)
from raretrans.metastability import (
    GateAnalysis,
    MetaSets,
    StabilityRecord,
    enclosing_cycle,
    gate_analysis,
    meta_sets,
    minimal_gates,
    minimal_transversals,
    optimal_paths,
    saddles,
    stability_levels,
    tube_membership,
)

__version__ = "0.1.0"
