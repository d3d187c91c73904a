"""Self-similar LC networks: Feynman-Sierpinski Ladder, Hanoi I/II and the SG rigidity check."""
from .complexnet import (
    CircuitGraph,
    DirichletSolution,
    Edge,
    boundary_input_power,
    effective_impedance,
    power_dissipation,
    solve_dirichlet,
    y_delta,
)
from .fsl import (
    CircuitParams,
    FLTMap,
    FSLImpedance,
    Regime,
    fsl_build_level_graph,
    fsl_characteristic_impedance,
    fsl_flt,
    fsl_harmonic_evaluate,
    fsl_harmonic_matrices,
    fsl_iterate,
    fsl_regularized_limit,
)
from .hanoi import (
    CharacteristicPair,
    FilterRegion,
    HanoiParams,
    InterpolationSet,
    hanoi_build_level_graph,
    hanoi_characteristic_pair,
    hanoi_filter_region,
    hanoi_harmonic_evaluate,
    hanoi_interp_matrices,
    hanoi_pq_map,
)
from .sg import sg_symmetric_conductance

__version__ = "0.1.0"
