"""Desk-scale simulator of an embedding quantum simulator for the 1+1
Majorana equation: the complex-to-real state embedding, antiunitary gate
protocols, per-momentum four-level dynamics, figure observables, finite-shot
tomography emulation and the six-tone microwave hardware layer."""

__version__ = "0.1.0"

from .grids import MomentumGrid, SpatialGrid
from .core import (MajoranaState, EnlargedState, SymmetryOperator,
                   RECOVERY_MATRIX, embed, recover, apply_symmetry,
                   symmetry_operator, overlap, state_fidelity,
                   RealityConditionError)
from .dynamics import (enlarged_hamiltonian, block_hamiltonians, propagator,
                       propagate_mode, propagate_blocks, propagate_pair,
                       evolve, evolve_majorana_direct, evolve_dirac, S_MATRIX)
from .observables import (ObservableSeries, DiracEigenbasis, dirac_spinors,
                          expect_diagonal, mean_momentum,
                          mean_momentum_series, charge,
                          fidelity_global_phase, orthogonality,
                          mean_position, mean_position_swept,
                          cross_term_residual, density_distributions,
                          particle_antiparticle_populations)

__all__ = [
    "__version__",
    "MomentumGrid", "SpatialGrid",
    "MajoranaState", "EnlargedState", "SymmetryOperator", "RECOVERY_MATRIX",
    "embed", "recover", "apply_symmetry", "symmetry_operator", "overlap",
    "state_fidelity", "RealityConditionError",
    "enlarged_hamiltonian", "block_hamiltonians", "propagator",
    "propagate_mode", "propagate_blocks", "propagate_pair", "evolve",
    "evolve_majorana_direct", "evolve_dirac", "S_MATRIX",
    "ObservableSeries", "DiracEigenbasis", "dirac_spinors", "expect_diagonal",
    "mean_momentum", "mean_momentum_series", "charge",
    "fidelity_global_phase", "orthogonality", "mean_position",
    "mean_position_swept", "cross_term_residual", "density_distributions",
    "particle_antiparticle_populations",
]
