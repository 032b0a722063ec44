"""Rydberg-constrained scar models on bipartite lattices."""

from .lattice import (Lattice, DimerCover, SymmetryOp, build_chain,
                      build_honeycomb, default_cover, alternate_cover,
                      symmetry_group, lattice_from_json)
from .hilbert import (RydbergBasis, BlockBasis, FullBasis, StateVector,
                      enumerate_rydberg, block_basis, block_to_halfspin,
                      project_ryd, project_ryd_full, lift_ryd, lucas,
                      fibonacci, basis_dimension_table)
from .operators import (SparseOperator, build_pxp, build_blockspin_parts,
                        build_h1_expanded, build_ladder, build_dh_lambda,
                        build_dh_su2, build_dh_nh_chain, build_dh_nh_generic,
                        maximal_spin_projector, symmetrize,
                        compress_to_rydberg, default_su2_coefficients)
from .trial import (parent_state, trial_scar, trial_scar_invariant,
                    neel_state, verify_neel_decomposition, tower, TrialTower)
from .mps import gamma_state, mps_trial, transfer_norms, MpsTensors
from .analysis import (diagonalize, identify_scars, energy_correction_analytic,
                       analytic_energy, honeycomb_tail_check,
                       residual_objective, alpha_beta_integrals,
                       nh_exactness_report, quench_fidelity, ScarTable)

__version__ = "0.1.0"
