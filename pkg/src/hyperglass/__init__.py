"""Sparse hypergraph optimization at large degree: generators, exact and
annealed solvers, Gaussian surrogate models, and the experiment harness
that compares the two descriptions."""

from ._version import __version__
from .ensembles import (PUniformHypergraph, SbmGraph, TwoStageResult,
                        gen_configuration_regular, gen_er_hypergraph,
                        gen_poisson_cloning, gen_sbm, gen_two_stage_regular,
                        poisson_cloning_mean, read_hypergraph_text,
                        read_sbm_text, two_stage_partition,
                        write_hypergraph_text, write_sbm_text)
from .experiments import (EXPERIMENTS, ExperimentRecord, beta_schedule,
                          concentration_scan, cut_extrema_batch,
                          er_vs_regular, gen_er_poisson_multigraph,
                          interpolation_gap, replay_record, run_cell,
                          schedule_bound, sqrt_d_coefficient,
                          xorsat_max_satisfied)
from .gaussian import (GaussianTensor, combined_direct, combined_from_profile,
                       degree_fields, gen_goe, gen_iid_array_tensor,
                       gen_kernel_variance_tensor,
                       gen_standard_symmetric_tensor,
                       ground_state_extrapolate, pspin_ground_state,
                       sbm_constraint_gap, sbm_surrogate, surrogate_s,
                       surrogate_t, surrogate_t_profile)
from .objectives import (Kernel, WeightTensor, XorsatInstance, bisection_cut,
                         c1_residual, constant_kernel, cut_kernel,
                         gen_xorsat_instance, hamiltonian, hamiltonian_block,
                         labels_to_pm1, pm1_to_labels, psi,
                         psi_max_and_hessian, qcut_value, read_xorsat_text,
                         write_xorsat_text, xor_kernel, xorsat_satisfied)
from .rng import as_generator, spawn_seeds, stream
from .solvers import (AnnealSchedule, BudgetExceededError, ConstraintEmptyError,
                      ConstraintSet, Monomials, SolveResult, anneal_max,
                      entropy_derivative_check, exact_max, gibbs_stats,
                      log_partition, monomial_expansion,
                      third_derivative_bound_check)

__all__ = [
    "__version__",
    # ensembles
    "PUniformHypergraph", "SbmGraph", "TwoStageResult",
    "gen_er_hypergraph", "gen_configuration_regular", "gen_poisson_cloning",
    "gen_two_stage_regular", "gen_sbm", "poisson_cloning_mean",
    "two_stage_partition", "read_hypergraph_text", "write_hypergraph_text",
    "read_sbm_text", "write_sbm_text",
    # objectives
    "Kernel", "WeightTensor", "XorsatInstance", "cut_kernel", "xor_kernel",
    "constant_kernel", "hamiltonian", "hamiltonian_block", "qcut_value",
    "bisection_cut", "labels_to_pm1", "pm1_to_labels", "psi",
    "psi_max_and_hessian", "c1_residual", "gen_xorsat_instance",
    "xorsat_satisfied", "read_xorsat_text", "write_xorsat_text",
    # solvers
    "ConstraintSet", "ConstraintEmptyError", "BudgetExceededError",
    "SolveResult", "AnnealSchedule", "Monomials", "monomial_expansion",
    "exact_max", "anneal_max", "log_partition", "gibbs_stats",
    "entropy_derivative_check", "third_derivative_bound_check",
    # gaussian surrogates
    "GaussianTensor", "gen_standard_symmetric_tensor",
    "gen_kernel_variance_tensor", "gen_iid_array_tensor", "gen_goe",
    "surrogate_t", "surrogate_t_profile", "combined_from_profile",
    "combined_direct", "degree_fields", "surrogate_s", "pspin_ground_state",
    "sbm_surrogate", "sbm_constraint_gap", "ground_state_extrapolate",
    # experiments
    "EXPERIMENTS", "ExperimentRecord", "run_cell", "replay_record",
    "beta_schedule", "schedule_bound", "interpolation_gap",
    "sqrt_d_coefficient", "er_vs_regular", "concentration_scan",
    "cut_extrema_batch", "xorsat_max_satisfied", "gen_er_poisson_multigraph",
    # rng
    "stream", "spawn_seeds", "as_generator",
]
