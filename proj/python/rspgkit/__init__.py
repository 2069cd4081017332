"""Stochastic composite optimization toolkit (C++ core bindings)."""

from ._core import (
    FeasibleSet,
    ScadParams,
    SimpleTerm,
    bregman_divergence,
    default_config_text,
    gradient_mapping,
    prox_step,
    rspg_batch_size,
    rspgf_batch_size,
    rspgf_smoothing_mu,
    run_experiment_csv,
    scad_smooth_derivative,
    scad_smooth_value,
    solve_benchmark,
    termination_weights,
    two_phase_budget,
    two_phase_num_runs,
    two_phase_post_samples,
    two_phase_post_samples_light,
    verify,
)

__all__ = [
    "FeasibleSet",
    "ScadParams",
    "SimpleTerm",
    "bregman_divergence",
    "default_config_text",
    "gradient_mapping",
    "prox_step",
    "rspg_batch_size",
    "rspgf_batch_size",
    "rspgf_smoothing_mu",
    "run_experiment_csv",
    "scad_smooth_derivative",
    "scad_smooth_value",
    "solve_benchmark",
    "termination_weights",
    "two_phase_budget",
    "two_phase_num_runs",
    "two_phase_post_samples",
    "two_phase_post_samples_light",
    "verify",
]
