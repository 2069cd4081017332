import math

import pytest

import rspgkit as rk


def test_prox_step_unconstrained():
    x_plus, mapping = rk.prox_step(
        "euclidean",
        rk.FeasibleSet.all_space(),
        rk.SimpleTerm.zero(),
        [1.0, 2.0],
        [1.0, 0.0],
        0.5,
    )
    assert x_plus == pytest.approx([0.5, 2.0])
    assert mapping == pytest.approx([1.0, 0.0])


def test_prox_step_entropy_simplex():
    x_plus, _ = rk.prox_step(
        "entropy_simplex",
        rk.FeasibleSet.simplex(),
        rk.SimpleTerm.zero(),
        [0.5, 0.5],
        [1.0, 0.0],
        0.25,
    )
    assert sum(x_plus) == pytest.approx(1.0)
    assert x_plus[0] == pytest.approx(0.4378, abs=1e-3)


def test_bregman_divergence_is_kl_on_simplex():
    kl = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
    assert rk.bregman_divergence("entropy_simplex", [0.5, 0.5], [0.9, 0.1]) == (
        pytest.approx(kl)
    )


def test_scad_values():
    assert rk.scad_smooth_derivative(0.005) == pytest.approx(0.005)
    assert rk.scad_smooth_derivative(0.05) == 0.0
    assert rk.scad_smooth_value(0.01) == pytest.approx(5e-5)
    with pytest.raises(ValueError):
        rk.scad_smooth_derivative(-1.0)


def test_parameter_formulas():
    assert rk.rspg_batch_size(1000, 1.0, 1.0, 1.0) == 20
    assert rk.rspgf_batch_size(100, 4, 1.0, 0.0, 1.0, 1.0) == 29
    assert rk.rspgf_smoothing_mu(1.0, 6, 10) == pytest.approx(0.1)
    assert rk.two_phase_num_runs(0.5) == 2


def test_termination_weights_uniform_for_constant_stepsize():
    weights = rk.termination_weights(1.0, 1.0, [0.5] * 4)
    assert weights == pytest.approx([0.25] * 4)


def test_solve_benchmark_runs_deterministically():
    a = rk.solve_benchmark("least_squares", "RSPG", n=10, budget=300, seed=7)
    b = rk.solve_benchmark("least_squares", "RSPG", n=10, budget=300, seed=7)
    assert a == b
    assert a["sfo_calls"] <= 300
    assert "zero_ratio" in a


def test_run_experiment_csv_round_trip():
    config = rk.default_config_text()
    config = config.replace("n = 100", "n = 10")
    config = config.replace("replications = 20", "replications = 2")
    config = config.replace("k_eval = 75000", "k_eval = 500")
    config = config.replace("n0 = 200", "n0 = 50")
    config = config.replace("budgets = 1000,5000,25000", "budgets = 200")
    assert "budgets = 200" in config
    report_csv, summary_csv = rk.run_experiment_csv(config, threads=2)
    header = report_csv.splitlines()[0]
    assert header == (
        "scenario,n,noise,algorithm,NS,replication,mapping_norm_sq,"
        "objective,zero_ratio,sfo_calls,post_calls,wall_ms"
    )
    assert "RSPG" in summary_csv
    # Thread-count invariance.
    again, _ = rk.run_experiment_csv(config, threads=1)
    assert again == report_csv
