import numpy as np
import pytest

from dictpr.dictionary import SparseCoefficients, make_dictionary
from dictpr.errors import InvalidParameter
from dictpr.measurement import MeasurementEnsemble, add_bounded_noise, apply_map, \
    gaussian_ensemble, phase_aligned_distance
from dictpr.problem import ProblemInstance, make_instance, with_measurements
from dictpr.solver import (DELTA_FLOOR, SolverConfig, lq_weights, oracle_support_solver,
                           quartic_loss_grad, residual_norm, solve_l1_analysis,
                           solve_lq_analysis, spectral_init)


def _rel(inst, res):
    return phase_aligned_distance(res.xhat, inst.x0) / np.linalg.norm(inst.x0)


def _loss(ens, x, y):
    return float(np.sum((np.abs(ens.vectors.conj() @ x) ** 2 - y) ** 2))


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed, rng):
    inst = make_instance(5, 5, 20, 2, seed=seed)
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    y = inst.y + 0.1 * rng.standard_normal(inst.m)
    f, g = quartic_loss_grad(inst.ens, x, y)
    assert f == pytest.approx(_loss(inst.ens, x, y), rel=1e-12)
    h = 1e-6
    fd = np.zeros(5, dtype=complex)
    for j in range(5):
        e = np.zeros(5)
        e[j] = h
        fd[j] = (_loss(inst.ens, x + e, y) - _loss(inst.ens, x - e, y)) / (2 * h)
        fd[j] += 1j * (_loss(inst.ens, x + 1j * e, y) - _loss(inst.ens, x - 1j * e, y)) / (2 * h)
    assert np.max(np.abs(fd - g)) <= 1e-4 * np.max(np.abs(g))


def test_spectral_init_quality():
    errs = []
    for s in range(50):
        inst = make_instance(8, 8, 160, 8, seed=s)
        x = spectral_init(inst.ens, inst.y)
        errs.append(phase_aligned_distance(x, inst.x0) / np.linalg.norm(inst.x0))
    assert np.median(errs) < 0.5


def test_spectral_init_trivia():
    inst = make_instance(6, 6, 40, 2, seed=1)
    assert not np.any(spectral_init(inst.ens, np.zeros(40)))
    perm = np.random.default_rng(0).permutation(40)
    ens_p = MeasurementEnsemble(inst.ens.vectors[perm], "permuted")
    a = spectral_init(inst.ens, inst.y)
    b = spectral_init(ens_p, inst.y[perm])
    assert phase_aligned_distance(a, b) < 1e-10
    with pytest.raises(InvalidParameter):
        spectral_init(inst.ens, np.ones(3))


def test_zero_measurements_give_zero():
    inst = make_instance(4, 4, 16, 1, seed=0)
    zero = with_measurements(inst, np.zeros(16))
    for solve in (solve_l1_analysis, solve_lq_analysis, oracle_support_solver):
        res = solve(zero)
        assert not np.any(res.xhat) and res.residual == 0.0


def test_l1_recovers_and_trace_is_monotone():
    inst = make_instance(8, 8, 64, 2, seed=4)
    res = solve_l1_analysis(inst)
    assert res.status in ("converged", "max_iters")
    assert _rel(inst, res) < 1e-3
    assert np.all(np.diff(res.objective_trace) <= 0)
    x0 = spectral_init(inst.ens, inst.y)
    assert res.residual <= residual_norm(inst.ens, x0, inst.y)
    # standalone phase convention: largest |D^* xhat| entry is real positive
    c = inst.D.matrix.conj().T @ res.xhat
    j = np.argmax(np.abs(c))
    assert abs(c[j].imag) < 1e-12 and c[j].real > 0


@pytest.mark.parametrize("family", ["identity", "truncated_unitary"])
def test_lq_at_q1_is_l1(family):
    inst = make_instance(6, 6, 36, 2, family=family, seed=7)
    cfg = SolverConfig(q=1.0)
    a = solve_l1_analysis(inst, cfg)
    b = solve_lq_analysis(inst, cfg)
    assert np.max(np.abs(a.xhat - b.xhat)) <= 1e-8


def test_lq_half_recovers():
    inst = make_instance(8, 8, 48, 2, seed=2)
    res = solve_lq_analysis(inst, SolverConfig(q=0.5))
    assert _rel(inst, res) < 1e-3


def test_lq_weights_finite_at_floor():
    c = np.array([0.0, 1e-30, 1.0, 3.0 + 4.0j])
    for q in (0.1, 0.5, 1.0):
        w = lq_weights(c, q, DELTA_FLOOR)
        assert np.all(np.isfinite(w)) and np.all(w >= 0)
    assert np.allclose(lq_weights(c[2:], 1.0, DELTA_FLOOR), 1.0, atol=1e-12)


def test_config_validation():
    SolverConfig(step_size=0.1)
    for bad in ({"max_iters": 0}, {"tol_rel_change": 0.0}, {"lam": -1.0}, {"q": 0.0},
                {"q": 1.5}, {"smoothing_delta0": 0.0}, {"smoothing_decay": 1.0},
                {"step_size": "armijo"}, {"step_size": -1.0}):
        with pytest.raises(InvalidParameter):
            SolverConfig(**bad)


def test_oracle_two_dimensional_example():
    D = make_dictionary("identity", 2, 2)
    ens = gaussian_ensemble(6, 2, seed=0)
    x0 = np.array([1.0, 0.0], dtype=complex)
    record = add_bounded_noise(apply_map(ens, x0), 0.0)
    z0 = SparseCoefficients(x0.copy(), np.array([0]), 1)
    inst = ProblemInstance(D, ens, x0, z0, record, 1)
    res = oracle_support_solver(inst, 1)
    assert res.status == "converged"
    assert phase_aligned_distance(res.xhat, x0) < 1e-6


def test_oracle_k1_exact():
    for s in range(10):
        inst = make_instance(6, 6, 8, 1, seed=s)
        assert _rel(inst, oracle_support_solver(inst)) < 1e-6


def test_oracle_cap_and_range():
    inst = make_instance(8, 30, 64, 2, family="harmonic_frame", seed=0)
    with pytest.raises(InvalidParameter):
        oracle_support_solver(inst, 5)  # C(30, 5) > 1e4
    with pytest.raises(InvalidParameter):
        oracle_support_solver(inst, 0)


def test_oracle_dominates_descent():
    # noiseless only: with noise a dense descent iterate can fit the noise
    # better than any k-sparse candidate
    for s in range(5):
        inst = make_instance(6, 6, 30, 2, seed=s)
        o = oracle_support_solver(inst)
        d = solve_l1_analysis(inst)
        assert o.residual <= d.residual + 1e-8


def test_constrained_oracle_lands_on_the_ball():
    inst = make_instance(6, 6, 36, 2, epsilon=0.05, seed=1)
    res = oracle_support_solver(inst, constrained=True)
    assert inst.epsilon <= res.residual <= inst.epsilon * (1 + 1e-9)
    assert res.info["polish_lambda"] > 0


def test_summary_keys(rng):
    inst = make_instance(4, 4, 16, 1, seed=0)
    s = oracle_support_solver(inst).summary(inst.x0)
    assert set(s) == {"status", "iterations", "residual", "error_lifted",
                      "error_phase_aligned", "runtime_ms"}
    assert s["runtime_ms"] is None and s["error_lifted"] < 1e-8
