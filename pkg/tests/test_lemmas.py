import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dictpr.errors import DegenerateInput, InvalidParameter
from dictpr.lemmas import (SLACK_RTOL, ProofCheck, build_partition, check_decomposition,
                           choose_t0, corrupt_off_support, phase_diagonal, proof_drip_matrices,
                           sparse_convex_decompose, verify_l1_proof_chain, verify_lq_proof_chain)
from dictpr.problem import make_instance, with_measurements
from dictpr.core import numerical_rank, row_sparsity

# checks that follow from the cone constraint and the partition alone
COMBINATORIAL_L1 = ("cone_constraint", "cone_tail_l1", "step1_tail_tail", "step1_cross_T0",
                    "step1_cross_T1", "rank_one_lemma_u", "rank_one_lemma_v", "step1_aggregate",
                    "tail_linf_bound", "atom_norm_bound", "final_assembly")


# --- decomposition --------------------------------------------------------


def test_decompose_sparse_input_is_single_atom():
    v = np.array([0.0, 0.4, 0.0, -0.7])
    dec = sparse_convex_decompose(v, 2, 1.0)
    assert dec.P == 1 and dec.weights[0] == 1.0
    assert np.array_equal(dec.atoms[0], v)


def test_decompose_worked_example():
    v = np.array([1.0, 0.5, 0.5])
    dec = sparse_convex_decompose(v, 2, 1.0)
    assert np.allclose(dec.weights, [0.5, 0.5])
    assert np.allclose(dec.atoms, [[1, 1, 0], [1, 0, 1]])
    assert check_decomposition(dec, v, 2, 1.0) == []


def test_decompose_signs_and_preconditions():
    v = np.array([0.3, -0.6, 0.2, -0.1, 0.5])
    dec = sparse_convex_decompose(v, 2, 0.9)
    assert check_decomposition(dec, v, 2, 0.9) == []
    nz = dec.atoms != 0
    assert np.all(np.sign(dec.atoms[nz]) == np.broadcast_to(np.sign(v), dec.atoms.shape)[nz])
    with pytest.raises(InvalidParameter):
        sparse_convex_decompose(v, 2, 0.5)  # ||v||_inf > mu
    with pytest.raises(InvalidParameter):
        sparse_convex_decompose(v, 1, 0.7)  # ||v||_1 > k mu


def test_validator_catches_bad_decompositions():
    v = np.array([1.0, 0.5, 0.5])
    good = sparse_convex_decompose(v, 2, 1.0)
    bad = type(good)(np.array([0.6, 0.6]), good.atoms, 1.0, 2)
    assert "convex_weights" in check_decomposition(bad, v, 2, 1.0)
    bad = type(good)(good.weights, np.array([[1.0, 0.5, 0.5], [1.0, 0.5, 0.5]]), 1.0, 2)
    assert "atom_sparsity" in check_decomposition(bad, v, 2, 1.0)
    bad = type(good)(good.weights, good.atoms * 1.1, 1.0, 2)
    assert {"atom_l1_mass", "atom_linf", "reconstruction"} <= set(check_decomposition(bad, v, 2, 1.0))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 24), st.floats(1.0, 3.0))
def test_decomposition_invariants(seed, N, slack):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, N + 1))
    v = rng.standard_normal(N) * (rng.random(N) < 0.7)
    if not np.any(v):
        v[0] = 1.0
    a = np.abs(v)
    mu = max(a.max(), a.sum() / k) * slack
    dec = sparse_convex_decompose(v, k, mu)
    assert check_decomposition(dec, v, k, mu) == []
    assert np.linalg.norm(dec.atoms, axis=1).max() <= math.sqrt(mu * a.sum()) * (1 + 1e-12)
    assert dec.P <= np.count_nonzero(v) + k


# --- phases and partitions ------------------------------------------------


def test_phase_diagonal_examples():
    assert np.array_equal(phase_diagonal(np.array([1.0, 3.0])), [1, 1])
    w = np.array([1j, -2.0])
    ph = phase_diagonal(w)
    assert np.allclose(ph, [1j, -1])
    assert np.allclose(ph.conj() * w, [1, 2])
    assert phase_diagonal(np.array([0.0, 1e-13]))[0] == 1


def test_partition_example():
    c = np.array([5, 0.5, 3, 2, 1, 0.2])
    part = build_partition(c, [0, 1], 1.0, 2)
    assert [list(b) for b in part.blocks] == [[2, 3], [4, 5]]
    assert list(part.T01) == [0, 1, 2, 3]
    with pytest.raises(InvalidParameter):
        build_partition(c, [6], 1.0, 2)


def test_partition_ties_and_block_size():
    c = np.ones(7)
    part = build_partition(c, [3], 1.5, 2)  # ceil(3) = 3
    assert part.size == 3
    assert [list(b) for b in part.blocks] == [[0, 1, 2], [4, 5, 6]]
    assert build_partition(c, [0], 1.01, 2).size == 3
    assert build_partition(c, [0], 1.0 / 3.0, 3).size == 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 40), st.sampled_from([1.0, 1.5, 2.0, 2.5]))
def test_partition_invariants(seed, N, r):
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * (rng.random(N) < 0.8)
    k = int(rng.integers(1, max(2, N // 2)))
    T0 = np.sort(rng.choice(N, size=min(k, N), replace=False))
    part = build_partition(c, T0, r, k)
    allb = np.concatenate(part.blocks) if part.blocks else np.array([], dtype=int)
    assert sorted(allb) == sorted(np.setdiff1d(np.arange(N), T0))
    mags = [np.abs(c[b]) for b in part.blocks]
    for i in range(len(mags) - 1):
        assert mags[i].min() >= mags[i + 1].max()
    for i in range(2, len(part.blocks) + 1):
        lhs = np.linalg.norm(c[part.block(i)])
        rhs = np.abs(c[part.block(i - 1)]).sum() / math.sqrt(part.size)
        assert lhs <= rhs * (1 + 1e-12) + 1e-15


# --- proof chains ---------------------------------------------------------


def test_checks_pass_tolerance():
    assert ProofCheck("a", 1.0, 1.0).passed
    assert ProofCheck("a", 1.0 + 0.5 * SLACK_RTOL, 1.0).passed
    assert not ProofCheck("a", 1.0 + 2 * SLACK_RTOL, 1.0).passed
    assert ProofCheck("a", 1e3 * (1 + 0.5 * SLACK_RTOL), 1e3).passed


@pytest.mark.parametrize("family,N", [("identity", 6), ("truncated_unitary", 6)])
def test_truth_gives_all_zero_pass(family, N):
    inst = make_instance(6, N, 30, 2, family=family, seed=3, epsilon=0.01)
    rep = verify_l1_proof_chain(inst, inst.x0 * np.exp(0.4j), 0.5, 1.5)
    assert rep.all_passed
    assert all(abs(c.lhs) < 1e-12 for c in rep.checks if c.name != "measurement_tube")
    for q in (0.5, 1.0):
        assert verify_lq_proof_chain(inst, inst.x0, q).all_passed


def test_non_sparse_analysis_is_flagged():
    # redundant frame: D^* x0 is dense, so the argument's hypothesis is violated
    inst = make_instance(6, 9, 30, 2, family="harmonic_frame", seed=3)
    rep = verify_l1_proof_chain(inst, inst.x0, 0.5, 1.5)
    assert rep.get("cone_constraint").passed
    assert any("T0 does not contain" in n for n in rep.notes)
    assert not rep.get("cone_tail_l1").passed


def test_degenerate_truth_rejected():
    inst = make_instance(4, 4, 16, 1, seed=0)
    zero = with_measurements(inst, inst.y)
    object.__setattr__(zero, "x0", np.zeros(4, dtype=complex))
    with pytest.raises(DegenerateInput):
        verify_l1_proof_chain(zero, inst.x0, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        verify_lq_proof_chain(inst, inst.x0, 0.0)


def test_report_csv(tmp_path):
    inst = make_instance(4, 4, 16, 1, seed=0)
    rep = verify_lq_proof_chain(inst, inst.x0, 0.5)
    rep.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "check_name,lhs,rhs,slack,passed"
    assert len(lines) == len(rep.checks) + 1
    assert all(ln.endswith(",true") for ln in lines[1:])


def test_t0_modes():
    c0 = np.array([3.0, 0.0, 1.0, 2.0])
    assert list(choose_t0(c0, 2, "support")) == [0, 2, 3]
    assert list(choose_t0(c0, 2, "topk")) == [0, 3]
    assert list(choose_t0(c0, 2, "auto")) == [0, 3]
    assert list(choose_t0(c0, 3, "auto")) == [0, 2, 3]
    with pytest.raises(InvalidParameter):
        choose_t0(c0, 2, "largest")


def _cone_feasible(seed, q, family):
    """Instance and an x with ||D^* x||_q <= ||D^* x0||_q and mass off supp(D^* x0)."""
    rng = np.random.default_rng(seed)
    N = int(rng.integers(4, 13))
    k = int(rng.integers(1, 3))
    r = float(rng.choice([1.0, 1.5, 2.0]))
    inst = make_instance(N, N, 3 * N, k, family=family, seed=seed, r=r)
    D = inst.D.matrix
    c0 = D.conj().T @ inst.x0
    on = np.abs(c0) > 1e-12
    c = np.zeros(N, dtype=complex)
    c[on] = c0[on] * rng.uniform(0.3, 1.0, on.sum()) * np.exp(0.3j * rng.standard_normal(on.sum()))
    budget = np.sum(np.abs(c0) ** q) - np.sum(np.abs(c) ** q)
    w = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * ~on
    w *= rng.random(N) < 0.8
    if np.any(w):
        w *= (rng.uniform(0.05, 1.0) * budget / np.sum(np.abs(w) ** q)) ** (1 / q)
    return inst, D @ (c + w)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.3, 0.5, 0.8, 1.0]),
       st.sampled_from(["identity", "truncated_unitary"]))
def test_lq_chain_holds_inside_the_cone(seed, q, family):
    inst, x = _cone_feasible(seed, q, family)
    rep = verify_lq_proof_chain(inst, x, q)
    bad = [c.name for c in rep.checks if not c.passed and c.name != "measurement_tube"]
    assert bad == []


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["identity", "truncated_unitary"]))
def test_l1_chain_holds_inside_the_cone(seed, family):
    inst, x = _cone_feasible(seed, 1.0, family)
    rep = verify_l1_proof_chain(inst, x, 0.5, 1.5)
    bad = [c.name for c in rep.checks if c.name in COMBINATORIAL_L1 and not c.passed]
    assert bad == []


def test_drip_matrices_respect_the_order():
    inst, x = _cone_feasible(11, 1.0, "identity")
    b = math.ceil(inst.r * inst.k - 1e-9)
    lower, upper = proof_drip_matrices(inst, x)
    for M in lower + upper:
        assert numerical_rank(M) <= 2
        assert row_sparsity(M) <= 2 * b


def test_corruption_breaks_cone():
    inst = make_instance(6, 6, 30, 2, seed=5)
    bad = corrupt_off_support(inst, inst.x0, 1.0, seed=1)
    assert not verify_l1_proof_chain(inst, bad, 0.5, 1.5).get("cone_constraint").passed
    assert not verify_lq_proof_chain(inst, bad, 0.5).get("lq_cone_constraint").passed
