import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dictpr.core import outer
from dictpr.errors import InvalidParameter
from dictpr.measurement import (MeasurementEnsemble, add_bounded_noise, align_phase,
                                apply_lifted, apply_map, basis_ensemble, gaussian_ensemble,
                                inner, lifted_distance, load_record, phase_aligned_distance,
                                save_record)

from conftest import crandn


def test_apply_map_example():
    ens = MeasurementEnsemble(np.array([[1, 1j]]))
    assert apply_map(ens, np.array([1, 1])) == pytest.approx([2.0])
    assert not np.any(apply_map(ens, np.zeros(2)))


def test_apply_map_phase_invariance(rng):
    ens = gaussian_ensemble(20, 5, 1)
    x = crandn(rng, 5)
    assert np.allclose(apply_map(ens, np.exp(0.7j) * x), apply_map(ens, x), rtol=1e-12)


def test_apply_lifted_examples(rng):
    ens = MeasurementEnsemble(np.array([[1, 1]]))
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    assert apply_lifted(ens, X) == pytest.approx([2.0])
    ens = gaussian_ensemble(30, 6, 2)
    x = crandn(rng, 6)
    assert np.allclose(apply_lifted(ens, outer(x)), apply_map(ens, x), rtol=1e-10)
    Y = crandn(rng, 6, 6)
    Y, Z = Y + Y.conj().T, outer(crandn(rng, 6))
    assert np.allclose(apply_lifted(ens, Y + Z), apply_lifted(ens, Y) + apply_lifted(ens, Z))


def test_gaussian_ensemble():
    a = gaussian_ensemble(5, 3, 9)
    assert np.array_equal(a.vectors, gaussian_ensemble(5, 3, 9).vectors)
    assert gaussian_ensemble(1, 1, 0).vectors.shape == (1, 1)
    big = gaussian_ensemble(100_000, 1, 4).vectors
    assert np.mean(np.abs(big) ** 2) == pytest.approx(1.0, abs=0.02)
    with pytest.raises(InvalidParameter):
        gaussian_ensemble(0, 3)


def test_noise():
    clean = np.arange(10.0)
    rec = add_bounded_noise(clean, 0.0, 1)
    assert np.array_equal(rec.y, clean)
    rec = add_bounded_noise(clean, 0.3, 1)
    assert np.linalg.norm(rec.y - clean) == pytest.approx(0.3, rel=1e-12)
    assert np.array_equal(rec.noise, add_bounded_noise(clean, 0.3, 1).noise)
    with pytest.raises(InvalidParameter):
        add_bounded_noise(clean, -1.0)


def test_distance_examples():
    v = np.array([1, 2j, -1])
    assert phase_aligned_distance(1j * v, v) < 1e-15
    e1, e2 = np.eye(2)[0].astype(complex), np.eye(2)[1].astype(complex)
    assert phase_aligned_distance(e1, e2) == pytest.approx(math.sqrt(2))
    thetas = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    grid = min(np.linalg.norm(np.exp(1j * t) * e1 - e2) for t in thetas)
    assert abs(grid - phase_aligned_distance(e1, e2)) < 1e-6
    assert phase_aligned_distance(v, np.zeros(3)) == pytest.approx(np.linalg.norm(v))
    assert lifted_distance(v, v) == 0.0
    assert lifted_distance(e1, e2) == pytest.approx(np.linalg.norm(outer(e1) - outer(e2)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 16))
def test_distance_identities(seed, n):
    rng = np.random.default_rng(seed)
    u, v = crandn(rng, n), crandn(rng, n)
    assert lifted_distance(u, v) == pytest.approx(np.linalg.norm(outer(u) - outer(v)),
                                                 rel=1e-10, abs=1e-10)
    d = phase_aligned_distance(u, v)
    lhs = d * d + 2 * abs(inner(u, v))
    assert lhs == pytest.approx(np.vdot(u, u).real + np.vdot(v, v).real, rel=1e-12)
    ua = align_phase(u, v)
    assert abs(inner(ua, v).imag) < 1e-12 and inner(ua, v).real >= 0
    assert np.allclose(align_phase(ua, v), ua, rtol=0, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 16))
def test_rank_one_lemma(seed, n):
    rng = np.random.default_rng(seed)
    u, v = crandn(rng, n), crandn(rng, n)
    u = align_phase(u, v)
    rhs = np.linalg.norm(outer(u) - outer(v)) ** 2
    d2 = np.vdot(u - v, u - v).real
    assert 0.5 * np.vdot(u, u).real * d2 <= rhs + 1e-10 * max(1, rhs)
    assert 0.5 * np.vdot(v, v).real * d2 <= rhs + 1e-10 * max(1, rhs)


def test_record_round_trip(tmp_path):
    rec = add_bounded_noise(np.linspace(0, 1, 7), 0.1, 5)
    save_record(rec, tmp_path / "m.csv")
    back = load_record(tmp_path / "m.csv", 0.1)
    assert np.array_equal(back.y, rec.y) and np.array_equal(back.noise, rec.noise)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "index,y,clean,noise"


def test_basis_ensemble_blind_to_offdiagonal():
    ens = basis_ensemble(3)
    X = np.zeros((3, 3), dtype=complex)
    X[0, 1] = X[1, 0] = 1
    assert not np.any(apply_lifted(ens, X))
