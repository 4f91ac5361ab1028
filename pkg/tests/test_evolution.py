import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

import bosesvp.evolution as ev
from bosesvp.evolution import (
    default_steps, evolve, evolve_many, initial_ground_state, instantaneous_spectrum,
    measure_probabilities, rank_classes, write_series_csv,
)
from bosesvp.fock import FockBasis, OffsetConfig
from bosesvp.hamiltonian import (
    ProblemDiagonal, SweepHamiltonian, augment_basis, build_problem_diagonal, build_tunnelling,
)

APPENDIX = ((1, 2), (0, -2))


def appendix_sweep(T=2.0):
    fb = FockBasis(2, 2)
    hp = build_problem_diagonal(fb, APPENDIX, OffsetConfig(0, 2))
    return fb, SweepHamiltonian(build_tunnelling(fb), hp, T)


def test_ground_state_examples():
    psi = initial_ground_state(FockBasis(2, 2))
    assert np.allclose(psi, [0.5, math.sqrt(2) / 2, 0.5], atol=1e-15)
    assert np.allclose(initial_ground_state(FockBasis(1, 2)), [2 ** -0.5] * 2)
    assert np.allclose(initial_ground_state(FockBasis(5, 1)), [1])


@pytest.mark.parametrize("K,M", [(3, 3), (4, 4), (6, 2), (2, 6), (5, 3)])
def test_ground_state_is_eigenvector(K, M):
    fb = FockBasis(K, M)
    H = build_tunnelling(fb).toarray()
    psi = initial_ground_state(fb).real
    w, v = np.linalg.eigh(H)
    assert abs(v[:, 0] @ psi) ** 2 > 1 - 1e-10
    assert np.allclose(H @ psi, w[0] * psi, atol=1e-10)


def test_measure_probabilities():
    assert measure_probabilities(np.eye(4)[2]).tolist() == [0, 0, 1, 0]
    p = measure_probabilities(initial_ground_state(FockBasis(2, 2)))
    assert np.allclose(p, [0.25, 0.5, 0.25])
    assert np.allclose(measure_probabilities(np.ones(7) / math.sqrt(7)), 1 / 7)
    with pytest.raises(ValueError):
        measure_probabilities(np.ones(3))


def test_spectrum_examples():
    _, sw = appendix_sweep()
    assert np.allclose(instantaneous_spectrum(sw, 0, 3), [-2, 0, 2])
    top = instantaneous_spectrum(sw, 2.0, 3)
    assert np.allclose(top, [1, 16, 20], atol=1e-9)
    assert np.allclose(top - top[0], [0, 15, 19])


def test_spectrum_iterative_path(monkeypatch):
    fb = FockBasis(6, 4)
    hp = build_problem_diagonal(fb, augment_basis(((2, 1, 0), (1, 3, 1), (0, 1, 4))),
                                OffsetConfig(1, 3, True))
    sw = SweepHamiltonian(build_tunnelling(fb), hp, 5.0)
    dense = instantaneous_spectrum(sw, 2.0, 4)
    monkeypatch.setattr(ev, "DENSE_EIG_CAP", 10)
    assert np.allclose(instantaneous_spectrum(sw, 2.0, 4), dense, atol=1e-9)


def test_appendix_trajectory_against_reference_solver():
    fb, sw = appendix_sweep()
    psi0 = initial_ground_state(fb)
    res = evolve(sw, psi0)
    H0, E, T = sw.h0.toarray(), sw.hp.scaled_energies, sw.T
    ref = solve_ivp(lambda t, y: -1j * (((1 - t / T) * H0 + t / T * np.diag(E)) @ y),
                    (0, T), psi0, method="DOP853", rtol=1e-12, atol=1e-12)
    assert np.allclose(res.final_probabilities, np.abs(ref.y[:, -1]) ** 2, atol=1e-8)
    assert res.valid and res.norm_drift < 1e-10
    assert np.argmax(res.final_probabilities) == fb.rank((1, 1))


def test_short_sweep_is_identity():
    fb, _ = appendix_sweep()
    sw = SweepHamiltonian(build_tunnelling(fb), appendix_sweep()[1].hp, 1e-6)
    res = evolve(sw, initial_ground_state(fb), steps=1)
    assert np.allclose(res.final_probabilities, [0.25, 0.5, 0.25], atol=1e-4)


def test_stationary_when_problem_is_constant():
    fb = FockBasis(3, 3)
    hp = ProblemDiagonal(np.full(fb.dim, 7), np.full(fb.dim, 7.0), 1.0, 0)
    sw = SweepHamiltonian(build_tunnelling(fb), hp, 3.0)
    psi0 = initial_ground_state(fb)
    res = evolve(sw, psi0, steps=300, snapshots=10)
    for _, p in res.trajectory:
        assert np.allclose(p, np.abs(psi0) ** 2, atol=1e-10)


def test_taylor_and_eigen_flows_agree(monkeypatch):
    fb = FockBasis(8, 3)
    hp = build_problem_diagonal(fb, ((3, 1, 0), (1, -2, 2), (0, 1, 5)), OffsetConfig(2, 3), 500.0)
    sw = SweepHamiltonian(build_tunnelling(fb), hp, 4.0)
    psi0 = initial_ground_state(fb)
    a = evolve(sw, psi0, steps=400)
    monkeypatch.setattr(ev, "DENSE_PROPAGATOR_CAP", 1)
    b = evolve(sw, psi0, steps=400)
    assert np.allclose(a.final_state, b.final_state, atol=1e-10)
    assert b.norm_drift < 1e-10


def test_batched_equals_single():
    fb = FockBasis(6, 3)
    cfg = OffsetConfig(2, 2, True)
    bases = [((1, 2), (0, -2)), ((3, 1), (1, 4)), ((2, -5), (1, 1))]
    hps = [build_problem_diagonal(fb, augment_basis(B), cfg, 1000.0) for B in bases]
    h0 = build_tunnelling(fb)
    psi0 = initial_ground_state(fb)
    batch = evolve_many(h0, np.column_stack([h.scaled_energies for h in hps]), 3.0, psi0, 500)
    for hp, r in zip(hps, batch):
        single = evolve(SweepHamiltonian(h0, hp, 3.0), psi0, steps=500)
        assert np.allclose(single.final_state, r.final_state, atol=1e-12)


def test_invalid_run_is_flagged_not_renormalised():
    fb, sw = appendix_sweep()
    res = evolve(sw, initial_ground_state(fb), steps=50, norm_tol=1e-18)
    assert not res.valid
    assert abs(np.linalg.norm(res.final_state) - 1) == pytest.approx(res.norm_drift)


def test_snapshots_and_spectrum_track():
    fb, sw = appendix_sweep()
    res = evolve(sw, initial_ground_state(fb), steps=1000, spectrum_k=3)
    assert len(res.trajectory) == 200 and len(res.spectrum_track) == 200
    assert res.trajectory[0][0] == 0 and res.trajectory[-1][0] == pytest.approx(2.0)
    for (_, p), (_, e) in zip(res.trajectory, res.spectrum_track):
        assert abs(p.sum() - 1) < 1e-9
        assert e[1] - e[0] > 0
    buf = io.StringIO()
    write_series_csv(buf, res.spectrum_track[:2])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,index_or_rank,value" and len(lines) == 7


def test_default_steps():
    assert default_steps(2) == 10_000 and default_steps(100) == 50_000


def test_rank_classes_appendix():
    fb = FockBasis(2, 2)
    table = rank_classes(fb, APPENDIX, OffsetConfig(0, 2), [0.2, 0.5, 0.3])
    assert [(c.norm_sq, c.vectors, c.probability) for c in table.classes] == [
        (1, ((1, 0),), 0.5), (16, ((0, -4),), 0.3), (20, ((2, 4),), 0.2)]


def test_rank_classes_single_run():
    B = ((1, 2), (0, -2))
    m = 3
    fb = FockBasis(m * 3, 3)
    cfg = OffsetConfig(m, 2, True)
    p = np.random.default_rng(0).random(fb.dim)
    p /= p.sum()
    table = rank_classes(fb, augment_basis(B), cfg, p)
    zero = table[0]
    assert zero.norm_sq == 0 and fb.rank((3, 3, 3)) in zero.members
    assert len(zero.members) == 1
    assert sum(c.probability for c in table.classes) == pytest.approx(1.0)
    keys = [(c.norm_sq, c.representative) for c in table.classes]
    assert keys == sorted(keys)
    # every vector with coefficients inside [-m, m] appears with its negative
    for c in table.nonzero():
        for v in c.vectors:
            x = np.linalg.solve(np.array(B, float).T, np.array(v, float))
            if np.abs(x).max() <= m and abs(x.sum()) <= m:
                assert tuple(-a for a in v) in c.vectors
        assert c.probability == pytest.approx(p[list(c.members)].sum())
    # a vector reached through several reservoir occupancies keeps all of them
    multi = [c for c in table.classes if len({s[-1] for s in fb.states[list(c.members)]}) > 1]
    assert multi


small_bases = st.integers(2, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=25, deadline=None)
@given(small_bases, st.integers(0, 2), st.floats(0.1, 5.0), st.integers(1, 300))
def test_sweeps_conserve_probability(B, m, T, steps):
    N = len(B)
    cfg = OffsetConfig(m, N, has_reservoir=True)
    fb = FockBasis(m * (N + 1), N + 1)
    Bp = augment_basis(B)
    hp = build_problem_diagonal(fb, Bp, cfg, 50.0)
    res = evolve(SweepHamiltonian(build_tunnelling(fb), hp, T), initial_ground_state(fb), steps)
    assert res.valid and res.norm_drift < 1e-10
    table = rank_classes(fb, Bp, cfg, res.final_probabilities)
    assert sum(c.probability for c in table.classes) == pytest.approx(1.0, abs=1e-10)
    norms = [c.norm_sq for c in table.classes]
    assert norms == sorted(norms) and (not norms or norms[0] == 0)
