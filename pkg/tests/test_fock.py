import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosesvp.fock import (
    FockBasis, FockCapError, OffsetConfig, coeff_array, dimension, dimension_single_run,
    fock_to_coeff, format_state, qubit_bound,
)


def test_dimension_examples():
    assert dimension(9, 3) == 55
    assert dimension(16, 4) == 969
    assert dimension(0, 5) == 1 and dimension(2, 2) == 3
    assert dimension_single_run(9, 2) == 55
    assert dimension_single_run(20, 4) == 10626
    assert dimension_single_run(0, 3) == 1


@given(st.integers(0, 25), st.integers(1, 8))
def test_hockey_stick(K, N):
    assert dimension_single_run(K, N) == sum(dimension(k, N) for k in range(K + 1))
    assert dimension_single_run(K, N) == dimension(K, N + 1)


def test_state_order():
    assert FockBasis(2, 2).states.tolist() == [[2, 0], [1, 1], [0, 2]]
    assert FockBasis(1, 3).states.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert FockBasis(4, 1).states.tolist() == [[4]]


@given(st.integers(0, 7), st.integers(1, 5))
def test_rank_bijection(K, M):
    fb = FockBasis(K, M)
    S = fb.states
    assert len(S) == dimension(K, M)
    assert (S.sum(axis=1) == K).all()
    # strictly lexicographically descending
    assert all(tuple(a) > tuple(b) for a, b in zip(S, S[1:]))
    for r in range(fb.dim):
        assert fb.rank(fb.unrank(r)) == r
    assert (fb.rank_many(S) == np.arange(fb.dim)).all()


def test_rank_errors():
    fb = FockBasis(3, 3)
    with pytest.raises(ValueError):
        fb.rank((1, 1, 0))
    with pytest.raises(IndexError):
        fb.unrank(fb.dim)
    with pytest.raises(FockCapError):
        FockBasis(50, 10)


def test_coefficients():
    assert fock_to_coeff((3, 1, 2), OffsetConfig(0, 3)) == (3, 1, 2)
    assert fock_to_coeff((0, 3, 5, 2), OffsetConfig(3, 3, True)) == (-3, 0, 2)
    assert fock_to_coeff((4, 4, 7), OffsetConfig(4, 2, True)) == (0, 0)
    with pytest.raises(ValueError):
        fock_to_coeff((1, 2), OffsetConfig(0, 3))
    fb = FockBasis(4, 3)
    cfg = OffsetConfig(1, 2, True)
    assert coeff_array(fb.states, cfg).tolist() == [list(fock_to_coeff(s, cfg)) for s in fb.states]
    assert format_state((0, 2)) == "(0,2)"


def test_qubit_bound():
    r = qubit_bound(2, 1)
    assert r.K_S == 6 and math.isclose(r.exact_log2_D, math.log2(28))
    assert qubit_bound(45, 1).exact_log2_D <= qubit_bound(45, 1).stirling_bound_log2
    ratios = [qubit_bound(N, 1).stirling_bound_log2 / (N * math.log2(N)) for N in range(5, 101)]
    assert max(ratios) < 8
