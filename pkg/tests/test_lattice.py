from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosesvp.lattice import (
    LatticeError, basis_from_json, basis_to_json, coeff_of_vector, det, format_basis,
    gram, gram_schmidt, hnf, identity, is_hnf, is_lll_reduced, lll_reduce, norm_sq,
    parse_basis, random_lattice, random_unimodular, scramble, svp_enumerate,
)
from conftest import brute_svp

APPENDIX = ((1, 2), (0, -2))


def same_lattice(A, B):
    try:
        for r in A:
            coeff_of_vector(B, r)
        for r in B:
            coeff_of_vector(A, r)
    except LatticeError:
        return False
    return True


square = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)
).filter(lambda B: det(B) != 0)


def test_gram_examples():
    assert gram(APPENDIX) == ((5, -4), (-4, 4))
    assert gram(identity(3)) == identity(3)
    assert gram([[2, 1], [1, 2]]) == ((5, 4), (4, 5))


def test_norm_sq_examples():
    G = gram(APPENDIX)
    assert norm_sq((1, 1), G) == 1
    assert norm_sq((0, 0), G) == 0
    assert norm_sq((2, 0), G) == 20


def test_hnf_examples():
    assert hnf(APPENDIX) == ((1, 0), (0, 2))
    assert hnf(identity(3)) == identity(3)
    assert hnf([[0, 1], [1, 0]]) == ((1, 0), (0, 1))


@settings(max_examples=60, deadline=None)
@given(square)
def test_hnf_properties(B):
    H = hnf(B)
    assert is_hnf(H)
    assert abs(det(H)) == abs(det(B))
    assert same_lattice(H, B)
    assert hnf(H) == H


@settings(max_examples=40, deadline=None)
@given(square, st.integers(0, 2**31))
def test_hnf_scramble_invariant(B, seed):
    U = random_unimodular(len(B), 8, np.random.default_rng(seed))
    assert hnf(scramble(B, U)) == hnf(B)


def test_gram_schmidt_examples():
    gs = gram_schmidt([[1, 0], [1, 1]])
    assert gs.ortho_rows == ((1, 0), (0, 1))
    assert gs.mu[1][0] == 1
    gs = gram_schmidt([[2, 0], [1, 2]])
    assert gs.mu[1][0] == Fraction(1, 2)
    assert gs.ortho_rows[1] == (0, 2)


def test_lll_examples():
    assert lll_reduce(identity(3)) == identity(3)
    assert lll_reduce([[1, 0], [4, 1]]) == ((1, 0), (0, 1))
    assert sorted(lll_reduce([[0, 2], [1, 0]])) == [(0, 2), (1, 0)]
    with pytest.raises(ValueError):
        lll_reduce(identity(2), delta=Fraction(1, 4))


@settings(max_examples=60, deadline=None)
@given(square)
def test_lll_properties(B):
    L = lll_reduce(B)
    assert is_lll_reduced(L)
    assert abs(det(L)) == abs(det(B))
    assert same_lattice(L, B)
    # independent size-reduction and Lovasz check in exact arithmetic
    gs = gram_schmidt(L)
    nrm = gs.norms_sq
    for i in range(1, len(L)):
        assert all(abs(m) <= Fraction(1, 2) for m in gs.mu[i][:i])
        assert nrm[i] >= (Fraction(3, 4) - gs.mu[i][i - 1] ** 2) * nrm[i - 1]


def test_unimodular_and_scramble(rng):
    assert random_unimodular(3, 0, rng) == identity(3)
    for _ in range(20):
        assert abs(det(random_unimodular(4, 15, rng))) == 1
    a = random_unimodular(3, 10, np.random.default_rng(7))
    b = random_unimodular(3, 10, np.random.default_rng(7))
    assert a == b
    B = ((2, 1, 0), (0, 3, 1), (1, 0, 5))
    assert scramble(B, identity(3)) == B
    assert scramble(identity(3), a) == a
    assert abs(det(scramble(B, a))) == abs(det(B))


def test_random_lattice_modes(rng):
    from sympy import isprime

    H = random_lattice(6, "prime-det-hnf", rng)
    assert is_hnf(H) and isprime(det(H))
    pair = random_lattice(3, "good-bad-pair", rng)
    assert abs(det(pair.good)) == abs(det(pair.bad))
    B = random_lattice(4, "uniform-entries", rng)
    assert det(B) != 0 and max(abs(v) for r in B for v in r) <= 10
    with pytest.raises(ValueError):
        random_lattice(3, "nope", rng)


def test_good_bad_growth_near_paper():
    rng = np.random.default_rng(99)
    growth = np.mean([random_lattice(2, "good-bad-pair", rng).growth for _ in range(200)])
    assert 6 < growth < 20


def test_svp_examples():
    r = svp_enumerate(identity(2))
    assert r.lambda1_sq == 1 and set(r.minimizers) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    r = svp_enumerate(APPENDIX)
    assert r.lambda1_sq == 1 and set(r.minimizers) == {(1, 1), (-1, -1)}
    r = svp_enumerate([[2, 1], [1, 2]])
    assert r.lambda1_sq == 2 and set(r.minimizers) == {(1, -1), (-1, 1)}
    with pytest.raises(LatticeError):
        svp_enumerate(identity(11))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)
).filter(lambda B: det(B) != 0))
def test_svp_matches_brute_force(B):
    r = svp_enumerate(B)
    # coefficients of a shortest vector are bounded by |det| / lambda-ish; use the
    # enumeration's own max as a floor for the search box
    R = max(6, r.inf_norm_xmin + 2, max(abs(v) for x in r.minimizers for v in x) + 1)
    best, mins = brute_svp(B, R)
    assert r.lambda1_sq == best
    assert set(mins) <= set(r.minimizers)


def test_coeff_of_vector():
    assert coeff_of_vector(identity(2), (3, -1)) == (3, -1)
    assert coeff_of_vector(APPENDIX, (1, 0)) == (1, 1)
    with pytest.raises(LatticeError):
        coeff_of_vector(APPENDIX, (1, 1))


def test_io_roundtrip():
    B = ((3, -1, 0), (2, 2, 7), (0, 0, 5))
    assert parse_basis(format_basis(B)) == B
    assert basis_from_json(basis_to_json(B)) == B
    with pytest.raises(LatticeError):
        parse_basis("2\n1 0\n")
