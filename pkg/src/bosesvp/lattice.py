"""Exact integer-lattice machinery.

Bases are row bases held as tuples of tuples of Python ints. Every routine in
this module works in exact integer or :class:`fractions.Fraction` arithmetic;
floats only appear in reported statistics such as a basis growth factor.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

Matrix = tuple[tuple[int, ...], ...]

SVP_DIM_CAP = 10


class LatticeError(ValueError):
    """Raised for singular bases, dimension mismatches and non-lattice vectors."""


def as_basis(B) -> Matrix:
    """Coerce a nested sequence (or integer ndarray) into a square integer basis."""
    rows = tuple(tuple(int(v) for v in row) for row in B)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise LatticeError(f"basis must be a non-empty square matrix, got {len(rows)} rows")
    return rows


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def det(B) -> int:
    """Exact determinant (fraction-free Bareiss elimination)."""
    M = [list(r) for r in as_basis(B)]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _require_full_rank(B: Matrix) -> None:
    if det(B) == 0:
        raise LatticeError("basis is singular")


def matmul(A, B) -> Matrix:
    A, B = tuple(map(tuple, A)), tuple(map(tuple, B))
    if len(A[0]) != len(B):
        raise LatticeError("dimension mismatch")
    cols = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def vec_mat(x: Sequence[int], B) -> tuple[int, ...]:
    """Lattice vector ``x . B`` for a coefficient vector ``x``."""
    B = tuple(map(tuple, B))
    if len(x) != len(B):
        raise LatticeError(f"coefficient vector has length {len(x)}, basis has {len(B)} rows")
    return tuple(sum(xi * row[j] for xi, row in zip(x, B)) for j in range(len(B[0])))


def gram(B) -> Matrix:
    """Gram matrix ``B B^T``. Accepts non-square bases (e.g. a reservoir-augmented one)."""
    rows = tuple(tuple(int(v) for v in r) for r in B)
    return tuple(tuple(sum(a * b for a, b in zip(ri, rj)) for rj in rows) for ri in rows)


def norm_sq(x: Sequence[int], G) -> int:
    """Squared length of ``x . B`` from the Gram matrix of ``B``."""
    if len(x) != len(G) or any(len(r) != len(x) for r in G):
        raise LatticeError(f"coefficient vector has length {len(x)}, Gram matrix is {len(G)}x{len(G)}")
    return sum(G[i][j] * x[i] * x[j] for i in range(len(x)) for j in range(len(x)))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b = g = gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def hnf(B) -> Matrix:
    """Row-style Hermite normal form: upper triangular, positive pivots,
    entries above each pivot reduced into ``[0, pivot)``."""
    rows = [list(r) for r in as_basis(B)]
    n = len(rows)
    for c in range(n):
        for r in range(c + 1, n):
            a, b = rows[c][c], rows[r][c]
            if b == 0:
                continue
            g, s, t = _xgcd(a, b)
            ra, rb = rows[c], rows[r]
            # unimodular 2x2 step: [[s, t], [b/g, -a/g]]
            rows[c] = [s * u + t * v for u, v in zip(ra, rb)]
            rows[r] = [(b // g) * u - (a // g) * v for u, v in zip(ra, rb)]
        if rows[c][c] == 0:
            raise LatticeError("basis is singular")
        if rows[c][c] < 0:
            rows[c] = [-v for v in rows[c]]
        piv = rows[c][c]
        for r in range(c):
            q = rows[r][c] // piv
            if q:
                rows[r] = [u - q * v for u, v in zip(rows[r], rows[c])]
    return tuple(map(tuple, rows))


def is_hnf(B) -> bool:
    B = as_basis(B)
    n = len(B)
    for i in range(n):
        if B[i][i] <= 0:
            return False
        if any(B[i][j] != 0 for j in range(i)):
            return False
        if any(not 0 <= B[r][i] < B[i][i] for r in range(i)):
            return False
    return True


@dataclass(frozen=True)
class GramSchmidtData:
    """Exact Gram-Schmidt data: ``ortho_rows`` is B*, ``mu[i][j]`` for j < i."""

    ortho_rows: tuple[tuple[Fraction, ...], ...]
    mu: tuple[tuple[Fraction, ...], ...]

    @property
    def norms_sq(self) -> tuple[Fraction, ...]:
        return tuple(sum(v * v for v in row) for row in self.ortho_rows)


def _rows(B) -> Matrix:
    return tuple(tuple(int(v) for v in row) for row in B)


def gram_schmidt(B) -> GramSchmidtData:
    """Exact Gram-Schmidt orthogonalisation of linearly independent rows."""
    B = _rows(B)
    n = len(B)
    ortho: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(B):
        v = [Fraction(x) for x in row]
        for j in range(i):
            m = sum(Fraction(a) * b for a, b in zip(row, ortho[j])) / norms[j]
            mu[i][j] = m
            v = [a - m * b for a, b in zip(v, ortho[j])]
        nv = sum(x * x for x in v)
        if nv == 0:
            raise LatticeError("basis is singular")
        ortho.append(v)
        norms.append(nv)
    return GramSchmidtData(tuple(map(tuple, ortho)), tuple(map(tuple, mu)))


def _check_delta(delta) -> Fraction:
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise LatticeError(f"LLL delta must lie in (1/4, 1], got {delta}")
    return delta


def lll_reduce(B, delta=Fraction(3, 4)) -> Matrix:
    """Textbook LLL in exact rational arithmetic.

    Square bases are the usual case; any set of linearly independent integer
    rows is accepted.
    """
    delta = _check_delta(delta)
    b = [list(r) for r in _rows(B)]
    n = len(b)
    gs = gram_schmidt(b)
    mu = [list(r) for r in gs.mu]
    bn = list(gs.norms_sq)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [u - q * v for u, v in zip(b[k], b[j])]
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
                mu[k][j] -= q
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
            continue
        b[k], b[k - 1] = b[k - 1], b[k]
        m = mu[k][k - 1]
        new_bk1 = bn[k] + m * m * bn[k - 1]
        mu[k][k - 1] = m * bn[k - 1] / new_bk1
        bn[k] = bn[k - 1] * bn[k] / new_bk1
        bn[k - 1] = new_bk1
        for j in range(k - 1):
            mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
        for i in range(k + 1, n):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - m * t
            mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
        k = max(k - 1, 1)
    return tuple(map(tuple, b))


def is_lll_reduced(B, delta=Fraction(3, 4)) -> bool:
    delta = _check_delta(delta)
    gs = gram_schmidt(B)
    bn = gs.norms_sq
    n = len(bn)
    for i in range(n):
        if any(abs(gs.mu[i][j]) > Fraction(1, 2) for j in range(i)):
            return False
    return all(delta * bn[k - 1] <= bn[k] + gs.mu[k][k - 1] ** 2 * bn[k - 1] for k in range(1, n))


def random_unimodular(n: int, num_ops: int, rng: np.random.Generator) -> Matrix:
    """Product of ``num_ops`` random elementary operations ``row_i += +-row_j``."""
    if num_ops < 0:
        raise ValueError("num_ops must be non-negative")
    U = [list(r) for r in identity(n)]
    if n < 2:
        return identity(n)
    for _ in range(num_ops):
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        s = 1 if rng.random() < 0.5 else -1
        U[i] = [a + s * c for a, c in zip(U[i], U[j])]
    return tuple(map(tuple, U))


def scramble(B, U) -> Matrix:
    B, U = as_basis(B), as_basis(U)
    if len(B) != len(U):
        raise LatticeError("dimension mismatch")
    return matmul(U, B)


@dataclass(frozen=True)
class GoodBadPair:
    good: Matrix
    bad: Matrix
    unimodular: Matrix
    growth: float


def row_length_growth(good, bad) -> float:
    """Ratio of the mean row length of ``bad`` to that of ``good``."""
    def mean_len(M):
        return float(np.mean([math.sqrt(sum(v * v for v in r)) for r in M]))
    return mean_len(bad) / mean_len(good)


# scramble lengths giving a mean row-length growth near 12 (N=2) / 10 (N=3, 4)
DEFAULT_SCRAMBLE_OPS = {2: 16, 3: 20, 4: 26}


def _uniform(n, lo, hi, rng) -> Matrix:
    while True:
        B = tuple(tuple(int(v) for v in row) for row in rng.integers(lo, hi + 1, size=(n, n)))
        if det(B) != 0:
            return B


def random_lattice(n: int, mode: str = "uniform-entries", rng: np.random.Generator | None = None, **params):
    """Draw a random full-rank integer lattice.

    ``uniform-entries``: i.i.d. entries on ``[lo, hi]`` (default -10..10), singular
    draws rejected. ``prime-det-hnf``: identity with a dense last column of residues
    modulo a random prime ``p`` in ``[p_lo, p_hi)``, pivot ``p`` in the corner.
    ``good-bad-pair``: an LLL-reduced draw with entries on ``[-good_range,
    good_range]`` scrambled by ``num_ops`` elementary operations; returns a
    :class:`GoodBadPair`.
    """
    if n < 2:
        raise ValueError("lattice dimension must be at least 2")
    rng = rng if rng is not None else np.random.default_rng()
    if mode == "uniform-entries":
        return _uniform(n, params.get("lo", -10), params.get("hi", 10), rng)
    if mode == "prime-det-hnf":
        p_lo, p_hi = params.get("p_lo", 2**15), params.get("p_hi", 2**16)
        p = int(sympy.prevprime(int(rng.integers(p_lo + 2, p_hi + 1))))
        col = [int(v) for v in rng.integers(0, p, size=n - 1)] + [p]
        return tuple(
            tuple(col[i] if j == n - 1 else int(i == j) for j in range(n)) for i in range(n)
        )
    if mode == "good-bad-pair":
        r = params.get("good_range", 3)
        good = lll_reduce(_uniform(n, -r, r, rng))
        ops = params.get("num_ops", DEFAULT_SCRAMBLE_OPS.get(n, 6 * n))
        U = random_unimodular(n, ops, rng)
        bad = scramble(good, U)
        return GoodBadPair(good, bad, U, row_length_growth(good, bad))
    raise ValueError(f"unknown lattice mode {mode!r}")


def solve_rational(B, v: Sequence[int]) -> tuple[Fraction, ...]:
    """Exact solution ``x`` of ``x . B = v``."""
    B = as_basis(B)
    n = len(B)
    if len(v) != n:
        raise LatticeError("dimension mismatch")
    # rows of the augmented system are the columns of B
    A = [[Fraction(B[i][j]) for i in range(n)] + [Fraction(v[j])] for j in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise LatticeError("basis is singular")
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [a * inv for a in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return tuple(A[i][n] for i in range(n))


def coeff_of_vector(B, v: Sequence[int]) -> tuple[int, ...]:
    """Integer coefficient vector of lattice vector ``v`` with respect to ``B``."""
    x = solve_rational(B, v)
    if any(xi.denominator != 1 for xi in x):
        raise LatticeError(f"vector {tuple(v)} is not in the lattice")
    return tuple(int(xi) for xi in x)


def canonical_sign(x: Sequence[int]) -> tuple[int, ...]:
    """Representative of ``{x, -x}`` whose leading nonzero entry is positive."""
    x = tuple(x)
    lead = next((v for v in x if v), 0)
    return x if lead >= 0 else tuple(-v for v in x)


@dataclass(frozen=True)
class SvpResult:
    lambda1_sq: int
    minimizers: tuple[tuple[int, ...], ...]
    inf_norm_xmin: int
    coeff_sum_abs: int
    canonical: tuple[int, ...] = field(default=())

    @property
    def shortest_vectors(self):
        return self.minimizers


def _enumerate_short(L: Matrix, bound: Fraction) -> tuple[int, list[tuple[int, ...]]]:
    """All nonzero ``y`` with ``|y.L|^2`` minimal, searching inside ``bound``."""
    n = len(L)
    gs = gram_schmidt(L)
    bn, mu = gs.norms_sq, gs.mu
    best = [bound]
    found: list[tuple[int, ...]] = []
    y = [0] * n

    def rec(k: int, acc: Fraction) -> None:
        c = -sum(y[j] * mu[j][k] for j in range(k + 1, n))
        start = round(c)
        for yk, step in ((start, 1), (start - 1, -1)):
            while True:
                total = acc + (yk - c) ** 2 * bn[k]
                if total > best[0]:
                    break
                y[k] = yk
                if k > 0:
                    rec(k - 1, total)
                elif any(y):
                    if total < best[0]:
                        best[0] = total
                        found.clear()
                    found.append(tuple(y))
                yk += step
        y[k] = 0

    rec(n - 1, Fraction(0))
    return int(best[0]), found


def svp_enumerate(B, cap: int = SVP_DIM_CAP) -> SvpResult:
    """Exact shortest vector(s) by Fincke-Pohst enumeration over an LLL-reduced basis.

    All coefficient vectors (with respect to ``B``) reaching ``lambda_1^2`` are
    returned, closed under negation.
    """
    B = as_basis(B)
    n = len(B)
    if n > cap:
        raise LatticeError(f"dimension {n} exceeds the enumeration cap {cap}")
    _require_full_rank(B)
    L = lll_reduce(B)
    bound = Fraction(min(sum(v * v for v in r) for r in L))
    lam, ys = _enumerate_short(L, bound)
    mins = sorted({coeff_of_vector(B, vec_mat(y, L)) for y in ys})
    canon = min(x for x in mins if canonical_sign(x) == x)
    return SvpResult(
        lambda1_sq=lam,
        minimizers=tuple(mins),
        inf_norm_xmin=min(max(abs(v) for v in x) for x in mins),
        coeff_sum_abs=abs(sum(canon)),
        canonical=canon,
    )


def format_basis(B) -> str:
    B = as_basis(B)
    lines = [str(len(B))] + [" ".join(str(v) for v in row) for row in B]
    return "\n".join(lines) + "\n"


def parse_basis(text: str) -> Matrix:
    tokens = [line.split() for line in text.strip().splitlines() if line.strip()]
    n = int(tokens[0][0])
    rows = tokens[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise LatticeError(f"expected {n} rows of {n} integers")
    return tuple(tuple(int(v) for v in r) for r in rows)


def basis_to_json(B) -> str:
    B = as_basis(B)
    return json.dumps({"dim": len(B), "rows": [list(r) for r in B]})


def basis_from_json(text: str) -> Matrix:
    obj = json.loads(text)
    B = as_basis(obj["rows"])
    if obj.get("dim", len(B)) != len(B):
        raise LatticeError("dim field does not match rows")
    return B
