"""Band-diagonalisation of HNF bases by gcd/Bezout row eliminations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .lattice import LatticeError, Matrix, _xgcd, as_basis, det, gram_schmidt, is_hnf, lll_reduce

DEFAULT_J_MAX = 3


def _xgcd_balanced(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd with ``s`` moved into the symmetric range modulo ``b/g``."""
    g, s, t = _xgcd(a, b)
    if g and b:
        step_s, step_t = b // g, a // g
        k = round(Fraction(s, step_s))
        s, t = s - k * step_s, t + k * step_t
    return g, s, t


def bezout_combo(targets: Sequence[int], goal: int) -> tuple[int, list[int]]:
    """Return ``(delta, coeffs)`` with ``delta * sum(c*t) == goal``.

    Coefficients come from folding the extended Euclidean algorithm over
    ``targets``, each step reduced to the smallest absolute Bezout multiplier.
    """
    if not targets:
        raise ValueError("targets must be non-empty")
    g, coeffs = abs(targets[0]), [1 if targets[0] >= 0 else -1]
    for t in targets[1:]:
        g2, s, u = _xgcd_balanced(g, t)
        coeffs = [c * s for c in coeffs] + [u]
        g = g2
    if g == 0:
        if goal == 0:
            return 0, [0] * len(targets)
        raise ValueError(f"gcd of {list(targets)} is 0 and cannot produce {goal}")
    if goal % g:
        raise ValueError(f"gcd {g} of {list(targets)} does not divide {goal}")
    return goal // g, coeffs


def bandwidth(B) -> int:
    """Maximum over rows of (rightmost nonzero column - row index)."""
    width = 0
    for i, row in enumerate(B):
        nz = [j for j, v in enumerate(row) if v]
        if nz:
            width = max(width, nz[-1] - i)
    return width


def row_extent(row: Sequence[int], i: int) -> int:
    nz = [j for j, v in enumerate(row) if v]
    return nz[-1] - i if nz else 0


def _kernel_basis(a: Sequence[int]) -> list[list[int]]:
    """Basis of the integer vectors ``w`` with ``w . a == 0``."""
    rows = [[int(i == k) for k in range(len(a))] for i in range(len(a))]
    vals = list(a)
    while sum(1 for v in vals if v) > 1:
        p = min((i for i, v in enumerate(vals) if v), key=lambda i: abs(vals[i]))
        for i, v in enumerate(vals):
            if i != p and v:
                q = v // vals[p]
                vals[i] -= q * vals[p]
                rows[i] = [x - q * y for x, y in zip(rows[i], rows[p])]
    return [r for r, v in zip(rows, vals) if v == 0]


def _shorten(w: list[int], a: Sequence[int]) -> list[int]:
    """Move ``w`` to a short representative of ``w + ker(a)`` (Babai rounding)."""
    kern = _kernel_basis(a)
    if not kern:
        return w
    kern = [list(r) for r in lll_reduce(kern)]
    ortho = gram_schmidt(kern).ortho_rows
    for b, bs in zip(reversed(kern), reversed(ortho)):
        c = round(sum(x * y for x, y in zip(w, bs)) / sum(y * y for y in bs))
        if c:
            w = [x - c * y for x, y in zip(w, b)]
    return w


@dataclass(frozen=True)
class BandedBasis:
    basis: Matrix
    bandwidth: int
    volume_factor: int
    scalings: int
    # band extent of each row right after its elimination
    eliminated_extents: tuple[int, ...] = field(default=())
    # rows that needed a group wider than j_max
    extended: int = 0
    # entries no group of rows below could cancel
    unresolved: int = 0


def _dense_columns(H: Matrix) -> list[int]:
    return [c for c in range(len(H)) if H[c][c] != 1 and any(H[r][c] for r in range(c - 1))]


def band_diagonalise(H, j_max: int = DEFAULT_J_MAX, shorten: bool = True) -> BandedBasis:
    """Eliminate entries far above the diagonal of an HNF basis.

    Dense columns (those above a non-unit pivot) are processed left to right,
    rows top-down. For row ``i`` the entry ``x`` in column ``c`` is cancelled with
    ``b_i <- b_i - delta * sum_k u_k b_{i+k}`` over the smallest group of rows
    ``i+1 .. i+j`` (``j <= j_max``) whose column-``c`` entries have a gcd dividing
    ``x``. When no group works but one divides ``2x``, the row is doubled first,
    which turns the basis into one of a sublattice of index 2. Only if that also
    fails is the group widened past ``j_max`` (lattice preserving).

    With ``shorten`` the combination ``delta * u`` is replaced by a short member
    of its coset modulo the solutions of ``sum w_k x_k = 0``; without it the raw
    Bezout multipliers are used.
    """
    H = as_basis(H)
    if not is_hnf(H):
        raise LatticeError("band_diagonalise expects a basis in Hermite normal form")
    n = len(H)
    rows = [list(r) for r in H]
    scalings = 0
    extents: list[int] = []
    unresolved = 0
    extended = 0
    for c in _dense_columns(H):
        for i in range(c - 1):
            x = rows[i][c]
            if x == 0:
                continue
            groups = [[rows[i + k][c] for k in range(1, j + 1)] for j in range(1, c - i + 1)]
            gcds = [reduce(math.gcd, g) for g in groups]
            j = next((j for j, g in enumerate(gcds[:j_max], 1) if g and x % g == 0), None)
            if j is None:
                j = next((j for j, g in enumerate(gcds[:j_max], 1) if g and (2 * x) % g == 0), None)
                if j is not None:
                    rows[i] = [2 * v for v in rows[i]]
                    scalings += 1
                    x = rows[i][c]
            if j is None:
                j = next((j for j, g in enumerate(gcds, 1) if g and x % g == 0), None)
                if j is None:
                    unresolved += 1
                    continue
                extended += 1
            delta, u = bezout_combo(groups[j - 1], x)
            w = [delta * uk for uk in u]
            if shorten:
                w = _shorten(w, groups[j - 1])
            for k, wk in enumerate(w, 1):
                if wk:
                    rows[i] = [a - wk * b for a, b in zip(rows[i], rows[i + k])]
            assert rows[i][c] == 0
            extents.append(row_extent(rows[i], i))
    out = tuple(map(tuple, rows))
    return BandedBasis(
        basis=out,
        bandwidth=bandwidth(out),
        volume_factor=abs(det(out)) // abs(det(H)),
        scalings=scalings,
        eliminated_extents=tuple(extents),
        unresolved=unresolved,
        extended=extended,
    )


@dataclass(frozen=True)
class BandProfile:
    mean_abs_entry_by_offset: dict[int, float]
    heat: np.ndarray  # mean |entry| / mean |diagonal|, N x N


def band_profile(ensemble: Sequence[BandedBasis]) -> BandProfile:
    """Mean |entry| per diagonal offset, normalised by the mean |diagonal| entry."""
    if not ensemble:
        raise ValueError("band_profile needs at least one banded basis")
    n = len(ensemble[0].basis)
    if any(len(b.basis) != n for b in ensemble):
        raise ValueError("ensemble members must share a dimension")
    A = np.array([[[abs(float(v)) for v in row] for row in b.basis] for b in ensemble])
    heat = A.mean(axis=0)
    diag = float(np.mean(np.diagonal(heat)))
    heat = heat / diag
    means = {d: float(np.mean(np.diagonal(heat, offset=d))) for d in range(n)}
    return BandProfile(means, heat)
