"""Tunnelling and problem Hamiltonians on a Fock basis, and the sweep H(t)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .fock import FockBasis, OffsetConfig, coeff_array
from .lattice import gram

DEFAULT_TARGET_MAX = 20.0


def augment_basis(B) -> tuple[tuple[int, ...], ...]:
    """Append the zero row that backs the particle reservoir site."""
    rows = tuple(tuple(int(v) for v in r) for r in B)
    return rows + (tuple(0 for _ in rows[0]),)


def build_tunnelling(basis: FockBasis) -> sp.csr_matrix:
    """Open-chain hopping ``-sum_i (a_i a_{i+1}^+ + h.c.)`` as a sparse symmetric matrix."""
    S = basis.states
    rows, cols, vals = [], [], []
    for i in range(basis.sites - 1):
        src = np.nonzero(S[:, i] > 0)[0]
        if len(src) == 0:
            continue
        tgt_states = S[src].copy()
        tgt_states[:, i] -= 1
        tgt_states[:, i + 1] += 1
        tgt = basis.rank_many(tgt_states)
        amp = -np.sqrt(S[src, i] * (S[src, i + 1] + 1.0))
        rows += [src, tgt]
        cols += [tgt, src]
        vals += [amp, amp]
    D = basis.dim
    if not rows:
        return sp.csr_matrix((D, D))
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(D, D)
    )
    return H.tocsr()


def scale_spectrum(exact_energies, target_max: float) -> tuple[np.ndarray, float]:
    """Rescale so the largest energy equals ``target_max``."""
    E = np.asarray(exact_energies, dtype=float)
    top = float(E.max()) if E.size else 0.0
    if top <= 0:
        raise ValueError("cannot scale an all-zero (or non-positive) spectrum")
    factor = target_max / top
    return E * factor, factor


@dataclass(frozen=True)
class ProblemDiagonal:
    exact_energies: np.ndarray
    scaled_energies: np.ndarray
    scale_factor: float
    constant_shift: int


def state_energies(basis: FockBasis, B, cfg: OffsetConfig) -> np.ndarray:
    """Exact squared norms ``|x . B|^2`` for every Fock state (integer array).

    ``B`` is either the lattice basis (one row per lattice site) or the
    reservoir-augmented basis (one row per site).
    """
    rows = [tuple(int(v) for v in r) for r in B]
    if len(rows) == cfg.sites:
        X = basis.states - cfg.m
    elif len(rows) == cfg.n_lattice_sites:
        X = coeff_array(basis.states, cfg)
    else:
        raise ValueError(f"basis has {len(rows)} rows, configuration has {cfg.sites} sites")
    bound = (basis.particles + cfg.m) * max(sum(abs(v) for v in col) for col in zip(*rows))
    if len(rows[0]) * bound * bound < 2**62:
        V = X @ np.array(rows, dtype=np.int64)
    else:
        V = X.astype(object) @ np.array(rows, dtype=object)
    return (V * V).sum(axis=1)


def build_problem_diagonal(
    basis: FockBasis, B, cfg: OffsetConfig, target_max: float | None = DEFAULT_TARGET_MAX
) -> ProblemDiagonal:
    """Diagonal of the problem Hamiltonian: state energy = squared lattice-vector norm."""
    E = state_energies(basis, B, cfg)
    G = gram(B)
    shift = cfg.m * cfg.m * sum(sum(r) for r in G)
    if target_max is None or not E.any():
        # nothing to stretch when every state is the zero vector
        scaled, factor = E.astype(float), 1.0
    else:
        scaled, factor = scale_spectrum(E, target_max)
    return ProblemDiagonal(E, scaled, factor, shift)


@dataclass(frozen=True)
class PhysicalDecomposition:
    """Interaction constants ``v``, onsite energies ``mu`` and a constant."""

    v: np.ndarray
    mu: np.ndarray
    constant: float

    def energy(self, occupancies) -> float:
        n = np.asarray(occupancies, dtype=float)
        d = np.diag(self.v)
        onsite = float(np.sum(d * n * (n - 1)))
        off = float(n @ (self.v - np.diag(d)) @ n)
        return onsite + off + float(self.mu @ n) + self.constant


def physical_decomposition(G, m: int = 0) -> PhysicalDecomposition:
    """Split ``sum_ij G_ij (n_i - m)(n_j - m)`` into interaction, onsite and constant parts.

    ``n_i (n_i - 1)`` onsite interactions miss a linear ``G_ii n_i`` which the
    onsite energies absorb, together with the offset term ``-2 m sum_j G_ij``.
    """
    G = np.asarray(G, dtype=float)
    if not np.array_equal(G, G.T):
        raise ValueError("Gram matrix must be symmetric")
    mu = np.diag(G) - 2 * m * G.sum(axis=1)
    return PhysicalDecomposition(G.copy(), mu, float(m * m * G.sum()))


@dataclass(frozen=True)
class Schedule:
    """Weights ``f`` (tunnelling) and ``g`` (problem) with optional antiderivative of ``g``."""

    f: Callable[[float], float]
    g: Callable[[float], float]
    g_integral: Callable[[float, float], float] | None = None

    def integrate_g(self, a: float, b: float) -> float:
        if self.g_integral is not None:
            return self.g_integral(a, b)
        # 5-point Gauss-Legendre, exact for polynomial g up to degree 9
        x, w = np.polynomial.legendre.leggauss(5)
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        return half * float(sum(wi * self.g(mid + half * xi) for xi, wi in zip(x, w)))


def linear_schedule(T: float) -> Schedule:
    return Schedule(
        f=lambda t: 1.0 - t / T,
        g=lambda t: t / T,
        g_integral=lambda a, b: (b * b - a * a) / (2.0 * T),
    )


@dataclass(frozen=True)
class SweepHamiltonian:
    """``H(t) = f(t) H0 + g(t) H_P`` on ``[0, T]``."""

    h0: sp.csr_matrix
    hp: ProblemDiagonal
    T: float
    schedule: Schedule = field(default=None)

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("sweep length T must be positive")
        if self.schedule is None:
            object.__setattr__(self, "schedule", linear_schedule(self.T))
        if self.h0.shape[0] != len(self.hp.scaled_energies):
            raise ValueError("tunnelling matrix and problem diagonal differ in dimension")

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def weights(self, t: float) -> tuple[float, float]:
        if not -1e-12 <= t <= self.T * (1 + 1e-12):
            raise ValueError(f"t={t} outside [0, {self.T}]")
        return self.schedule.f(t), self.schedule.g(t)

    def matrix(self, t: float) -> sp.csr_matrix:
        f, g = self.weights(t)
        return (f * self.h0 + sp.diags(g * self.hp.scaled_energies)).tocsr()


def sweep_at(sweep: SweepHamiltonian, t: float) -> LinearOperator:
    """Matrix-free action of ``H(t)``."""
    f, g = sweep.weights(t)
    diag = g * sweep.hp.scaled_energies
    h0 = sweep.h0

    def mv(v):
        v = np.asarray(v)
        if v.ndim == 2:
            return f * (h0 @ v) + diag[:, None] * v
        return f * (h0 @ v) + diag * v

    return LinearOperator(h0.shape, matvec=mv, matmat=mv, rmatvec=mv, dtype=complex)


def dump_coo(matrix, stream: TextIO) -> None:
    """Write the nonzeros as ``row col value`` lines."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        stream.write(f"{int(r)} {int(c)} {float(v)!r}\n")


def ground_energy(sweep: SweepHamiltonian, t: float) -> float:
    """Lowest eigenvalue of ``H(t)`` (dense for small problems)."""
    H = sweep.matrix(t)
    if sweep.dim <= 2000:
        return float(np.linalg.eigvalsh(H.toarray())[0])
    from scipy.sparse.linalg import eigsh

    return float(eigsh(H, k=1, which="SA", return_eigenvectors=False)[0])

