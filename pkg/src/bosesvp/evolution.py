"""Schrödinger propagation through the sweep, plus measurement and rank classes.

The propagator splits ``H(t) = f(t) H0 + g(t) H_P`` on the extended system
``(psi, t)``. The tunnelling flow freezes ``t`` and is applied to rounding
accuracy, through the eigendecomposition of ``H0`` or a truncated Taylor
series; the problem flow advances ``t`` and is exact
because ``H_P`` is diagonal (the phase is the integral of ``g``). Symmetric
Strang steps are composed with Yoshida's triple jump for fourth order. Every
substep is unitary, so the norm is conserved to rounding error.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .fock import FockBasis, OffsetConfig, coeff_array
from .hamiltonian import Schedule, SweepHamiltonian, linear_schedule

NORM_TOL = 1e-6
DENSE_EIG_CAP = 2000
DENSE_PROPAGATOR_CAP = 300
# below this the per-step Python overhead dominates, so the compiled kernel wins
TINY_SPACE = 16
DEFAULT_SNAPSHOTS = 200

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


class EvolutionError(RuntimeError):
    """An evolution violated the unitarity tolerance."""


def default_steps(T: float) -> int:
    return max(10_000, math.ceil(500 * T))


def initial_ground_state(basis: FockBasis) -> np.ndarray:
    """Ground state of the tunnelling Hamiltonian, built as a condensate.

    Every boson sits in the lowest single-particle mode of the open chain,
    ``phi_i ~ sin(pi i / (M + 1))``, so state ``n`` has amplitude
    ``sqrt(K! / prod n_i!) * prod phi_i^n_i``.
    """
    K, M = basis.particles, basis.sites
    phi = np.sin(np.pi * np.arange(1, M + 1) / (M + 1))
    log_phi = np.log(phi / np.linalg.norm(phi))
    S = basis.states
    log_fact = np.array([math.lgamma(n + 1) for n in range(K + 1)])
    log_amp = 0.5 * (log_fact[K] - log_fact[S].sum(axis=1)) + S @ log_phi
    psi = np.exp(log_amp - log_amp.max())
    psi /= np.linalg.norm(psi)
    return psi.astype(complex)


def measure_probabilities(psi, tol: float = NORM_TOL) -> np.ndarray:
    """Born probabilities ``|amplitude|^2``; the state must be normalised."""
    p = np.abs(np.asarray(psi)) ** 2
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"state norm^2 is {total}, not 1")
    return p


def instantaneous_spectrum(sweep: SweepHamiltonian, t: float, k: int) -> np.ndarray:
    """The ``k`` lowest eigenvalues of ``H(t)``, ascending."""
    if not 1 <= k <= sweep.dim:
        raise ValueError(f"k={k} outside [1, {sweep.dim}]")
    H = sweep.matrix(t)
    if sweep.dim <= DENSE_EIG_CAP or k >= sweep.dim - 1:
        return eigh(H.toarray(), eigvals_only=True, subset_by_index=[0, k - 1])
    return np.sort(eigsh(H, k=k, which="SA", return_eigenvectors=False))


@dataclass
class EvolutionResult:
    final_probabilities: np.ndarray
    final_state: np.ndarray
    norm_drift: float
    valid: bool
    steps: int
    trajectory: list[tuple[float, np.ndarray]] = field(default_factory=list)
    spectrum_track: list[tuple[float, np.ndarray]] = field(default_factory=list)


_sparse_kernel = None


def _get_sparse_kernel():
    """Compile (once) the sparse Taylor-series propagation loop."""
    global _sparse_kernel
    if _sparse_kernel is not None:
        return _sparse_kernel
    import numba

    @numba.njit(cache=True)
    def kernel(indptr, indices, data, norm, E, psi, A, P):
        D, L = psi.shape
        term = np.empty_like(psi)
        nxt = np.empty_like(psi)
        acc = np.empty_like(psi)
        for j in range(len(A) + 1):
            ph = P[j]
            if ph != 0.0:
                for i in range(D):
                    for l in range(L):
                        psi[i, l] *= np.exp(-1j * ph * E[i, l])
            if j == len(A) or A[j] == 0.0:
                continue
            x = abs(A[j]) * norm
            pieces = max(1, int(np.ceil(x)))
            y = x / pieces
            terms, bound = 0, 1.0
            while bound >= 1e-17:
                terms += 1
                bound *= y / terms
            b = A[j] / pieces
            for _ in range(pieces):
                acc[:, :] = psi
                term[:, :] = psi
                for k in range(1, terms + 1):
                    c = -1j * b / k
                    for i in range(D):
                        for l in range(L):
                            nxt[i, l] = 0.0
                        for q in range(indptr[i], indptr[i + 1]):
                            h = data[q] * c
                            col = indices[q]
                            for l in range(L):
                                nxt[i, l] += h * term[col, l]
                    term, nxt = nxt, term
                    acc += term
                psi[:, :] = acc
        return psi

    _sparse_kernel = kernel
    return kernel


def warm_up() -> None:
    """Compile (or load from cache) the sparse kernel with a one-state run."""
    one = np.ones(1)
    _get_sparse_kernel()(np.array([0, 1], dtype=np.int32), np.zeros(1, dtype=np.int32), one, 1.0,
                         np.zeros((1, 1)), np.ones((1, 1), dtype=complex), one, np.zeros(2))


class _TunnellingFlow:
    """Applies a run of alternating problem phases and tunnelling exponentials.

    Mid-sized spaces use the eigendecomposition of ``H0`` for ``exp(-i a H0)``.
    Tiny and large ones sum its Taylor series with sparse products in a compiled loop,
    substepping so each argument has norm at most 1 and truncating once the
    remainder bound drops below 1e-17.
    """

    def __init__(self, h0):
        self.dense = TINY_SPACE < h0.shape[0] <= DENSE_PROPAGATOR_CAP
        if self.dense:
            A = h0.toarray() if sp.issparse(h0) else np.asarray(h0)
            self.lam, self.V = np.linalg.eigh(A)
            self.Vt = np.ascontiguousarray(self.V.T)
        else:
            self.h0 = sp.csr_matrix(h0, dtype=float)
            self.h0.sort_indices()
            self.norm = float(abs(self.h0).sum(axis=1).max()) if self.h0.nnz else 0.0

    def run(self, E: np.ndarray, psi: np.ndarray, A: np.ndarray, P: np.ndarray) -> np.ndarray:
        """``psi`` after ``P[0], A[0], P[1], ..., A[-1], P[-1]`` (phases are ``exp(-i P E)``)."""
        if not self.dense:
            h = self.h0
            return _get_sparse_kernel()(h.indptr, h.indices, h.data, self.norm, E, psi, A, P)
        for j, a in enumerate(A):
            if P[j]:
                psi *= np.exp(-1j * P[j] * E)
            if a:
                # real matrix times complex block: multiply the float64 view
                c = (self.Vt @ psi.view(np.float64)).view(np.complex128)
                c *= np.exp(-1j * a * self.lam)[:, None]
                psi = np.ascontiguousarray(self.V @ c.view(np.float64)).view(np.complex128)
        if P[-1]:
            psi *= np.exp(-1j * P[-1] * E)
        return psi


def _snapshot_steps(steps: int, snapshots: int) -> list[int]:
    if snapshots < 2:
        return [steps]
    return sorted({round(j * steps / (snapshots - 1)) for j in range(snapshots)})


def _segment(schedule: Schedule, h: float, n0: int, n1: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of steps ``n0 .. n1-1``: tunnelling weights ``A`` and problem phases ``P``.

    Each step is three Strang substeps with Yoshida weights; neighbouring
    problem half-steps are merged, so ``len(P) == len(A) + 1``.
    """
    A, P = [], []
    t = n0 * h
    pending = 0.0
    for n in range(n0, n1):
        t = n * h  # re-anchor each step against drift in the running sum
        for w in (_W1, _W0, _W1):
            tau = w * h
            P.append(schedule.integrate_g(t - pending, t + tau / 2))
            t += tau / 2
            A.append(schedule.f(t) * tau)
            pending = tau / 2
            t += tau / 2
    P.append(schedule.integrate_g(t - pending, n1 * h) if n1 > n0 else 0.0)
    return np.array(A), np.array(P)


def propagate(
    h0,
    energies: np.ndarray,
    T: float,
    psi0: np.ndarray,
    steps: int | None = None,
    schedule: Schedule | None = None,
    snapshots: int = 0,
):
    """Evolve a block of states, one column per problem diagonal.

    ``energies`` is ``D x L`` (scaled problem energies per column) and ``psi0``
    is ``D`` or ``D x L``. Returns ``(psi_T, snaps)`` where ``snaps`` holds
    ``(t, psi)`` at evenly spaced times when ``snapshots >= 2``.
    """
    if T <= 0:
        raise ValueError("sweep length T must be positive")
    steps = default_steps(T) if steps is None else int(steps)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    schedule = schedule or linear_schedule(T)
    E = np.ascontiguousarray(energies, dtype=float)
    if E.ndim == 1:
        E = E[:, None]
    D, L = E.shape
    psi = np.array(psi0, dtype=complex, order="C")
    if psi.ndim == 1:
        psi = np.repeat(psi[:, None], L, axis=1)
    if psi.shape != (D, L):
        raise ValueError(f"state block {psi.shape} does not match energies {E.shape}")
    flow = _TunnellingFlow(h0)
    h = T / steps
    marks = _snapshot_steps(steps, snapshots) if snapshots >= 2 else [steps]
    snaps = []
    done = 0
    for mark in marks:
        if mark > done:
            A, Pz = _segment(schedule, h, done, mark)
            psi = flow.run(E, psi, A, Pz)
            done = mark
        if snapshots >= 2:
            snaps.append((mark * h, psi.copy()))
    return psi, snaps


def _drift(psi: np.ndarray) -> np.ndarray:
    return np.abs(np.linalg.norm(psi, axis=0) - 1.0)


def evolve_many(
    h0,
    energies: np.ndarray,
    T: float,
    psi0: np.ndarray,
    steps: int | None = None,
    schedule: Schedule | None = None,
    snapshots: int = 0,
    norm_tol: float = NORM_TOL,
) -> list[EvolutionResult]:
    """Batched :func:`evolve` sharing one tunnelling matrix across columns."""
    steps = default_steps(T) if steps is None else int(steps)
    psi, snaps = propagate(h0, energies, T, psi0, steps, schedule, snapshots)
    drift = _drift(psi)
    for _, s in snaps:
        drift = np.maximum(drift, _drift(s))
    out = []
    for j in range(psi.shape[1]):
        col = psi[:, j].copy()
        out.append(
            EvolutionResult(
                final_probabilities=np.abs(col) ** 2,
                final_state=col,
                norm_drift=float(drift[j]),
                valid=bool(drift[j] < norm_tol),
                steps=steps,
                trajectory=[(t, np.abs(s[:, j]) ** 2) for t, s in snaps],
            )
        )
    return out


def evolve(
    sweep: SweepHamiltonian,
    psi0,
    steps: int | None = None,
    snapshots: int | None = None,
    spectrum_k: int | None = None,
    norm_tol: float = NORM_TOL,
) -> EvolutionResult:
    """Integrate ``i dpsi/dt = H(t) psi`` from 0 to ``T``.

    ``snapshots`` requests that many evenly spaced probability snapshots (200
    when only ``spectrum_k`` is given). A run whose norm drifts by more than
    ``norm_tol`` comes back with ``valid=False``; nothing is renormalised.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > norm_tol:
        raise ValueError("initial state is not normalised")
    if snapshots is None:
        snapshots = DEFAULT_SNAPSHOTS if spectrum_k else 0
    (res,) = evolve_many(
        sweep.h0, sweep.hp.scaled_energies, sweep.T, psi0, steps,
        sweep.schedule, snapshots, norm_tol,
    )
    if spectrum_k:
        k = min(spectrum_k, sweep.dim)
        res.spectrum_track = [
            (t, instantaneous_spectrum(sweep, min(t, sweep.T), k)) for t, _ in res.trajectory
        ]
    return res


@dataclass(frozen=True)
class RankClass:
    rank: int
    norm_sq: int
    vectors: tuple[tuple[int, ...], ...]  # realised members of {v, -v}
    members: tuple[int, ...]  # Fock indices
    probability: float

    @property
    def representative(self) -> tuple[int, ...]:
        return min(self.vectors)


@dataclass(frozen=True)
class RankClassTable:
    classes: tuple[RankClass, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, i) -> RankClass:
        return self.classes[i]

    def probabilities(self) -> np.ndarray:
        return np.array([c.probability for c in self.classes])

    def norm_levels(self) -> list[int]:
        """Distinct nonzero squared norms, ascending."""
        return sorted({c.norm_sq for c in self.classes if c.norm_sq})

    def norm_probability(self, norm_sq: int) -> float:
        """Total probability of every class with the given squared norm."""
        return float(sum(c.probability for c in self.classes if c.norm_sq == norm_sq))

    def nonzero(self) -> list[RankClass]:
        return [c for c in self.classes if c.norm_sq]


def lattice_vectors(basis: FockBasis, B, cfg: OffsetConfig) -> np.ndarray:
    """Lattice vector (object-safe integers) realised by every Fock state."""
    rows = [tuple(int(v) for v in r) for r in B]
    if len(rows) == cfg.sites:
        X = basis.states - cfg.m
    elif len(rows) == cfg.n_lattice_sites:
        X = coeff_array(basis.states, cfg)
    else:
        raise ValueError(f"basis has {len(rows)} rows, configuration has {cfg.sites} sites")
    return X @ np.array(rows, dtype=np.int64)


def rank_classes(basis: FockBasis, B, cfg: OffsetConfig, probabilities) -> RankClassTable:
    """Group Fock states by the lattice vector they encode, identified up to sign.

    Classes are ordered by squared norm, ties broken by the lexicographically
    smallest member of ``{v, -v}``.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (basis.dim,):
        raise ValueError(f"{p.shape[0] if p.ndim else 0} probabilities for {basis.dim} states")
    V = lattice_vectors(basis, B, cfg)
    # flip rows whose first nonzero entry is positive, giving min(v, -v)
    first = np.argmax(V != 0, axis=1)
    lead = V[np.arange(len(V)), first]
    canon = np.where((lead > 0)[:, None], -V, V)
    keys, inverse = np.unique(canon, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    norms = (keys * keys).sum(axis=1)
    order = np.lexsort(tuple(keys.T[::-1]) + (norms,))
    probs = np.bincount(inverse, weights=p, minlength=len(keys))
    by_class = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[by_class], np.arange(len(keys) + 1))
    classes = []
    for rank, k in enumerate(order):
        members = by_class[bounds[k]:bounds[k + 1]]
        vecs = sorted({tuple(int(x) for x in V[i]) for i in members})
        classes.append(
            RankClass(rank, int(norms[k]), tuple(vecs), tuple(int(i) for i in members), float(probs[k]))
        )
    return RankClassTable(tuple(classes))


def write_series_csv(stream: TextIO, series: Iterable[tuple[float, Sequence[float]]]) -> None:
    """Dump ``(t, values)`` pairs as long-format ``t,index_or_rank,value`` rows."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "index_or_rank", "value"])
    for t, values in series:
        for i, v in enumerate(values):
            w.writerow([repr(float(t)), i, repr(float(v))])
