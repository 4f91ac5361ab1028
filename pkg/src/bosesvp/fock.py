"""Bosonic occupation-number bases, ranking, and the offset/reservoir mapping."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

FOCK_CAP = 2_000_000


class FockCapError(ValueError):
    """Requested Fock basis is larger than the enumeration cap."""


def dimension(K: int, M: int) -> int:
    """Number of ways to place ``K`` bosons on ``M`` sites."""
    if K < 0 or M < 1:
        raise ValueError(f"need K >= 0 and M >= 1, got K={K}, M={M}")
    return math.comb(K + M - 1, M - 1)


def dimension_single_run(K_S: int, N: int) -> int:
    """States with at most ``K_S`` bosons on ``N`` sites (equivalently ``K_S`` on ``N+1``)."""
    if K_S < 0 or N < 1:
        raise ValueError(f"need K_S >= 0 and N >= 1, got K_S={K_S}, N={N}")
    return math.comb(K_S + N, N)


@lru_cache(maxsize=64)
def _states(K: int, M: int) -> np.ndarray:
    if M == 1:
        return np.array([[K]], dtype=np.int64)
    blocks = []
    for n in range(K, -1, -1):
        rest = _states(K - n, M - 1)
        blocks.append(np.hstack([np.full((len(rest), 1), n, dtype=np.int64), rest]))
    return np.vstack(blocks)


class FockBasis:
    """All occupation vectors of ``K`` bosons on ``M`` sites.

    States are ordered lexicographically descending, so ``(K, 0, ..., 0)`` has
    rank 0 and ``(0, ..., 0, K)`` is last. Ranking is closed form (combinatorial
    number system) and costs O(M).
    """

    def __init__(self, K: int, M: int, cap: int = FOCK_CAP):
        D = dimension(K, M)
        if D > cap:
            raise FockCapError(f"Fock basis with K={K}, M={M} has D={D} states (cap {cap})")
        self.particles = K
        self.sites = M
        self.dim = D
        self.states = _states(K, M)
        self.states.setflags(write=False)
        # _count[r, s] = states of r bosons on s sites, with s = 0 meaning "none"
        self._count = np.zeros((K + 2, M + 1), dtype=np.int64)
        for r in range(K + 1):
            for s in range(1, M + 1):
                self._count[r, s] = dimension(r, s)

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"FockBasis(K={self.particles}, M={self.sites}, D={self.dim})"

    def rank(self, state: Sequence[int]) -> int:
        state = tuple(int(v) for v in state)
        if len(state) != self.sites or sum(state) != self.particles or min(state) < 0:
            raise ValueError(f"{state} is not a state of {self!r}")
        r, rem = 0, self.particles
        for i, n in enumerate(state[:-1]):
            # every state whose site-i occupancy exceeds n comes earlier
            if rem - n - 1 >= 0:
                r += dimension_single_run(rem - n - 1, self.sites - i - 1)
            rem -= n
        return r

    def rank_many(self, states: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`rank` for an array of shape ``(L, M)``."""
        states = np.asarray(states, dtype=np.int64)
        M = self.sites
        rem = np.full(len(states), self.particles, dtype=np.int64)
        r = np.zeros(len(states), dtype=np.int64)
        for i in range(M - 1):
            n = states[:, i]
            k = rem - n - 1
            ok = k >= 0
            # dimension_single_run(k, M-i-1) == dimension(k, M-i)
            r[ok] += self._count[k[ok], M - i]
            rem = rem - n
        return r

    def unrank(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise IndexError(f"rank {index} outside [0, {self.dim})")
        out, rem = [], self.particles
        for i in range(self.sites - 1):
            for n in range(rem, -1, -1):
                block = dimension(rem - n, self.sites - i - 1)
                if index < block:
                    out.append(n)
                    rem -= n
                    break
                index -= block
        out.append(rem)
        return tuple(out)


def format_state(state: Sequence[int]) -> str:
    return "(" + ",".join(str(int(v)) for v in state) + ")"


@dataclass(frozen=True)
class OffsetConfig:
    """Offset ``m`` per lattice site, optionally with a reservoir as site ``N+1``."""

    m: int
    n_lattice_sites: int
    has_reservoir: bool = False

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("offset m must be non-negative")

    @property
    def sites(self) -> int:
        return self.n_lattice_sites + int(self.has_reservoir)


def fock_to_coeff(state: Sequence[int], cfg: OffsetConfig) -> tuple[int, ...]:
    """Coefficient vector ``x_i = n_i - m`` over the lattice sites."""
    if len(state) != cfg.sites:
        raise ValueError(f"state has {len(state)} sites, configuration expects {cfg.sites}")
    return tuple(int(n) - cfg.m for n in state[: cfg.n_lattice_sites])


def coeff_array(states: np.ndarray, cfg: OffsetConfig) -> np.ndarray:
    """Vectorised :func:`fock_to_coeff` over the rows of ``states``."""
    states = np.asarray(states)
    if states.shape[1] != cfg.sites:
        raise ValueError(f"states have {states.shape[1]} sites, configuration expects {cfg.sites}")
    return states[:, : cfg.n_lattice_sites] - cfg.m


@dataclass(frozen=True)
class ScalingReport:
    N: int
    c: int
    K_S: int
    exact_log2_D: float
    stirling_bound_log2: float


def qubit_bound(N: int, c: int = 1) -> ScalingReport:
    """Exact single-run Hilbert-space size for ``m = cN`` against its Stirling bound.

    ``log2 D`` with ``D = (K_S + N)! / (K_S! N!)`` and ``K_S = cN^2 + cN`` is
    compared with ``log2[(e (cN + c + 1))^N / sqrt(2 pi N)]``.
    """
    if N < 2 or c < 1:
        raise ValueError("need N >= 2 and c >= 1")
    K_S = c * N * N + c * N
    exact = math.log2(dimension_single_run(K_S, N))
    bound = N * math.log2(math.e * (c * N + c + 1)) - 0.5 * math.log2(2 * math.pi * N)
    return ScalingReport(N, c, K_S, exact, bound)
