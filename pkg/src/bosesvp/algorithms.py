"""Multi-Run and Single-Run adiabatic SVP solvers and their reports."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .evolution import (
    EvolutionError,
    RankClassTable,
    default_steps,
    evolve_many,
    initial_ground_state,
    rank_classes,
)
from .fock import FockBasis, OffsetConfig, fock_to_coeff
from .hamiltonian import augment_basis, build_problem_diagonal, build_tunnelling
from .lattice import SVP_DIM_CAP, as_basis, lll_reduce, svp_enumerate, vec_mat

SCHEMA_VERSION = 1
# Problem spectra are stretched to this maximum before sweeping. Much larger
# than the hopping scale, so the final ground state is well separated.
SWEEP_TARGET_MAX = 1000.0
DEFAULT_T = 100.0
PAPER_OFFSETS = {2: 3, 3: 4, 4: 4}
# largest Fock space a sweep is attempted on
EVOLUTION_CAP = 200_000


@dataclass(frozen=True)
class RunParameters:
    m: int
    T: float = DEFAULT_T
    steps: int | None = None
    target_max: float = SWEEP_TARGET_MAX
    K: int | None = None
    K_S: int | None = None
    c: int | None = None
    seed: int | None = None

    def resolved_steps(self) -> int:
        return default_steps(self.T) if self.steps is None else self.steps


def estimate_offset(N: int, mode: str = "paper-table", alpha: float = 1.0, B=None) -> int:
    """Offset ``m`` from a lookup table, a linear rule, or the exact oracle."""
    if N < 2:
        raise ValueError("need N >= 2")
    if mode == "oracle":
        if B is None:
            raise ValueError("oracle mode needs the basis")
        return svp_enumerate(B).inf_norm_xmin
    if mode == "paper-table" and N in PAPER_OFFSETS:
        return PAPER_OFFSETS[N]
    if mode not in ("paper-table", "linear"):
        raise ValueError(f"unknown offset mode {mode!r}")
    return max(3, math.ceil(alpha * N))


@dataclass(frozen=True)
class Candidate:
    vector: tuple[int, ...]
    norm_sq: int
    probability: float
    gamma: float | None = None


@dataclass(frozen=True)
class KRun:
    K: int
    state: tuple[int, ...]
    coefficients: tuple[int, ...]
    vector: tuple[int, ...]
    norm_sq: int
    probability: float
    norm_drift: float


@dataclass(frozen=True)
class MultiRunReport:
    per_k: tuple[KRun, ...]
    best: KRun
    runs: int
    params: RunParameters

    @property
    def best_norm_sq(self) -> int:
        return self.best.norm_sq


def _check_valid(results) -> None:
    bad = [r.norm_drift for r in results if not r.valid]
    if bad:
        raise EvolutionError(f"norm drift {max(bad):.3g} exceeds tolerance")


def multi_run_batch(bases, m: int, c: int | None = None, T: float = DEFAULT_T,
                    steps: int | None = None, target_max: float = SWEEP_TARGET_MAX,
                    ) -> list[MultiRunReport]:
    """Multi-Run on several same-dimension lattices sharing one offset.

    Each particle number is one batched evolution over all lattices, since the
    tunnelling matrix depends only on ``(K, N)``.
    """
    bases = [as_basis(B) for B in bases]
    N = len(bases[0])
    if any(len(B) != N for B in bases):
        raise ValueError("batched lattices must share a dimension")
    c = m if c is None else c
    if c < 1:
        raise ValueError("Multi-Run needs c >= 1")
    cfg = OffsetConfig(m, N)
    runs = [[] for _ in bases]
    for i in range(1, c + 1):
        K = N * m + i
        fb = FockBasis(K, N, cap=EVOLUTION_CAP)
        hps = [build_problem_diagonal(fb, B, cfg, target_max) for B in bases]
        E = np.column_stack([hp.scaled_energies for hp in hps])
        results = evolve_many(build_tunnelling(fb), E, T, initial_ground_state(fb), steps)
        _check_valid(results)
        for B, hp, res, acc in zip(bases, hps, results, runs):
            r = int(np.argmax(res.final_probabilities))
            state = tuple(int(v) for v in fb.states[r])
            x = fock_to_coeff(state, cfg)
            v = vec_mat(x, B)
            norm = sum(a * a for a in v)
            # certify the diagonal entry against an exact recomputation
            if norm != int(hp.exact_energies[r]):
                raise AssertionError("energy diagonal disagrees with exact norm")
            acc.append(KRun(K, state, x, v, norm, float(res.final_probabilities[r]), res.norm_drift))
    params = RunParameters(m=m, T=T, steps=steps, target_max=target_max, c=c)
    return [
        MultiRunReport(tuple(acc), min(acc, key=lambda k: (k.norm_sq, -k.probability)), c, params)
        for acc in runs
    ]


def multi_run(B, m: int, c: int | None = None, T: float = DEFAULT_T, steps: int | None = None,
              target_max: float = SWEEP_TARGET_MAX) -> MultiRunReport:
    """Sweep once per particle number ``K = N m + i``, ``i = 1..c``, keeping the likeliest state."""
    return multi_run_batch([B], m, c, T, steps, target_max)[0]


@dataclass(frozen=True)
class SingleRunReport:
    table: RankClassTable
    p_rank: tuple[float, float, float]  # first three rank classes
    p_zero: float
    p_lambda1: float  # all classes at the smallest nonzero norm
    p_lambda2: float  # ... and at the next norm
    lambda1_sq: int | None  # exact oracle (or LLL reference, see gamma_reference)
    gamma: float | None  # most probable nonzero class against lambda1_sq
    gamma_reference: str | None
    norm_drift: float
    params: RunParameters = field(compare=False, default=None)


def _reference_norm(B) -> tuple[int | None, str | None]:
    if len(B) <= SVP_DIM_CAP:
        return svp_enumerate(B).lambda1_sq, "oracle"
    return min(sum(v * v for v in r) for r in lll_reduce(B)), "lll"


def _single_report(table: RankClassTable, ref, drift: float, params: RunParameters) -> SingleRunReport:
    lam, label = ref
    probs = [c.probability for c in table.classes[:3]]
    probs += [0.0] * (3 - len(probs))
    levels = table.norm_levels()
    p1 = table.norm_probability(levels[0]) if levels else 0.0
    p2 = table.norm_probability(levels[1]) if len(levels) > 1 else 0.0
    zero = [c.probability for c in table.classes if c.norm_sq == 0]
    gamma = None
    nz = table.nonzero()
    if lam and nz:
        top = max(nz, key=lambda c: (c.probability, -c.norm_sq))
        gamma = math.sqrt(top.norm_sq / lam)
    return SingleRunReport(table, tuple(probs), zero[0] if zero else 0.0, p1, p2,
                           lam, gamma, label, drift, params)


def single_run_batch(bases, m: int, T: float = DEFAULT_T, steps: int | None = None,
                     K_S: int | None = None, target_max: float = SWEEP_TARGET_MAX,
                     oracle: bool = True, strict: bool = True) -> list[SingleRunReport | None]:
    """Single-Run on several same-dimension lattices in one batched evolution.

    With ``strict=False`` runs over the norm tolerance come back as ``None``
    instead of raising.
    """
    bases = [as_basis(B) for B in bases]
    N = len(bases[0])
    if any(len(B) != N for B in bases):
        raise ValueError("batched lattices must share a dimension")
    K_S = m * (N + 1) if K_S is None else K_S
    cfg = OffsetConfig(m, N, has_reservoir=True)
    fb = FockBasis(K_S, N + 1, cap=EVOLUTION_CAP)
    primed = [augment_basis(B) for B in bases]
    E = np.column_stack([build_problem_diagonal(fb, Bp, cfg, target_max).scaled_energies
                         for Bp in primed])
    results = evolve_many(build_tunnelling(fb), E, T, initial_ground_state(fb), steps)
    if strict:
        _check_valid(results)
    params = RunParameters(m=m, T=T, steps=steps, target_max=target_max, K_S=K_S)
    out = []
    for B, Bp, res in zip(bases, primed, results):
        if not res.valid:
            out.append(None)
            continue
        table = rank_classes(fb, Bp, cfg, res.final_probabilities)
        ref = _reference_norm(B) if oracle else (None, None)
        out.append(_single_report(table, ref, res.norm_drift, params))
    return out


def single_run(B, m: int, T: float = DEFAULT_T, steps: int | None = None, K_S: int | None = None,
               target_max: float = SWEEP_TARGET_MAX, oracle: bool = True) -> SingleRunReport:
    """One sweep with a reservoir site; every particle count up to ``K_S`` is covered at once."""
    return single_run_batch([B], m, T, steps, K_S, target_max, oracle)[0]


def extract_candidates(report, top_k: int = 5) -> list[Candidate]:
    """Nonzero outcomes by decreasing probability, with their approximation factor."""
    if isinstance(report, MultiRunReport):
        # the report keeps no basis, so gamma is relative to the best run
        pool = sorted(report.per_k, key=lambda k: -k.probability)
        lam = min(k.norm_sq for k in report.per_k)
        return [Candidate(k.vector, k.norm_sq, k.probability, math.sqrt(k.norm_sq / lam))
                for k in pool[:top_k]]
    lam = report.lambda1_sq
    nz = sorted(report.table.nonzero(), key=lambda c: (-c.probability, c.rank))
    out = []
    for c in nz[:top_k]:
        if c.probability <= 0:
            break
        g = math.sqrt(c.norm_sq / lam) if lam else None
        out.append(Candidate(c.representative, c.norm_sq, c.probability, g))
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def report_to_dict(report) -> dict:
    """Plain JSON-ready form of a run report, tagged with the schema version."""
    if isinstance(report, MultiRunReport):
        body = {
            "kind": "multi-run",
            "params": asdict(report.params),
            "runs": report.runs,
            "per_k": [asdict(k) for k in report.per_k],
            "best": asdict(report.best),
        }
    else:
        body = {
            "kind": "single-run",
            "params": asdict(report.params) if report.params else None,
            "p_rank": report.p_rank,
            "p_zero": report.p_zero,
            "p_lambda1": report.p_lambda1,
            "p_lambda2": report.p_lambda2,
            "lambda1_sq": report.lambda1_sq,
            "gamma": report.gamma,
            "gamma_reference": report.gamma_reference,
            "norm_drift": report.norm_drift,
            "classes": [
                {"rank": c.rank, "norm_sq": c.norm_sq, "vectors": c.vectors,
                 "probability": c.probability, "members": len(c.members)}
                for c in report.table.classes
            ],
        }
    return _jsonable({"schema_version": SCHEMA_VERSION, **body})


def reachable_coefficients(B, m: int, K: int, reservoir: int | None = None) -> set[tuple[int, ...]]:
    """Coefficient vectors a sweep can encode: ``K`` bosons on ``N`` sites, or
    ``K`` total with exactly ``reservoir`` of them parked in the reservoir."""
    N = len(as_basis(B))
    if reservoir is None:
        fb, cfg = FockBasis(K, N), OffsetConfig(m, N)
        return {fock_to_coeff(s, cfg) for s in fb.states}
    fb, cfg = FockBasis(K, N + 1), OffsetConfig(m, N, has_reservoir=True)
    return {fock_to_coeff(s, cfg) for s in fb.states if s[-1] == reservoir}


__all__ = [
    "Candidate", "KRun", "MultiRunReport", "RunParameters", "SingleRunReport",
    "estimate_offset", "extract_candidates", "multi_run", "multi_run_batch",
    "reachable_coefficients", "report_to_dict", "single_run", "single_run_batch",
]
