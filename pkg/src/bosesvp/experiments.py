"""Seeded experiment harness: ensembles, summaries and figure data as CSV/JSON."""
from __future__ import annotations

import configparser
import io
import json
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import algorithms as alg
from .banding import DEFAULT_J_MAX, band_diagonalise, band_profile
from .evolution import (
    DEFAULT_SNAPSHOTS,
    evolve,
    initial_ground_state,
    rank_classes,
)
from .fock import FockBasis, OffsetConfig
from .hamiltonian import (
    DEFAULT_TARGET_MAX,
    SweepHamiltonian,
    augment_basis,
    build_problem_diagonal,
    build_tunnelling,
)
from .lattice import gram, hnf, lll_reduce, random_lattice, svp_enumerate

DEFAULT_T_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 10.0, 16.0, 32.0, 64.0, 100.0)
DEFAULT_COUNT = 50
MAX_RANK = 20
APPENDIX_BASIS = ((1, 2), (0, -2))


class ConfigError(ValueError):
    """Experiment configuration is malformed."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "dist"
    dims: tuple[int, ...] = (2,)
    count: int = DEFAULT_COUNT
    T_grid: tuple[float, ...] = DEFAULT_T_GRID
    m_policy: str = "paper-table"  # paper-table, linear, oracle, or an integer
    steps: int | None = None
    target_max: float = alg.SWEEP_TARGET_MAX
    seed: int = 0
    out: str = "out"
    formats: tuple[str, ...] = ("csv",)
    jobs: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("count must be positive")
        if any(d < 2 for d in self.dims):
            raise ConfigError("dimensions must be at least 2")
        if not self.T_grid or any(T <= 0 for T in self.T_grid):
            raise ConfigError("T grid must hold positive values")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        bad = set(self.formats) - {"csv", "json", "svg"}
        if bad:
            raise ConfigError(f"unknown formats {sorted(bad)}")
        if self.m_policy not in ("paper-table", "linear", "oracle") and not self.m_policy.isdigit():
            raise ConfigError(f"bad m policy {self.m_policy!r}")

    def offset(self, N: int, B=None) -> int:
        if self.m_policy.isdigit():
            return int(self.m_policy)
        return alg.estimate_offset(N, self.m_policy, B=B)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["experiment"] = {
            "name": self.name,
            "dims": ",".join(map(str, self.dims)),
            "count": str(self.count),
            "T_grid": ",".join(repr(T) for T in self.T_grid),
            "m_policy": self.m_policy,
            "steps": "" if self.steps is None else str(self.steps),
            "target_max": repr(self.target_max),
            "seed": str(self.seed),
            "out": self.out,
            "formats": ",".join(self.formats),
            "jobs": str(self.jobs),
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, section: str = "experiment") -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        if section not in cp:
            raise ConfigError(f"missing [{section}] section")
        return cls.from_mapping(dict(cp[section]))

    @classmethod
    def from_mapping(cls, data: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        """Overlay string or typed values onto ``base`` (defaults when omitted)."""
        conv = {
            "dims": _ints, "count": int, "T_grid": _floats, "target_max": float,
            "seed": int, "jobs": int, "formats": lambda s: tuple(v.strip() for v in s.split(",") if v.strip()),
            "steps": lambda s: int(s) if str(s).strip() else None,
        }
        names = {f.name.lower(): f.name for f in fields(cls)}
        kw = {}
        for key, value in data.items():
            if value is None:
                continue
            name = names.get(key.lower())
            if name is None:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                kw[name] = conv[name](value) if name in conv and isinstance(value, str) else value
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        return replace(base or cls(), **kw)


@dataclass(frozen=True)
class EnsembleSummary:
    n: int
    mean: float
    stderr: float
    p10: float
    lo: float
    hi: float


def percentile_nearest_rank(samples, q: float) -> float:
    s = sorted(samples)
    if not s:
        raise ValueError("no samples")
    return float(s[max(1, math.ceil(q / 100 * len(s))) - 1])


def summarise(samples) -> EnsembleSummary:
    x = np.asarray(list(samples), dtype=float)
    if x.size == 0:
        return EnsembleSummary(0, math.nan, math.nan, math.nan, math.nan, math.nan)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return EnsembleSummary(int(x.size), float(x.mean()), se,
                           percentile_nearest_rank(x, 10), float(x.min()), float(x.max()))


def linear_fit(xs, ys) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)``."""
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)


@dataclass
class ExperimentOutput:
    """Named tables (header plus rows) and a JSON-ready report."""

    name: str
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    report: dict = field(default_factory=dict)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def table_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def save(output: ExperimentOutput, out_dir, formats=("csv",)) -> list[Path]:
    """Write tables as CSV, the report as JSON and optional SVG plots."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        for key, (header, rows) in sorted(output.tables.items()):
            p = out / f"{key}.csv"
            p.write_text(table_csv(header, rows))
            written.append(p)
    if "json" in formats or output.report:
        p = out / f"{output.name}.json"
        p.write_text(json.dumps(output.report, indent=2, sort_keys=True) + "\n")
        written.append(p)
    if "svg" in formats:
        from .plots import render

        written += render(output, out)
    return written


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([seed, *tags])


def good_bad_ensemble(N: int, count: int, seed: int) -> list:
    """Seeded list of :class:`GoodBadPair` instances."""
    rng = _rng(seed, N)
    return [random_lattice(N, "good-bad-pair", rng) for _ in range(count)]


# ---- Fig. 3 style: coefficient growth ------------------------------------

def exp_kgrowth(dims, count: int = 80, seed: int = 0, lattices=None) -> ExperimentOutput:
    """Mean shortest-vector coefficient sizes on HNF and LLL bases per dimension.

    ``lattices`` optionally maps a dimension to explicit bases (else uniform
    random integer lattices are drawn).
    """
    rows, hnf_means, k_means = [], [], []
    for N in dims:
        if lattices is not None:
            bases = lattices[N]
        else:
            rng = _rng(seed, N)
            bases = [random_lattice(N, "uniform-entries", rng) for _ in range(count)]
        h_inf, l_inf, ks = [], [], []
        for B in bases:
            H = hnf(B)
            oh = svp_enumerate(H)
            h_inf.append(oh.inf_norm_xmin)
            ks.append(oh.coeff_sum_abs)
            l_inf.append(svp_enumerate(lll_reduce(B)).inf_norm_xmin)
        sh, sl, sk = summarise(h_inf), summarise(l_inf), summarise(ks)
        rows.append([N, sh.n, sh.mean, sh.stderr, sl.mean, sl.stderr, sk.mean, sk.stderr])
        hnf_means.append(sh.mean)
        k_means.append(sk.mean)
    header = ["dim", "n", "hnf_inf_mean", "hnf_inf_se", "lll_inf_mean", "lll_inf_se",
              "k_mean", "k_se"]
    out = ExperimentOutput("kgrowth", {"kgrowth": (header, rows)})
    fits = {}
    if len(dims) > 1:
        fits["hnf_inf"] = linear_fit(dims, hnf_means)
        fits["lll_inf"] = linear_fit(dims, [r[4] for r in rows])
        fits["k"] = linear_fit(dims, k_means)
    out.report = {"experiment": "kgrowth", "dims": list(dims), "count": count, "seed": seed,
                  "fits": {k: {"slope": s, "intercept": b} for k, (s, b) in fits.items()}}
    return out


# ---- Single-Run ensembles (Figs. 4-6) ------------------------------------

def _chunk_job(args):
    bases, m, T, steps, target_max = args
    return alg.single_run_batch(bases, m, T, steps, target_max=target_max, strict=False)


def _ensemble_reports(bases, offsets, T, steps, target_max, jobs):
    """Single-Run every basis (grouped by offset), preserving input order."""
    groups = defaultdict(list)
    for i, m in enumerate(offsets):
        groups[m].append(i)
    tasks, index = [], []
    for m, idx in sorted(groups.items()):
        parts = np.array_split(np.array(idx), min(jobs, len(idx)))
        for part in parts:
            tasks.append(([bases[i] for i in part], m, T, steps, target_max))
            index.append(part)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_chunk_job, tasks))
    else:
        results = [_chunk_job(t) for t in tasks]
    out = [None] * len(bases)
    for part, reps in zip(index, results):
        for i, r in zip(part, reps):
            out[int(i)] = r
    return out


def _ensemble(cfg: ExperimentConfig, N: int):
    pairs = good_bad_ensemble(N, cfg.count, cfg.seed)
    bases = [p.bad for p in pairs]
    offsets = [cfg.offset(N, B) for B in bases]
    return bases, offsets


def _rank_rows(reports, N, T):
    valid = [r for r in reports if r is not None]
    invalid = len(reports) - len(valid)
    rows = []
    for rank in range(MAX_RANK + 1):
        probs = [r.table[rank].probability if rank < len(r.table) else 0.0 for r in valid]
        is_l1 = [bool(rank < len(r.table) and r.table[rank].norm_sq == r.lambda1_sq) for r in valid]
        s = summarise(probs)
        rows.append([N, T, rank, s.mean, s.stderr, s.p10, float(np.mean(is_l1)) if valid else 0.0,
                     invalid])
    tail = [float(sum(c.probability for c in r.table.classes[MAX_RANK + 1:])) for r in valid]
    s = summarise(tail)
    rows.append([N, T, "tail", s.mean, s.stderr, s.p10, 0.0, invalid])
    return rows


def exp_distributions(cfg: ExperimentConfig) -> ExperimentOutput:
    """Mean probability of each rank class per (dimension, T)."""
    header = ["dim", "T", "rank", "mean", "se", "p10", "lambda1_share", "invalid_runs"]
    out = ExperimentOutput("dist")
    for N in cfg.dims:
        bases, offsets = _ensemble(cfg, N)
        for T in cfg.T_grid:
            reps = _ensemble_reports(bases, offsets, T, cfg.steps, cfg.target_max, cfg.jobs)
            out.tables[f"dist_N{N}_T{T:g}"] = (header, _rank_rows(reps, N, T))
    out.report = {"experiment": "dist", "config": cfg.to_ini()}
    return out


def exp_payoff(cfg: ExperimentConfig) -> ExperimentOutput:
    """Mean and 10th percentile of P(0), P(lambda_1), P(lambda_2) against T."""
    header = ["dim", "T", "quantity", "mean", "se", "p10", "n", "invalid_runs"]
    rows = []
    peaks = {}
    for N in cfg.dims:
        bases, offsets = _ensemble(cfg, N)
        curve = []
        for T in cfg.T_grid:
            reps = _ensemble_reports(bases, offsets, T, cfg.steps, cfg.target_max, cfg.jobs)
            valid = [r for r in reps if r is not None]
            invalid = len(reps) - len(valid)
            for q, get in (("p0", lambda r: r.p_zero), ("p_lambda1", lambda r: r.p_lambda1),
                           ("p_lambda2", lambda r: r.p_lambda2)):
                s = summarise(get(r) for r in valid)
                rows.append([N, T, q, s.mean, s.stderr, s.p10, s.n, invalid])
                if q == "p_lambda1":
                    curve.append(s.mean)
        peaks[N] = cfg.T_grid[int(np.argmax(curve))]
    out = ExperimentOutput("payoff", {"payoff": (header, rows)})
    out.report = {"experiment": "payoff", "config": cfg.to_ini(),
                  "lambda1_peak_T": {str(k): v for k, v in peaks.items()}}
    return out


# ---- Fig. 7: energy levels along one sweep ------------------------------

def exp_energy_levels(B=APPENDIX_BASIS, m: int = 0, T: float = 2.0, k: int = 3,
                      K: int | None = None, steps: int | None = None,
                      target_max: float | None = DEFAULT_TARGET_MAX,
                      snapshots: int = DEFAULT_SNAPSHOTS) -> ExperimentOutput:
    """Probabilities of the ``k`` lowest rank classes and gaps ``E_i(t) - E_0(t)``.

    With ``K`` the run has ``K`` bosons on the lattice sites only; otherwise it
    is a Single-Run with a reservoir and ``m (N + 1)`` bosons.
    """
    N = len(B)
    if K is None:
        cfg, Bx, fb = OffsetConfig(m, N, True), augment_basis(B), FockBasis(m * (N + 1), N + 1)
    else:
        cfg, Bx, fb = OffsetConfig(m, N), tuple(map(tuple, B)), FockBasis(K, N)
    hp = build_problem_diagonal(fb, Bx, cfg, target_max)
    sweep = SweepHamiltonian(build_tunnelling(fb), hp, T)
    res = evolve(sweep, initial_ground_state(fb), steps, snapshots, spectrum_k=min(k, fb.dim))
    probs_rows, gap_rows = [], []
    for (t, p), (_, ev) in zip(res.trajectory, res.spectrum_track):
        table = rank_classes(fb, Bx, cfg, p)
        for c in table.classes[:k]:
            probs_rows.append([t, c.rank, c.probability])
        for i, e in enumerate(ev):
            gap_rows.append([t, i, float(e - ev[0])])
    final = rank_classes(fb, Bx, cfg, res.final_probabilities)
    out = ExperimentOutput("levels", {
        "levels_prob": (["t", "index_or_rank", "value"], probs_rows),
        "levels_gap": (["t", "index_or_rank", "value"], gap_rows),
    })
    out.report = {
        "experiment": "levels", "basis": [list(r) for r in B], "m": m, "K": K, "T": T,
        "steps": res.steps, "norm_drift": res.norm_drift, "valid": res.valid,
        "final_classes": [{"rank": c.rank, "norm_sq": c.norm_sq, "vectors": [list(v) for v in c.vectors],
                           "probability": c.probability} for c in final.classes[:k]],
    }
    return out


# ---- Fig. 8: banding ----------------------------------------------------

def exp_banding(dim: int = 30, count: int = 100, seed: int = 0,
                j_max: int = DEFAULT_J_MAX) -> ExperimentOutput:
    """Band-diagonalise random prime-determinant HNF bases; profile and volume stats."""
    if dim > 60:
        raise ConfigError("banding experiment is limited to 60 dimensions")
    rng = _rng(seed, dim)
    results, preserved, checked = [], 0, 0
    for _ in range(count):
        H = random_lattice(dim, "prime-det-hnf", rng)
        r = band_diagonalise(H, j_max)
        if r.scalings == 0:
            checked += 1
            preserved += hnf(r.basis) == H
        results.append(r)
    prof = band_profile(results)
    extents = [e for r in results for e in r.eliminated_extents]
    vols = [r.volume_factor for r in results]
    heat_rows = [[i, j, float(prof.heat[i, j])] for i in range(dim) for j in range(dim)]
    offset_rows = [[d, v] for d, v in sorted(prof.mean_abs_entry_by_offset.items())]
    out = ExperimentOutput("band", {
        "band_heat": (["row", "col", "value"], heat_rows),
        "band_offsets": (["offset", "mean_rel_entry"], offset_rows),
        "band_instances": (["instance", "volume_factor", "scalings", "bandwidth", "extended",
                            "unresolved"],
                           [[i, r.volume_factor, r.scalings, r.bandwidth, r.extended, r.unresolved]
                            for i, r in enumerate(results)]),
    })
    out.report = {
        "experiment": "band", "dim": dim, "count": count, "seed": seed, "j_max": j_max,
        "mean_volume_factor": float(np.mean(vols)),
        "volume_factors_power_of_two": all(v & (v - 1) == 0 for v in vols),
        "preserved_when_unscaled": [preserved, checked],
        "extent_le_3_fraction": float(np.mean([e <= 3 for e in extents])) if extents else 1.0,
        "unresolved": sum(r.unresolved for r in results),
    }
    return out


# ---- Appendix C walk-through --------------------------------------------

def exp_appendix_c(T: float = 2.0, steps: int | None = None,
                   snapshots: int = DEFAULT_SNAPSHOTS) -> ExperimentOutput:
    """Two bosons on two sites with the small bad basis; full trajectory and checks."""
    fb = FockBasis(2, 2)
    cfg = OffsetConfig(0, 2)
    h0 = build_tunnelling(fb)
    hp = build_problem_diagonal(fb, APPENDIX_BASIS, cfg)
    psi0 = initial_ground_state(fb)
    res = evolve(SweepHamiltonian(h0, hp, T), psi0, steps, snapshots)
    table = rank_classes(fb, APPENDIX_BASIS, cfg, res.final_probabilities)
    top = int(np.argmax(res.final_probabilities))
    state = tuple(int(v) for v in fb.states[top])
    decoded = tuple(int(v) for v in np.array(state) @ np.array(APPENDIX_BASIS))
    traj = [[t, i, float(v)] for t, p in res.trajectory for i, v in enumerate(p)]
    p11 = float(res.final_probabilities[fb.rank((1, 1))])
    out = ExperimentOutput("example-2d", {"example2d_trajectory": (["t", "index_or_rank", "value"], traj)})
    out.report = {
        "experiment": "example-2d", "T": T, "steps": res.steps,
        "states": [list(map(int, s)) for s in fb.states],
        "gram": [list(r) for r in gram(APPENDIX_BASIS)],
        "h0": h0.toarray().tolist(),
        "psi0": psi0.real.tolist(),
        "energies": [int(e) for e in hp.exact_energies],
        "final_probabilities": res.final_probabilities.tolist(),
        "norm_drift": res.norm_drift,
        "most_likely_state": list(state),
        "decoded_vector": list(decoded),
        "p_11": p11,
        "checks": {"p_11_above_0.9": p11 > 0.9, "decoded_is_(1,0)": decoded == (1, 0),
                   "valid": res.valid},
        "classes": [{"rank": c.rank, "norm_sq": c.norm_sq, "probability": c.probability}
                    for c in table.classes],
    }
    return out
