"""Command line entry point: ``bosesvp <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import algorithms as alg
from . import experiments as ex
from .fock import FockCapError
from .lattice import (
    LatticeError,
    basis_from_json,
    basis_to_json,
    format_basis,
    parse_basis,
    random_lattice,
    svp_enumerate,
)

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_ASSERT = 0, 2, 3, 4

# per-subcommand defaults that differ from ExperimentConfig's
SUB_DEFAULTS = {
    "kgrowth": {"dims": (3, 4, 5, 6, 7, 8), "count": 80},
    "dist": {"dims": (2,)},
    "payoff": {"dims": (2,)},
    "band": {"dims": (30,), "count": 100},
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", help="dimension list, e.g. 2,3 or 3..8")
    p.add_argument("--count", type=int, help="ensemble size")
    p.add_argument("--T", dest="T_grid", help="comma separated sweep lengths")
    p.add_argument("--m", dest="m_policy", help="offset: integer, paper-table, linear or oracle")
    p.add_argument("--steps", type=int, help="integrator steps per sweep")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", dest="formats", help="csv, json, svg (comma separated)")
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--basis", help="basis file (text rows or JSON); stdin when '-'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosesvp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "kgrowth": "coefficient growth of shortest vectors on HNF/LLL bases",
        "dist": "rank-class probability distributions of Single-Run ensembles",
        "payoff": "P(0), P(lambda1), P(lambda2) against sweep length",
        "levels": "probabilities and energy gaps along one sweep",
        "band": "band-diagonalisation of prime-determinant HNF bases",
        "example-2d": "two bosons, two sites: the worked small example",
        "single-run": "Single-Run on one basis",
        "multi-run": "Multi-Run on one basis",
        "oracle": "exact shortest vector by enumeration",
        "gen": "generate a random basis",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "gen":
            p.add_argument("--mode", default="uniform-entries",
                           choices=["uniform-entries", "prime-det-hnf", "good-bad-pair"])
        if name in ("single-run", "multi-run", "levels"):
            p.add_argument("--c", type=int, help="Multi-Run repetitions (default m)")
            p.add_argument("--K", type=int, help="particle count (levels without reservoir)")
            p.add_argument("--k", type=int, default=3, help="levels to track")
        if name == "band":
            p.add_argument("--j-max", type=int, default=ex.DEFAULT_J_MAX)
    return parser


def _config(args) -> ex.ExperimentConfig:
    base = ex.ExperimentConfig(name=args.command)
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ex.ConfigError(str(exc)) from exc
        base = ex.ExperimentConfig.from_ini(text)
    else:
        base = ex.ExperimentConfig.from_mapping(SUB_DEFAULTS.get(args.command, {}), base)
    flags = {
        "dims": args.dim, "count": args.count, "T_grid": args.T_grid, "m_policy": args.m_policy,
        "steps": args.steps, "seed": args.seed, "jobs": args.jobs, "out": args.out,
        "formats": args.formats,
    }
    return ex.ExperimentConfig.from_mapping({k: v for k, v in flags.items() if v is not None}, base)


def _read_basis(spec: str | None):
    if spec is None:
        return None
    text = sys.stdin.read() if spec == "-" else Path(spec).read_text()
    text = text.strip()
    return basis_from_json(text) if text.startswith("{") else parse_basis(text)


def _emit(cfg: ex.ExperimentConfig, output: ex.ExperimentOutput) -> None:
    paths = ex.save(output, cfg.out, cfg.formats)
    for p in paths:
        print(p)


def _single_T(cfg) -> float:
    return cfg.T_grid[0] if cfg.T_grid != ex.DEFAULT_T_GRID else alg.DEFAULT_T


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        B = _read_basis(args.basis)
    except (ex.ConfigError, LatticeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cmd = args.command
    try:
        if cmd == "kgrowth":
            _emit(cfg, ex.exp_kgrowth(cfg.dims, cfg.count, cfg.seed))
        elif cmd == "dist":
            _emit(cfg, ex.exp_distributions(cfg))
        elif cmd == "payoff":
            _emit(cfg, ex.exp_payoff(cfg))
        elif cmd == "band":
            _emit(cfg, ex.exp_banding(cfg.dims[0], cfg.count, cfg.seed, args.j_max))
        elif cmd == "levels":
            T = cfg.T_grid[0] if cfg.T_grid != ex.DEFAULT_T_GRID else 2.0
            basis = B if B is not None else ex.APPENDIX_BASIS
            m = int(cfg.m_policy) if cfg.m_policy.isdigit() else (0 if B is None else cfg.offset(len(basis), basis))
            K = args.K if args.K is not None or B is not None else 2
            _emit(cfg, ex.exp_energy_levels(basis, m, T, args.k, K, cfg.steps))
        elif cmd == "example-2d":
            T = cfg.T_grid[0] if cfg.T_grid != ex.DEFAULT_T_GRID else 2.0
            out = ex.exp_appendix_c(T, cfg.steps)
            _emit(cfg, out)
            failed = [k for k, ok in out.report["checks"].items() if not ok]
            if failed:
                print("checks failed: " + ", ".join(failed), file=sys.stderr)
                return EXIT_ASSERT
        elif cmd in ("single-run", "multi-run"):
            if B is None:
                print("error: --basis is required", file=sys.stderr)
                return EXIT_CONFIG
            m = cfg.offset(len(B), B)
            T = _single_T(cfg)
            if cmd == "single-run":
                report = alg.single_run(B, m, T, cfg.steps, target_max=cfg.target_max)
            else:
                report = alg.multi_run(B, m, args.c, T, cfg.steps, cfg.target_max)
            body = alg.report_to_dict(report)
            body["candidates"] = [c.__dict__ for c in alg.extract_candidates(report)]
            print(json.dumps(body, indent=2, default=list))
        elif cmd == "oracle":
            if B is None:
                print("error: --basis is required", file=sys.stderr)
                return EXIT_CONFIG
            r = svp_enumerate(B)
            print(json.dumps({"lambda1_sq": r.lambda1_sq, "minimizers": r.minimizers,
                              "inf_norm_xmin": r.inf_norm_xmin, "coeff_sum_abs": r.coeff_sum_abs},
                             indent=2))
        elif cmd == "gen":
            rng = np.random.default_rng(cfg.seed)
            out = random_lattice(cfg.dims[0], args.mode, rng)
            if args.mode == "good-bad-pair":
                out = out.bad
            print(basis_to_json(out) if "json" in cfg.formats else format_basis(out))
    except FockCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ex.ConfigError, LatticeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())
