"""Shortest lattice vectors from adiabatic sweeps of bosons on a chain.

Exact lattice tools (HNF, LLL, enumeration), Fock-space Hamiltonians, a
unitary sweep propagator and the Multi-Run / Single-Run solvers.
"""
from .algorithms import (
    estimate_offset,
    extract_candidates,
    multi_run,
    multi_run_batch,
    single_run,
    single_run_batch,
)
from .banding import band_diagonalise, band_profile
from .evolution import (
    evolve,
    evolve_many,
    initial_ground_state,
    instantaneous_spectrum,
    measure_probabilities,
    rank_classes,
)
from .fock import FockBasis, OffsetConfig, dimension, dimension_single_run, qubit_bound
from .hamiltonian import (
    SweepHamiltonian,
    augment_basis,
    build_problem_diagonal,
    build_tunnelling,
    physical_decomposition,
)
from .lattice import gram, hnf, lll_reduce, random_lattice, svp_enumerate

__version__ = "0.1.0"
