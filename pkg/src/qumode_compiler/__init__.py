"""Lattice-aware compiler for linear-interferometer unitaries.

Decomposes an N x N unitary into N(N-1)/2 MZI blocks along a tree-shaped
elimination pattern embedded in a 2-D lattice, relabels qumodes to favour
small rotation angles, and drops near-identity beamsplitters either
deterministically or per shot.
"""

__version__ = "0.1.0"

from .circuit import CompiledCircuit, CompileReport, angle_histogram, gate_counts, read_circuit, write_circuit
from .compiler import compile_unitary
from .decomposer import Decomposition, MziBlock, build_plan, decompose, reconstruct, reconstruction_fidelity
from .dropout import DropoutModel, find_threshold, fit_dropout, sample_kept_set
from .estimator import InterferometerCompiler
from .mapper import MappingResult, RegionPartition, partition_columns, select_map_k
from .numerics import PermutationPair, apply_permutations, fidelity, haar_random_unitary
from .topology import Lattice, PatternTree, build_chain_pattern, device_pattern, parse_device, zigzag_embed

__all__ = [
    "CompileReport",
    "CompiledCircuit",
    "Decomposition",
    "DropoutModel",
    "InterferometerCompiler",
    "Lattice",
    "MappingResult",
    "MziBlock",
    "PatternTree",
    "PermutationPair",
    "RegionPartition",
    "angle_histogram",
    "apply_permutations",
    "build_chain_pattern",
    "build_plan",
    "compile_unitary",
    "decompose",
    "device_pattern",
    "fidelity",
    "find_threshold",
    "fit_dropout",
    "gate_counts",
    "haar_random_unitary",
    "parse_device",
    "partition_columns",
    "read_circuit",
    "reconstruct",
    "reconstruction_fidelity",
    "sample_kept_set",
    "select_map_k",
    "write_circuit",
    "zigzag_embed",
]
