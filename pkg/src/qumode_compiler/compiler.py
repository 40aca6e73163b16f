"""End-to-end compile pipeline for the four configurations.

========== ============ ============= =======================
mode       pattern      mapping       dropout
========== ============ ============= =======================
baseline   chain        identity      none
rot-cut    chain        identity      deterministic angle cut
decomp-opt zigzag tree  identity      deterministic angle cut
full-opt   zigzag tree  greedy search cut + sampling model
========== ============ ============= =======================
"""

import time
from dataclasses import dataclass

import numpy as np

from .circuit import CompiledCircuit, CompileReport, angle_histogram, check_mode, gate_counts, pattern_for
from .decomposer import build_plan, decompose, reconstruction_fidelity
from .dropout import DEFAULT_ITERATIONS, DEFAULT_POWERS, find_threshold, select_power_k
from .mapper import SMALL_ANGLE, partition_columns, select_map_k
from .numerics import PermutationPair
from .topology import parse_device
from .validation import check_int_list, check_positive_int, check_tau, check_unitary

DEFAULT_TAU = 0.999


@dataclass(frozen=True)
class CompileResult:
    circuit: CompiledCircuit
    report: CompileReport
    decomposition: object
    permuted_unitary: np.ndarray
    mapping: object = None
    model: object = None


def compile_unitary(u, device, mode="full-opt", tau=DEFAULT_TAU, map_k=None,
                    power_k=DEFAULT_POWERS, iterations=DEFAULT_ITERATIONS, seed=0,
                    sort_main_path=False):
    """Compile ``u`` for ``device`` (an ``"RxC"`` string or :class:`Lattice`).

    ``map_k`` is a list of indicator ranks to try (``None`` for the default
    third/half/two-thirds of N); it only matters for ``full-opt``.
    """
    t_start = time.perf_counter()
    u = check_unitary(u, min_dim=2)
    n = u.shape[0]
    check_mode(mode)
    tau = check_tau(tau)
    power_k = check_int_list(power_k, "power_k")
    iterations = check_positive_int(iterations, "iterations")
    if map_k is not None:
        map_k = check_int_list(map_k, "map_k")
    lattice = parse_device(device)
    if lattice.size < n:
        raise ValueError(f"device {lattice} has {lattice.size} qumodes, unitary needs {n}")

    plan = build_plan(pattern_for(mode, lattice, n))
    timings = {"map": 0.0, "decompose": 0.0, "dropout": 0.0}

    mapping = None
    if mode == "full-opt":
        t0 = time.perf_counter()
        mapping = select_map_k(u, partition_columns(plan.tree), plan, map_k, sort_main_path)
        timings["map"] = time.perf_counter() - t0
        perms, u_per = mapping.permutations, mapping.permuted_unitary
    else:
        perms, u_per = PermutationPair.identity(n), u

    t0 = time.perf_counter()
    d = decompose(u_per, plan)
    timings["decompose"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model = None
    theta_cut = 0.0
    if mode != "baseline":
        theta_cut, kept = find_threshold(d, u_per, tau)
        if mode == "full-opt":
            model = select_power_k(d, u_per, tau, theta_cut, kept, power_k, iterations, seed)
    dropped = np.abs(d.thetas) < theta_cut
    fid = reconstruction_fidelity(d, u_per, ~dropped)
    timings["dropout"] = time.perf_counter() - t0

    circuit = CompiledCircuit.from_decomposition(d, lattice, perms, mode, dropped)
    bs_kept, ps = gate_counts(circuit)
    edges, counts = angle_histogram(d.thetas)
    dropout_info = None
    if model is not None:
        dropout_info = {
            "tau": model.tau,
            "theta_cut": model.theta_cut,
            "kept_count": model.kept_count,
            "power_k": model.power_k,
            "iterations": model.iterations,
            "mean_fidelity": model.mean_fidelity,
            "power_candidates": {str(k): v for k, v in model.candidate_fidelities.items()},
        }
    timings["total"] = time.perf_counter() - t_start
    report = CompileReport(
        n=n,
        mode=mode,
        device=lattice,
        tau=tau,
        seed=int(seed),
        bs_total=circuit.n_gates,
        bs_kept=bs_kept,
        bs_dropped=circuit.n_gates - bs_kept,
        ps_count=ps,
        mzi_ps_count=circuit.n_gates,
        fidelity_deterministic=fid,
        mean_sampled_fidelity=None if model is None else model.mean_fidelity,
        theta_cut=float(theta_cut),
        power_k=None if model is None else model.power_k,
        map_k=None if mapping is None else mapping.map_k,
        small_angle_count=int(np.count_nonzero(np.abs(d.thetas) < SMALL_ANGLE)),
        histogram_edges=edges,
        histogram_counts=counts,
        dropout=dropout_info,
        timings=timings,
    )
    return CompileResult(circuit, report, d, u_per, mapping, model)
