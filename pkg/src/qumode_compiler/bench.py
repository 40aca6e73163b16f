"""Scalability benchmark: mean beamsplitter drop over Haar instances."""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .compiler import compile_unitary
from .numerics import haar_random_unitary
from .topology import Lattice, parse_device


@dataclass(frozen=True)
class BenchRow:
    n: int
    device: Lattice
    drops: tuple
    decompose_times: tuple
    total_times: tuple

    @property
    def mean_drop_pct(self):
        return 100.0 * float(np.mean(self.drops))

    @property
    def decompose_time(self):
        return float(np.mean(self.decompose_times))

    @property
    def total_time(self):
        return float(np.mean(self.total_times))


def default_device(n):
    """The ``3 x ceil(N/3)`` lattice."""
    return Lattice(3, math.ceil(n / 3))


def _one(args):
    n, device, tau, mode, seed = args
    rep = compile_unitary(haar_random_unitary(n, seed), device, mode, tau, seed=seed).report
    return rep.drop_fraction, rep.timings["decompose"], rep.timings["total"]


def run_bench(sizes, tau=0.95, repeats=5, seed=0, device=None, mode="full-opt", workers=1):
    """Instance ``i`` of size ``N`` uses Haar seed ``seed + i``."""
    rows = []
    for n in sizes:
        dev = default_device(n) if device is None else parse_device(device)
        jobs = [(n, dev, tau, mode, seed + i) for i in range(repeats)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                out = list(pool.map(_one, jobs))
        else:
            out = [_one(j) for j in jobs]
        drops, dt, tt = zip(*out)
        rows.append(BenchRow(n, dev, drops, dt, tt))
    return rows


def write_bench_csv(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "device", "mean_bs_drop_pct", "decompose_time_s", "total_time_s"])
    for r in rows:
        w.writerow([r.n, str(r.device), f"{r.mean_drop_pct:.2f}",
                    f"{r.decompose_time:.4f}", f"{r.total_time:.4f}"])
