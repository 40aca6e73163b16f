"""Compiled-circuit data model, file formats, gate counts and histograms.

A circuit file is plain JSON::

    {"n": 24, "device": {"rows": 6, "cols": 6},
     "input_map": [...], "output_map": [...],
     "gates": [{"m": 3, "n": 4, "theta": 0.12, "phi": -1.3, "dropped": false}, ...],
     "final_phases": [...], "mode": "full-opt"}

Floats are written with ``repr`` precision, which round-trips every double
exactly. The physical layout is not stored; it is rebuilt from
``(device, mode, n)`` because pattern construction is deterministic.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .decomposer import Decomposition, reconstruct
from .numerics import PermutationPair, apply_permutations
from .topology import Lattice, build_chain_pattern, device_pattern

MODES = ("baseline", "rot-cut", "decomp-opt", "full-opt")
CHAIN_MODES = ("baseline", "rot-cut")
HISTOGRAM_BINS = 50

_CIRCUIT_KEYS = {"n", "device", "input_map", "output_map", "gates", "final_phases", "mode"}
_GATE_KEYS = {"m", "n", "theta", "phi", "dropped"}


class CircuitFormatError(ValueError):
    """A circuit file that does not follow the schema."""


def check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    return mode


def pattern_for(mode, device, n):
    """The pattern tree a compile in ``mode`` uses on ``device``."""
    if check_mode(mode) in CHAIN_MODES:
        return build_chain_pattern(n, device)
    return device_pattern(device, n)


@dataclass(frozen=True)
class CompiledCircuit:
    n_qumodes: int
    device: Lattice
    input_map: np.ndarray
    output_map: np.ndarray
    ms: np.ndarray
    ns: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    dropped: np.ndarray
    final_phases: np.ndarray
    mode: str

    def __post_init__(self):
        check_mode(self.mode)
        k = len(self.thetas)
        for name in ("ms", "ns", "phis", "dropped"):
            if len(getattr(self, name)) != k:
                raise ValueError(f"gate field {name} has {len(getattr(self, name))} entries, expected {k}")
        if len(self.final_phases) != self.n_qumodes:
            raise ValueError("final_phases must have one entry per qumode")

    @classmethod
    def from_decomposition(cls, d, device, permutations, mode, dropped=None):
        if dropped is None:
            dropped = np.zeros(len(d), dtype=bool)
        input_map, output_map = permutations.col_perm, permutations.row_perm
        return cls(d.source_dim, device, np.array(input_map), np.array(output_map),
                   d.ms.copy(), d.ns.copy(), d.thetas.copy(), d.phis.copy(),
                   np.asarray(dropped, dtype=bool).copy(), d.final_phases.copy(), mode)

    @property
    def n_gates(self):
        return len(self.thetas)

    @property
    def permutations(self):
        return PermutationPair(self.output_map, self.input_map)

    def decomposition(self):
        return Decomposition(self.ms, self.ns, self.thetas, self.phis, self.final_phases,
                             self.n_qumodes)

    def with_dropped(self, dropped):
        dropped = np.asarray(dropped, dtype=bool)
        if dropped.shape != (self.n_gates,):
            raise ValueError(f"dropped mask has shape {dropped.shape}, expected ({self.n_gates},)")
        return CompiledCircuit(self.n_qumodes, self.device, self.input_map, self.output_map,
                               self.ms, self.ns, self.thetas, self.phis, dropped.copy(),
                               self.final_phases, self.mode)

    def physical_unitary(self):
        """Unitary on physical qumodes, dropped blocks reduced to their phase."""
        return reconstruct(self.decomposition(), ~self.dropped)

    def logical_unitary(self):
        """Physical unitary with the relabeling undone."""
        return apply_permutations(self.physical_unitary(), self.permutations.inverse())

    def layout(self):
        return pattern_for(self.mode, self.device, self.n_qumodes)

    def violations(self):
        """Gates acting on qumodes that are not lattice neighbours."""
        tree = self.layout()
        bad = []
        for i, (m, n) in enumerate(zip(self.ms, self.ns)):
            if not self.device.adjacent(tree.coords[m], tree.coords[n]):
                bad.append(f"gate {i} on qumodes ({m}, {n}) at {tree.coords[m]}, {tree.coords[n]}")
        return bad

    def __eq__(self, other):
        if not isinstance(other, CompiledCircuit):
            return NotImplemented
        return (self.n_qumodes == other.n_qumodes and self.device == other.device
                and self.mode == other.mode
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("input_map", "output_map", "ms", "ns", "thetas", "phis",
                                  "dropped", "final_phases")))

    __hash__ = None


def gate_counts(c):
    """``(bs_kept, ps_count)``; every MZI keeps its phase shifter, plus N terminal phases."""
    bs_kept = int(np.count_nonzero(~c.dropped))
    return bs_kept, c.n_gates + c.n_qumodes


def circuit_to_dict(c):
    return {
        "n": int(c.n_qumodes),
        "device": {"rows": c.device.rows, "cols": c.device.cols},
        "input_map": [int(x) for x in c.input_map],
        "output_map": [int(x) for x in c.output_map],
        "gates": [
            {"m": int(m), "n": int(n), "theta": float(t), "phi": float(p), "dropped": bool(dr)}
            for m, n, t, p, dr in zip(c.ms, c.ns, c.thetas, c.phis, c.dropped)
        ],
        "final_phases": [float(x) for x in c.final_phases],
        "mode": c.mode,
    }


def _require_int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise CircuitFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _require_float(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise CircuitFormatError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _int_list(data, key, n):
    seq = data[key]
    if not isinstance(seq, list) or len(seq) != n:
        raise CircuitFormatError(f"{key}: expected a list of {n} integers")
    vals = [_require_int(v, f"{key}[{i}]") for i, v in enumerate(seq)]
    if sorted(vals) != list(range(n)):
        raise CircuitFormatError(f"{key}: not a permutation of 0..{n - 1}")
    return np.array(vals, dtype=np.int64)


def circuit_from_dict(data):
    if not isinstance(data, dict):
        raise CircuitFormatError("circuit: expected a JSON object")
    missing = _CIRCUIT_KEYS - data.keys()
    extra = data.keys() - _CIRCUIT_KEYS
    if missing:
        raise CircuitFormatError(f"circuit: missing field(s) {sorted(missing)}")
    if extra:
        raise CircuitFormatError(f"circuit: unknown field(s) {sorted(extra)}")
    n = _require_int(data["n"], "n")
    if n < 1:
        raise CircuitFormatError(f"n: must be >= 1, got {n}")
    dev = data["device"]
    if not isinstance(dev, dict) or set(dev) != {"rows", "cols"}:
        raise CircuitFormatError("device: expected {\"rows\": int, \"cols\": int}")
    try:
        device = Lattice(_require_int(dev["rows"], "device.rows"), _require_int(dev["cols"], "device.cols"))
    except ValueError as exc:
        raise CircuitFormatError(f"device: {exc}") from exc
    mode = data["mode"]
    if mode not in MODES:
        raise CircuitFormatError(f"mode: unknown mode {mode!r}")
    input_map = _int_list(data, "input_map", n)
    output_map = _int_list(data, "output_map", n)
    gates = data["gates"]
    if not isinstance(gates, list):
        raise CircuitFormatError("gates: expected a list")
    cols = {k: [] for k in ("m", "n", "theta", "phi", "dropped")}
    for i, g in enumerate(gates):
        where = f"gates[{i}]"
        if not isinstance(g, dict):
            raise CircuitFormatError(f"{where}: expected an object")
        if g.keys() != _GATE_KEYS:
            extra = sorted(g.keys() - _GATE_KEYS)
            missing = sorted(_GATE_KEYS - g.keys())
            detail = f"unknown gate field(s) {extra}" if extra else f"missing field(s) {missing}"
            raise CircuitFormatError(f"{where}: {detail}; only MZI gates are supported")
        m = _require_int(g["m"], f"{where}.m")
        nn = _require_int(g["n"], f"{where}.n")
        if not (0 <= m < n and 0 <= nn < n) or m == nn:
            raise CircuitFormatError(f"{where}: qumodes ({m}, {nn}) out of range for n={n}")
        if not isinstance(g["dropped"], bool):
            raise CircuitFormatError(f"{where}.dropped: expected a boolean")
        cols["m"].append(m)
        cols["n"].append(nn)
        cols["theta"].append(_require_float(g["theta"], f"{where}.theta"))
        cols["phi"].append(_require_float(g["phi"], f"{where}.phi"))
        cols["dropped"].append(g["dropped"])
    phases = data["final_phases"]
    if not isinstance(phases, list) or len(phases) != n:
        raise CircuitFormatError(f"final_phases: expected a list of {n} numbers")
    phases = [_require_float(v, f"final_phases[{i}]") for i, v in enumerate(phases)]
    return CompiledCircuit(
        n, device, input_map, output_map,
        np.array(cols["m"], dtype=np.int64), np.array(cols["n"], dtype=np.int64),
        np.array(cols["theta"], dtype=float), np.array(cols["phi"], dtype=float),
        np.array(cols["dropped"], dtype=bool), np.array(phases, dtype=float), mode,
    )


def dumps_circuit(c):
    return json.dumps(circuit_to_dict(c), indent=1) + "\n"


def loads_circuit(text, source="<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(
            f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return circuit_from_dict(data)
    except CircuitFormatError as exc:
        raise CircuitFormatError(f"{source}: {exc}") from exc


def write_circuit(path, c):
    with open(path, "w") as fh:
        fh.write(dumps_circuit(c))


def read_circuit(path):
    with open(path) as fh:
        return loads_circuit(fh.read(), str(path))


def default_bin_edges(bins=HISTOGRAM_BINS):
    return np.linspace(0.0, np.pi / 2, bins + 1)


def angle_histogram(thetas, bin_edges=None):
    """Counts of ``|theta|`` per bin. Returns ``(edges, counts)``.

    The last bin is closed on the right; angles beyond the edges are clipped
    into the end bins so the counts always sum to the block count.
    """
    if isinstance(thetas, Decomposition):
        thetas = thetas.thetas
    edges = default_bin_edges() if bin_edges is None else np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("bin_edges needs at least two entries")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("bin_edges must be strictly increasing")
    vals = np.clip(np.abs(np.asarray(thetas, dtype=float)), edges[0], edges[-1])
    counts, _ = np.histogram(vals, bins=edges)
    return edges, counts


def write_histogram_csv(path_or_file, edges, counts):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


@dataclass(frozen=True)
class CompileReport:
    n: int
    mode: str
    device: Lattice
    tau: float
    seed: int
    bs_total: int
    bs_kept: int
    bs_dropped: int
    ps_count: int
    mzi_ps_count: int
    fidelity_deterministic: float
    mean_sampled_fidelity: float = None
    theta_cut: float = 0.0
    power_k: int = None
    map_k: int = None
    small_angle_count: int = 0
    histogram_edges: np.ndarray = None
    histogram_counts: np.ndarray = None
    dropout: dict = None
    timings: dict = field(default_factory=dict)

    @property
    def drop_fraction(self):
        return self.bs_dropped / self.bs_total if self.bs_total else 0.0

    def to_dict(self, include_timings=True):
        out = {
            "n": self.n,
            "mode": self.mode,
            "device": {"rows": self.device.rows, "cols": self.device.cols},
            "tau": self.tau,
            "seed": self.seed,
            "bs_total": self.bs_total,
            "bs_kept": self.bs_kept,
            "bs_dropped": self.bs_dropped,
            "ps_count": self.ps_count,
            "mzi_ps_count": self.mzi_ps_count,
            "fidelity_deterministic": self.fidelity_deterministic,
            "mean_sampled_fidelity": self.mean_sampled_fidelity,
            "theta_cut": self.theta_cut,
            "power_k": self.power_k,
            "map_k": self.map_k,
            "small_angle_count": self.small_angle_count,
            "angle_histogram": {
                "edges": [float(x) for x in self.histogram_edges],
                "counts": [int(x) for x in self.histogram_counts],
            },
            "dropout": self.dropout,
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        return out


def write_report(path, report):
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def read_report(path):
    """Load a report file as a plain dict."""
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
