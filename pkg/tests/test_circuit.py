import io
import json

import numpy as np
import pytest

from qumode_compiler.circuit import (
    CircuitFormatError,
    angle_histogram,
    circuit_to_dict,
    dumps_circuit,
    gate_counts,
    loads_circuit,
    read_circuit,
    write_circuit,
    write_histogram_csv,
)
from qumode_compiler.compiler import compile_unitary
from qumode_compiler.numerics import fidelity, haar_random_unitary


@pytest.fixture(scope="module")
def full24():
    return compile_unitary(haar_random_unitary(24, 1), "6x6", "full-opt", 0.95, iterations=10)


def test_gate_counts_n24(full24):
    c = full24.circuit.with_dropped(np.zeros(276, bool))
    bs, ps = gate_counts(c)
    assert (bs, c.n_gates) == (276, 276)
    assert ps == 276 + 24
    none_kept = c.with_dropped(np.ones(276, bool))
    assert gate_counts(none_kept) == (0, ps)
    mask = np.zeros(276, bool)
    mask[:79] = True
    bs, _ = gate_counts(c.with_dropped(mask))
    assert bs == 197
    # the published 28.8% comes from an averaged count; 79/276 is 28.6%
    assert 1 - bs / 276 == pytest.approx(0.288, abs=3e-3)


def test_round_trip_exact(tmp_path, full24):
    c = full24.circuit
    path = tmp_path / "c.json"
    write_circuit(path, c)
    back = read_circuit(path)
    assert back == c
    assert dumps_circuit(back) == path.read_text()


def test_specific_angle_survives(full24):
    data = circuit_to_dict(full24.circuit)
    data["gates"][0]["theta"] = 0.6435011087932844
    back = loads_circuit(json.dumps(data))
    assert back.thetas[0] == 0.6435011087932844


def test_rejects_unknown_gate_kind(full24):
    data = circuit_to_dict(full24.circuit)
    data["gates"][3]["kind"] = "cphase"
    with pytest.raises(CircuitFormatError, match=r"gates\[3\].*unknown"):
        loads_circuit(json.dumps(data))


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d.pop("mode"), "missing"),
    (lambda d: d.update(extra=1), "unknown"),
    (lambda d: d["gates"][0].update(theta="x"), r"gates\[0\].theta"),
    (lambda d: d["gates"][1].update(m=99), r"gates\[1\]"),
    (lambda d: d["gates"][2].update(dropped=1), r"gates\[2\].dropped"),
    (lambda d: d.update(input_map=[0] * 24), "input_map"),
    (lambda d: d.update(mode="turbo"), "mode"),
    (lambda d: d["final_phases"].pop(), "final_phases"),
    (lambda d: d.update(device={"rows": 6}), "device"),
])
def test_malformed_fields_name_the_field(full24, mutate, where):
    data = circuit_to_dict(full24.circuit)
    mutate(data)
    with pytest.raises(CircuitFormatError, match=where):
        loads_circuit(json.dumps(data))


def test_bad_json_reports_line(full24):
    text = dumps_circuit(full24.circuit)
    broken = text.replace('"mode"', '"mode" "', 1)
    with pytest.raises(CircuitFormatError, match="line"):
        loads_circuit(broken, "c.json")


def test_histogram():
    edges, counts = angle_histogram(np.zeros(10))
    assert counts[0] == 10 and counts.sum() == 10
    assert len(edges) == 51 and edges[-1] == pytest.approx(np.pi / 2)
    edges, counts = angle_histogram(np.array([np.pi / 2, 0.2]), [0, 0.1, np.pi / 2])
    assert counts.tolist() == [0, 2]
    with pytest.raises(ValueError):
        angle_histogram(np.zeros(3), [])
    with pytest.raises(ValueError):
        angle_histogram(np.zeros(3), [0.0, 0.5, 0.2])


def test_histogram_csv():
    buf = io.StringIO()
    edges, counts = angle_histogram(np.array([0.01, 0.02, 1.0]), [0, 0.5, 1.0])
    write_histogram_csv(buf, edges, counts)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "bin_low,bin_high,count"
    assert lines[1:] == ["0.0,0.5,2", "0.5,1.0,1"]


def test_histogram_counts_total(full24):
    assert full24.report.histogram_counts.sum() == 276


def test_small_angles_full_opt_vs_baseline():
    for seed in range(1, 4):
        u = haar_random_unitary(24, seed)
        full = compile_unitary(u, "6x6", "full-opt", 0.95, iterations=4).report.small_angle_count
        base = compile_unitary(u, "6x6", "baseline").report.small_angle_count
        assert full >= base


def test_logical_unitary_undoes_relabeling(full24):
    c = full24.circuit.with_dropped(np.zeros(276, bool))
    assert fidelity(c.logical_unitary(), haar_random_unitary(24, 1)) >= 1 - 1e-9


def test_every_gate_lattice_adjacent(full24):
    assert full24.circuit.violations() == []


def test_mismatched_mask_rejected(full24):
    with pytest.raises(ValueError):
        full24.circuit.with_dropped(np.zeros(3, bool))
