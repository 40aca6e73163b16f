import json

import numpy as np
import pytest

from qumode_compiler.circuit import read_circuit
from qumode_compiler.cli import EXIT_ASSERT, EXIT_INPUT, EXIT_OK, main
from qumode_compiler.numerics import fidelity, read_unitary


@pytest.fixture
def work(tmp_path):
    u = tmp_path / "u.json"
    assert main(["gen-unitary", "-n", "12", "--seed", "1", "--out", str(u)]) == EXIT_OK
    return tmp_path, u


def compile_args(tmp, u, mode, tag, *extra):
    return ["compile", "--input", str(u), "--device", "3x4", "--mode", mode, "--tau", "0.95",
            "--iterations", "6", "--out", str(tmp / f"c{tag}.json"),
            "--report", str(tmp / f"r{tag}.json"), *extra]


def test_gen_unitary(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen-unitary", "-n", "24", "--seed", "1", "--out", str(a)]) == EXIT_OK
    assert main(["gen-unitary", "-n", "24", "--seed", "1", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert read_unitary(a).shape == (24, 24)
    assert main(["gen-unitary", "-n", "1", "--out", str(a)]) == EXIT_INPUT
    assert main(["gen-unitary", "-n", "3", "--out", str(tmp_path / "nope" / "x.json")]) == EXIT_INPUT


def test_compile_is_byte_deterministic(work):
    tmp, u = work
    assert main(compile_args(tmp, u, "full-opt", "1")) == EXIT_OK
    assert main(compile_args(tmp, u, "full-opt", "2")) == EXIT_OK
    assert (tmp / "c1.json").read_bytes() == (tmp / "c2.json").read_bytes()
    r1 = json.loads((tmp / "r1.json").read_text())
    r2 = json.loads((tmp / "r2.json").read_text())
    r1.pop("timings")
    r2.pop("timings")
    assert r1 == r2


def test_compile_writes_histogram(work):
    tmp, u = work
    h = tmp / "h.csv"
    assert main(compile_args(tmp, u, "decomp-opt", "h", "--histogram", str(h))) == EXIT_OK
    rows = h.read_text().splitlines()
    assert rows[0] == "bin_low,bin_high,count" and len(rows) == 51
    assert sum(int(r.split(",")[2]) for r in rows[1:]) == 66


def test_verify(work, tmp_path):
    tmp, u = work
    assert main(compile_args(tmp, u, "baseline", "b")) == EXIT_OK
    assert main(["verify", "--input", str(u), "--circuit", str(tmp / "cb.json"), "--assert"]) == EXIT_OK
    assert main(compile_args(tmp, u, "full-opt", "f")) == EXIT_OK
    c = read_circuit(tmp / "cf.json")
    f = fidelity(c.logical_unitary(), read_unitary(u))
    assert 0.95 <= f <= 1
    assert main(["verify", "--input", str(u), "--circuit", str(tmp / "cf.json"), "--assert", "0.95"]) == EXIT_OK
    other = tmp / "other.json"
    main(["gen-unitary", "-n", "12", "--seed", "2", "--out", str(other)])
    assert main(["verify", "--input", str(other), "--circuit", str(tmp / "cb.json"), "--assert"]) == EXIT_ASSERT
    assert main(["verify", "--input", str(other), "--circuit", str(tmp / "cb.json")]) == EXIT_OK
    small = tmp / "small.json"
    main(["gen-unitary", "-n", "5", "--out", str(small)])
    assert main(["verify", "--input", str(small), "--circuit", str(tmp / "cb.json")]) == EXIT_INPUT


def test_sample_circuits(work):
    tmp, u = work
    assert main(compile_args(tmp, u, "full-opt", "f")) == EXIT_OK
    rep = json.loads((tmp / "rf.json").read_text())
    out = tmp / "shots.jsonl"
    base = ["sample-circuits", "--input", str(tmp / "cf.json"), "--report", str(tmp / "rf.json")]
    assert main(base + ["--shots", "1", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    gates = json.loads(lines[0])["gates"]
    assert sum(not g["dropped"] for g in gates) == rep["dropout"]["kept_count"]
    assert main(base + ["--shots", "0", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == ""
    assert main(compile_args(tmp, u, "decomp-opt", "d")) == EXIT_OK
    assert main(["sample-circuits", "--input", str(tmp / "cd.json"), "--report", str(tmp / "rd.json"),
                 "--shots", "2"]) == EXIT_INPUT


def test_sample_circuits_track_tau_k(tmp_path):
    u = tmp_path / "u.json"
    main(["gen-unitary", "-n", "24", "--seed", "3", "--out", str(u)])
    c, r = tmp_path / "c.json", tmp_path / "r.json"
    assert main(["compile", "--input", str(u), "--device", "6x6", "--mode", "full-opt", "--tau", "0.95",
                 "--out", str(c), "--report", str(r)]) == EXIT_OK
    out = tmp_path / "s.jsonl"
    assert main(["sample-circuits", "--input", str(c), "--report", str(r), "--shots", "100",
                 "--seed", "11", "--out", str(out)]) == EXIT_OK
    ref = read_unitary(u)
    from qumode_compiler.circuit import loads_circuit

    fids = [fidelity(loads_circuit(line).logical_unitary(), ref) for line in out.read_text().splitlines()]
    tau_k = json.loads(r.read_text())["mean_sampled_fidelity"]
    assert abs(np.mean(fids) - tau_k) < 0.005


def test_analyze(work, capsys):
    tmp, u = work
    main(compile_args(tmp, u, "full-opt", "a"))
    capsys.readouterr()
    assert main(["analyze", "--input", str(tmp / "ca.json"), "--bins", "5"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "bin_low,bin_high,count" and len(rows) == 6


def test_bench(capsys):
    assert main(["bench", "--sizes", "6,9", "--repeats", "2"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "n,device,mean_bs_drop_pct,decompose_time_s,total_time_s"
    assert rows[1].startswith("6,3x2,") and rows[2].startswith("9,3x3,")


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"n\": 2, \"re\": [[1, 0], [0, 3]], \"im\": [[0, 0], [0, 0]]}")
    assert main(["compile", "--input", str(bad), "--device", "2x2"]) == EXIT_INPUT
    assert main(["compile", "--input", str(tmp_path / "missing.json"), "--device", "2x2"]) == EXIT_INPUT
    u = tmp_path / "u.json"
    main(["gen-unitary", "-n", "8", "--out", str(u)])
    assert main(["compile", "--input", str(u), "--device", "2x2"]) == EXIT_INPUT
    assert main(["compile", "--input", str(u), "--device", "3x3", "--tau", "2"]) == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["compile", "--input", str(u), "--device", "3x3", "--map-k", "a,b"])
    assert exc.value.code == 2
