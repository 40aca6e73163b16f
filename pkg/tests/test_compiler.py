import numpy as np
import pytest
from sklearn.base import clone

from qumode_compiler.compiler import compile_unitary
from qumode_compiler.dropout import UnreachableFidelityError
from qumode_compiler.estimator import InterferometerCompiler
from qumode_compiler.numerics import fidelity, haar_random_unitary


@pytest.fixture(scope="module")
def u24():
    return haar_random_unitary(24, 5)


def test_baseline(u24):
    res = compile_unitary(u24, "6x6", "baseline")
    r = res.report
    assert r.bs_total == 276 and r.bs_kept == 276 and r.bs_dropped == 0
    assert r.fidelity_deterministic >= 1 - 1e-9
    assert r.theta_cut == 0.0 and r.power_k is None and r.map_k is None
    assert res.circuit.violations() == []


@pytest.mark.parametrize("mode", ["rot-cut", "decomp-opt", "full-opt"])
def test_dropout_modes_meet_tau(u24, mode):
    res = compile_unitary(u24, "6x6", mode, 0.95, iterations=8)
    r = res.report
    assert r.bs_kept + r.bs_dropped == r.bs_total == 276
    assert r.fidelity_deterministic >= 0.95
    assert fidelity(res.circuit.logical_unitary(), u24) == pytest.approx(r.fidelity_deterministic, abs=1e-12)
    assert res.circuit.violations() == []
    assert (r.dropout is not None) == (mode == "full-opt")


def test_rot_cut_drops_fewer_than_full_opt():
    for seed in range(1, 4):
        u = haar_random_unitary(24, seed)
        rot = compile_unitary(u, "6x6", "rot-cut", 0.95).report.bs_dropped
        full = compile_unitary(u, "6x6", "full-opt", 0.95, iterations=4).report.bs_dropped
        assert rot < full


def test_device_too_small(u24):
    with pytest.raises(ValueError, match="device"):
        compile_unitary(u24, "4x5", "full-opt")


def test_bad_inputs(u24):
    with pytest.raises(ValueError):
        compile_unitary(u24, "6x6", "turbo")
    with pytest.raises(ValueError):
        compile_unitary(u24, "6x6", tau=1.0)
    with pytest.raises(ValueError):
        compile_unitary(np.ones((4, 4)), "2x2")
    with pytest.raises(ValueError):
        compile_unitary(u24, "6x6", power_k=[])


def test_deterministic_reports(u24):
    a = compile_unitary(u24, "6x6", "full-opt", 0.99, iterations=6, seed=3)
    b = compile_unitary(u24, "6x6", "full-opt", 0.99, iterations=6, seed=3)
    assert a.circuit == b.circuit
    assert a.report.to_dict(include_timings=False) == b.report.to_dict(include_timings=False)
    assert set(a.report.timings) == {"map", "decompose", "dropout", "total"}


def test_estimator_api(u24):
    est = InterferometerCompiler(device="6x6", mode="decomp-opt", tau=0.97)
    params = est.get_params()
    assert params["mode"] == "decomp-opt" and params["tau"] == 0.97
    est.set_params(mode="full-opt", iterations=5)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.fit(u24)
    assert est.fidelity_ >= 0.97
    assert est.n_features_in_ == 24
    x = haar_random_unitary(24, 9)[:3]
    assert np.allclose(est.transform(x), x @ est.unitary_approx_.T)
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 5)))
    shots = est.sample_circuits(4, seed=1)
    assert len(shots) == 4
    assert all(int((~c.dropped).sum()) == est.dropout_model_.kept_count for c in shots)


def test_estimator_unfitted_and_no_model(u24):
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        InterferometerCompiler().transform(np.eye(24))
    est = InterferometerCompiler(device="6x6", mode="baseline").fit(u24)
    assert np.allclose(est.fit_transform(u24), u24.T, atol=1e-10)
    with pytest.raises(ValueError, match="dropout"):
        est.sample_circuits(2)


def test_unreachable_tau_error():
    u = haar_random_unitary(4, 1)
    with pytest.raises(UnreachableFidelityError):
        from qumode_compiler.decomposer import build_plan, decompose
        from qumode_compiler.dropout import find_threshold
        from qumode_compiler.topology import build_chain_pattern
        d = decompose(u, build_plan(build_chain_pattern(4)))
        find_threshold(d, haar_random_unitary(4, 2), 0.99)
