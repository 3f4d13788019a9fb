import json
import math

import numpy as np
import pytest

import qrotor


def theta3_kernel(delta, beta, terms=40):
    # Fourier series of the periodic heat kernel on the unit circle
    return 1.0 + 2.0 * sum(
        math.exp(-2.0 * math.pi**2 * k * k * beta) * math.cos(2.0 * math.pi * k * delta)
        for k in range(1, terms)
    )


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0])
def test_heat_kernel_matches_fourier_series(beta):
    for d in (0.0, 0.1, 0.37, 0.5):
        assert qrotor.heat_kernel([d], [0.0], beta) == pytest.approx(theta3_kernel(d, beta), rel=1e-10)


def test_free_kernel_is_normalised_heat_kernel():
    beta = 0.5
    ref = qrotor.heat_kernel([0.2], [0.45], beta) / qrotor.heat_kernel([0.0], [0.0], beta)
    assert qrotor.free_kernel([[0.2]], [[0.45]], beta) == pytest.approx(ref, rel=1e-12)


def test_free_kernel_matrix_symmetric_psd():
    k = np.asarray(qrotor.free_kernel_matrix(1.0, 32))
    assert k.shape == (32, 32)
    assert np.allclose(k, k.T)
    assert np.linalg.eigvalsh(k).min() > -1e-10


def test_trace_norm_of_diagonal_difference():
    eps = 2.0**-10
    a = np.diag([1.0 - eps, eps])
    b = np.diag([1.0, 0.0])
    assert qrotor.trace_norm(a - b) == 2.0 * eps


def test_gauge_q_values():
    assert qrotor.gauge_q(2.0) == pytest.approx(2.0, abs=1e-12)
    assert qrotor.gauge_q(4.0) == pytest.approx(2.0 + math.log(2.0), abs=1e-12)


def test_sup_metric_sphere_sizes():
    assert qrotor.box_sphere_sizes(4) == [1, 8, 16, 24, 32]


def test_lemma11_sweep_decreases():
    vals = qrotor.lemma11_sweep(1.0, 32, 6)
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_config_defaults_and_errors():
    cfg = qrotor.resolve_config({"task": {"name": "gauge-sweep"}})
    assert cfg["task"]["name"] == "gauge-sweep"
    assert len(qrotor.config_hash({"task": {"name": "gauge-sweep"}})) == 16
    with pytest.raises(qrotor.ConfigError):
        qrotor.resolve_config({"task": {"name": "gauge-sweep"}, "bogus": 1})


def test_run_gauge_sweep(tmp_path):
    ok, files, summary = qrotor.run({"task": {"name": "gauge-sweep"}}, tmp_path)
    assert ok
    assert files
    for f in files:
        assert open(f).read().startswith("# ")
    assert [row["n"] for row in summary] == [8, 16, 32, 64]
