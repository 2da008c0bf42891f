import io

import numpy as np
import pytest

from rcdarma.arma import ArmaModel, SignalTrace, impulse_response, run_filter
from rcdarma.detector import (
    AgentChannel, DetectorState, centralized_llr, innovation, noise_covariance, rcd_step,
    whitened_signal, write_trace,
)
from rcdarma.errors import NumericDomainError
from rcdarma.network import complete_graph, laplacian_weights, path_graph
from rcdarma.whitening import whiten

from conftest import dc_pair, random_pair


def test_white_noise_dc_innovation():
    # theta = A, sigma white: eta = A y / sigma^2 - A^2 / (2 sigma^2)
    ch = AgentChannel(ArmaModel([1.0], [], 2.0), ArmaModel([], [], 4.0))
    assert innovation(ch, 3.0) == pytest.approx(2 * 3 / 16 - 4 / 32)
    assert innovation(ch, -1.0) == pytest.approx(-2 / 16 - 4 / 32)


def test_channel_memory_constant():
    ch = AgentChannel(*dc_pair(0.3))
    sizes = set()
    for y in np.random.default_rng(0).standard_normal(100):
        innovation(ch, y)
        sizes.add(len(ch))
    assert len(sizes) == 1


def test_innovation_rejects_nan():
    with pytest.raises(NumericDomainError):
        innovation(AgentChannel(*dc_pair(0.3)), float("nan"))


def test_single_agent_statistic_equals_centralized(rng):
    for _ in range(5):
        signal, noise = random_pair(rng)
        y = impulse_response(signal, 60).samples + run_filter(noise, rng.standard_normal(60))
        state = DetectorState.create([(signal, noise)], laplacian_weights(path_graph(1)))
        for k in range(60):
            state, rec = rcd_step(state, [y[k]])
        ref = centralized_llr([(signal, noise)], [SignalTrace(y)], 59)
        assert rec.statistics[0] == pytest.approx(ref[0], rel=1e-9, abs=1e-9)


def test_network_update_matches_matrix_recursion(rng):
    models = [dc_pair(b, 1.0, 2.0) for b in (0.1, -0.3, 0.5)]
    w = laplacian_weights(path_graph(3))
    state = DetectorState.create(models, w, threshold=0.0)
    theta_hat = np.column_stack([whitened_signal(s, n, 30) for s, n in models])
    y = rng.standard_normal((30, 3))
    yhat = np.column_stack([whiten(n, y[:, i]) for i, (_, n) in enumerate(models)])
    l = np.zeros(3)
    for k in range(30):
        state, rec = rcd_step(state, y[k])
        l = w.entries @ l + theta_hat[k] * yhat[k] - theta_hat[k] ** 2 / 2
        np.testing.assert_allclose(rec.statistics, l, atol=1e-12)
        np.testing.assert_array_equal(rec.decisions, (l >= 0).astype(np.int8))
    assert state.time == 29


def test_rcd_step_checks_shape():
    state = DetectorState.create([dc_pair(0.1)] * 2, laplacian_weights(complete_graph(2)))
    with pytest.raises(ValueError):
        rcd_step(state, [1.0])


def test_noise_covariance_white():
    np.testing.assert_allclose(noise_covariance(ArmaModel([], [], 3.0), 4), 9 * np.eye(4))


def test_write_trace_columns():
    state = DetectorState.create([dc_pair(0.1)] * 2, laplacian_weights(complete_graph(2)))
    _, rec = rcd_step(state, [1.0, 2.0])
    buf = io.StringIO()
    write_trace([rec], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k,agent,l,D"
    assert lines[1].startswith("0,1,") and lines[2].startswith("0,2,")
