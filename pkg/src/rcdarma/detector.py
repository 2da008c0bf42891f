"""Running consensus detector (RCD) for ARMA signals in ARMA noise.

Each agent keeps two copies of its inverse noise filter: one whitens the known
signal, the other whitens its observations. The innovation
``eta_i(k) = theta_hat_i(k) * y_hat_i(k) - theta_hat_i(k)**2 / 2`` then feeds the
network update ``l(k) = W l(k-1) + eta(k)`` and agent i decides H1 whenever
``l_i(k) >= gamma``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .arma import ArmaModel, FilterMemory, SignalTrace, filter_step, impulse_response
from .errors import NumericDomainError
from .network import WeightMatrix
from .whitening import WhiteningState, dense_cholesky, whiten, whiten_step


class AgentChannel:
    """Streaming state of one agent; its size never depends on time."""

    def __init__(self, signal_model: ArmaModel, noise_model: ArmaModel):
        self.signal_model = signal_model
        self.noise_model = noise_model
        self.signal_whitener = WhiteningState(noise_model)
        self.obs_whitener = WhiteningState(noise_model)
        self.theta_source = FilterMemory.for_model(signal_model)
        self.time = -1
        self.theta_hat = 0.0
        self.y_hat = 0.0

    def __len__(self):
        return len(self.signal_whitener) + len(self.obs_whitener) + len(self.theta_source)


def innovation(channel: AgentChannel, observation: float) -> float:
    """Advance ``channel`` by one sample and return the agent's innovation."""
    if not math.isfinite(observation):
        raise NumericDomainError(f"observation must be finite, got {observation}")
    channel.time += 1
    impulse = 1.0 if channel.time == 0 else 0.0
    theta, _ = filter_step(channel.signal_model, channel.theta_source, impulse)
    theta_hat, _ = whiten_step(channel.signal_whitener, theta)
    y_hat, _ = whiten_step(channel.obs_whitener, observation)
    channel.theta_hat, channel.y_hat = theta_hat, y_hat
    return theta_hat * y_hat - 0.5 * theta_hat * theta_hat


@dataclass(frozen=True)
class DecisionRecord:
    time: int
    decisions: np.ndarray
    statistics: np.ndarray


class DetectorState:
    """Network-wide RCD state; ``time`` is -1 before the first observation."""

    def __init__(self, agents: Sequence[AgentChannel], weights: WeightMatrix, threshold: float = 0.0):
        if len(agents) != weights.n:
            raise ValueError(f"{len(agents)} agents but a {weights.n}x{weights.n} weight matrix")
        self.agents = list(agents)
        self.weights = weights
        self.threshold = float(threshold)
        self.time = -1
        self.decisions = np.zeros(weights.n)
        self._mix = weights.csr()

    @classmethod
    def create(cls, agent_models, weights: WeightMatrix, threshold: float = 0.0) -> "DetectorState":
        """``agent_models`` is a sequence of (signal, noise) model pairs."""
        return cls([AgentChannel(s, n) for s, n in agent_models], weights, threshold)

    @property
    def n(self) -> int:
        return len(self.agents)


def rcd_step(state: DetectorState, observations) -> tuple[DetectorState, DecisionRecord]:
    obs = np.asarray(observations, dtype=float)
    if obs.shape != (state.n,):
        raise ValueError(f"expected {state.n} observations, got shape {obs.shape}")
    eta = np.array([innovation(ch, y) for ch, y in zip(state.agents, obs)])
    state.decisions = state._mix @ state.decisions + eta
    state.time += 1
    record = DecisionRecord(
        state.time, (state.decisions >= state.threshold).astype(np.int8), state.decisions.copy()
    )
    return state, record


def whitened_signal(signal_model: ArmaModel, noise_model: ArmaModel, length: int) -> np.ndarray:
    """theta_hat(0..length-1): the signal's impulse response pushed through the whitener."""
    return whiten(noise_model, impulse_response(signal_model, length).samples)


def noise_covariance(noise_model: ArmaModel, dimension: int) -> np.ndarray:
    """Covariance of the first ``dimension`` noise samples from the impulse response."""
    h = impulse_response(noise_model, dimension).samples
    idx = np.arange(dimension)
    lag = idx[:, None] - idx[None, :]
    toeplitz = np.where(lag >= 0, h[np.clip(lag, 0, None)], 0.0)
    return toeplitz @ toeplitz.T


def centralized_llr(agent_models, observations: Sequence[SignalTrace], k: int) -> np.ndarray:
    """Per-agent log-likelihood ratio from full histories ``y_i(0..k)`` by dense algebra."""
    out = np.empty(len(agent_models))
    for i, ((signal, noise), trace) in enumerate(zip(agent_models, observations)):
        y = np.asarray(trace.samples[: k + 1], dtype=float)
        if y.size != k + 1:
            raise ValueError(f"agent {i + 1}: need {k + 1} observations, got {y.size}")
        theta = impulse_response(signal, k + 1).samples
        chol = dense_cholesky(noise_covariance(noise, k + 1))
        u = solve_triangular(chol, theta, lower=True)
        v = solve_triangular(chol, y, lower=True)
        out[i] = u @ v - 0.5 * (u @ u)
    return out


def write_trace(records: Iterable[DecisionRecord], fh) -> None:
    """CSV rows ``k, agent, l, D`` with 1-based agent ids."""
    writer = csv.writer(fh)
    writer.writerow(["k", "agent", "l", "D"])
    for rec in records:
        for i, (stat, dec) in enumerate(zip(rec.statistics, rec.decisions)):
            writer.writerow([rec.time, i + 1, repr(float(stat)), int(dec)])
