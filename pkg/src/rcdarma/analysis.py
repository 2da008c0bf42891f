"""Closed-form asymptotics of the running consensus detector.

The cumulative energy of the whitened network signal grows either linearly
(some agent has a whitened signal with a pole on the unit circle, regime "a")
or converges (all poles strictly inside, regime "b"). In regime a both error
probabilities decay like ``exp(-alpha (k+1) / 8)``; in regime b they settle on
floors ``Q(sqrt(alpha)/2 +/- gamma N / sqrt(alpha))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr

from .arma import UNIT_TOL, RationalTransferFunction, validate, whitened_signal_tf
from .errors import DegenerateProblemError, NumericDomainError
from .network import WeightMatrix

IMAG_TOL = 1e-10


def q_function(t):
    """Standard Gaussian upper tail probability."""
    if np.ndim(t) == 0:
        return 0.5 * math.erfc(float(t) / math.sqrt(2.0))
    return 0.5 * np.vectorize(math.erfc, otypes=[float])(np.asarray(t, dtype=float) / math.sqrt(2.0))


def neg_log_q(t):
    """``-log Q(t)``, accurate far into the tail where Q underflows."""
    return -log_ndtr(-np.asarray(t, dtype=float))


def asymptotic_energy(f: RationalTransferFunction):
    """Limit of the whitened signal energy for one agent.

    Returns ``("unit", |r_1|^2)`` when the dominant pole lies on the unit circle
    (energy grows like ``|r_1|^2 (k+1)``), otherwise ``("sub", E)`` with E the
    total energy ``sum_{j,l} r_j conj(r_l) / (1 - p_j conj(p_l))``.
    """
    if not f.residues:
        raise ValueError("residues not computed; call partial_fractions first")
    validate(f)
    poles = np.asarray(f.poles)
    res = np.asarray(f.residues)
    lead = int(np.argmax(np.abs(poles)))
    if abs(abs(poles[lead]) - 1.0) < UNIT_TOL:
        return "unit", float(abs(res[lead]) ** 2)
    total = np.sum(np.outer(res, res.conj()) / (1.0 - np.outer(poles, poles.conj())))
    if abs(total.imag) > IMAG_TOL * max(1.0, abs(total.real)):
        raise NumericDomainError(f"energy sum has imaginary part {total.imag:g}")
    return "sub", float(total.real)


@dataclass(frozen=True)
class SpectralSummary:
    transfer_functions: tuple
    rhos: tuple

    @property
    def rho(self) -> float:
        return max(self.rhos)

    def __len__(self):
        return len(self.transfer_functions)


def spectral_summary(agent_models) -> SpectralSummary:
    """Whitened-signal transfer functions of every (signal, noise) pair; validates each."""
    tfs = tuple(whitened_signal_tf(s, n, agent=i + 1) for i, (s, n) in enumerate(agent_models))
    return SpectralSummary(tfs, tuple(tf.rho for tf in tfs))


@dataclass(frozen=True)
class AsymptoticReport:
    """Predicted asymptotic behaviour; agent ids are 1-based."""

    regime: str
    scaling: str
    alpha: float
    beta_F: float
    beta_M: float
    informative_set: tuple
    gamma: float
    n_agents: int
    rho: float
    floor_F: float | None = None
    floor_M: float | None = None
    agent_energy: tuple = ()
    unit_tolerance: float = UNIT_TOL
    notes: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "regime": self.regime,
            "scaling": self.scaling,
            "alpha": self.alpha,
            "beta_F": self.beta_F,
            "beta_M": self.beta_M,
            "informative": list(self.informative_set),
            "floor_F": self.floor_F,
            "floor_M": self.floor_M,
            "gamma": self.gamma,
            "n_agents": self.n_agents,
            "rho": self.rho,
            "agent_energy": list(self.agent_energy),
            "unit_tolerance": self.unit_tolerance,
            "notes": list(self.notes),
        }


def classify(summary: SpectralSummary, n_agents: int | None = None, gamma: float = 0.0) -> AsymptoticReport:
    n = len(summary) if n_agents is None else n_agents
    energies = [asymptotic_energy(tf) for tf in summary.transfer_functions]
    unit = tuple(i + 1 for i, (case, _) in enumerate(energies) if case == "unit")
    notes = []
    if unit:
        alpha = sum(energies[i - 1][1] for i in unit)
        if alpha <= 0:
            raise DegenerateProblemError("whitened signal has no energy")
        beta = alpha / 8.0
        return AsymptoticReport(
            "a", "linear", alpha, beta, beta, unit, gamma, n, summary.rho,
            agent_energy=tuple(e for _, e in energies),
        )
    alpha = sum(e for _, e in energies)
    if alpha <= 0:
        raise DegenerateProblemError("whitened signal has no energy")
    shift = gamma * n / math.sqrt(alpha)
    arg_f = math.sqrt(alpha) / 2 + shift
    arg_m = math.sqrt(alpha) / 2 - shift
    if arg_m < 0:
        notes.append(f"gamma > alpha/(2N) = {alpha / (2 * n):.6g}: miss floor exceeds 1/2")
    if arg_f < 0:
        notes.append(f"gamma < -alpha/(2N) = {-alpha / (2 * n):.6g}: false-alarm floor exceeds 1/2")
    return AsymptoticReport(
        "b", "constant", alpha, float(neg_log_q(arg_f)), float(neg_log_q(arg_m)),
        tuple(range(1, len(summary) + 1)), gamma, n, summary.rho,
        floor_F=q_function(arg_f), floor_M=q_function(arg_m),
        agent_energy=tuple(e for _, e in energies), notes=tuple(notes),
    )


@dataclass(frozen=True)
class MomentTrace:
    """Mean and covariance of l(k) under H1 at the recorded ``steps``.

    With ``diagonal_only`` the ``covariance`` array holds just the variances
    (shape ``(len(steps), N)``).
    """

    steps: np.ndarray
    mean: np.ndarray
    covariance: np.ndarray
    diagonal_only: bool = False

    def variance(self) -> np.ndarray:
        return self.covariance if self.diagonal_only else np.einsum("sii->si", self.covariance)

    def error_probabilities(self, gamma: float = 0.0):
        """Exact Gaussian P_F, P_M at each recorded step (H0 mean is ``-mean``)."""
        sd = np.sqrt(self.variance())
        safe = np.where(sd > 0, sd, 1.0)
        # a silent agent has a deterministic statistic: the error is then 0 or 1
        p_f = np.where(sd > 0, q_function((gamma + self.mean) / safe), (-self.mean >= gamma).astype(float))
        p_m = np.where(sd > 0, q_function((self.mean - gamma) / safe), (self.mean < gamma).astype(float))
        return p_f, p_m


def moment_trace(theta_hat, weights: WeightMatrix, horizon: int, steps=None, diagonal_only=False) -> MomentTrace:
    """Run ``mu(k) = W mu(k-1) + theta_hat(k)^2 / 2`` and ``Omega(k) = W Omega(k-1) W^T + diag(theta_hat(k)^2)``.

    ``theta_hat`` has shape ``(>= horizon + 1, N)``; recursion starts from zero at k = -1.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    n = weights.n
    w = np.asarray(weights.entries)
    steps = np.arange(horizon + 1) if steps is None else np.asarray(sorted(set(int(s) for s in steps)))
    keep = {int(s): r for r, s in enumerate(steps)}
    mean = np.zeros((len(steps), n))
    cov = np.zeros((len(steps), n) if diagonal_only else (len(steps), n, n))
    mu = np.zeros(n)
    omega = np.zeros((n, n))
    for k in range(int(steps[-1]) + 1):
        energy = theta_hat[k] ** 2
        mu = w @ mu + 0.5 * energy
        omega = w @ omega @ w.T
        omega[np.diag_indices(n)] += energy
        r = keep.get(k)
        if r is not None:
            mean[r] = mu
            cov[r] = np.diag(omega) if diagonal_only else omega
    return MomentTrace(steps, mean, cov, diagonal_only)
