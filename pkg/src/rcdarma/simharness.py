"""Seeded Monte Carlo estimates of per-agent false-alarm and miss probabilities.

Every trial draws its own white-noise block from a Philox stream keyed by
``(seed, trial index)``, so results do not depend on how trials are grouped or
how many worker processes run them. Error counts are integers and chunk results
are reduced in trial order, which keeps the output bit-identical across runs.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .analysis import moment_trace, spectral_summary
from .arma import impulse_response
from .detector import whitened_signal
from .network import Graph, WeightMatrix

HYPOTHESES = ("H0", "H1", "both")
CHUNK_TRIALS = 32
WILSON_Z = 1.959963984540054


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def trial_noise(seed: int, trial: int, horizon: int, n_agents: int) -> np.ndarray:
    """Standard normal driving noise eps[k, i] for k = 0..horizon of one trial."""
    return trial_rng(seed, trial).standard_normal((horizon + 1, n_agents))


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment. ``muted_agents`` (1-based) get theta_hat = 0."""

    agents: tuple
    weights: WeightMatrix
    gamma: float = 0.0
    horizon: int = 1000
    trials: int = 10_000
    seed: int = 0
    hypothesis: str = "both"
    stride: int = 10
    muted_agents: tuple = ()
    graph: Graph | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(tuple(pair) for pair in self.agents))
        object.__setattr__(self, "muted_agents", tuple(int(a) for a in self.muted_agents))
        if len(self.agents) != self.weights.n:
            raise ValueError(f"{len(self.agents)} agents but {self.weights.n} nodes")
        if self.trials < 1 or self.horizon < 1 or self.stride < 1:
            raise ValueError("trials, horizon and stride must all be >= 1")
        if self.hypothesis not in HYPOTHESES:
            raise ValueError(f"hypothesis must be one of {HYPOTHESES}, got {self.hypothesis!r}")
        bad = [a for a in self.muted_agents if not 1 <= a <= len(self.agents)]
        if bad:
            raise ValueError(f"muted agents {bad} outside 1..{len(self.agents)}")

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def record_steps(self) -> np.ndarray:
        steps = list(range(0, self.horizon + 1, self.stride))
        if steps[-1] != self.horizon:
            steps.append(self.horizon)
        return np.array(steps)

    def signals(self, length: int | None = None):
        """(theta, theta_hat), each of shape (length, N); muted agents have theta_hat = 0."""
        length = self.horizon + 1 if length is None else length
        theta = np.column_stack([impulse_response(s, length).samples for s, _ in self.agents])
        theta_hat = np.column_stack([whitened_signal(s, n, length) for s, n in self.agents])
        for a in self.muted_agents:
            theta_hat[:, a - 1] = 0.0
        return theta, theta_hat


def wilson_half_width(p_hat, trials: int, z: float = WILSON_Z):
    p_hat = np.asarray(p_hat, dtype=float)
    denom = 1.0 + z * z / trials
    return z / denom * np.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4.0 * trials * trials))


@dataclass(frozen=True)
class ErrorCurves:
    """Empirical error probabilities, shape ``(len(steps), N)``; None when not simulated."""

    steps: np.ndarray
    trials: int
    p_false_alarm: np.ndarray | None
    p_miss: np.ndarray | None

    @property
    def half_width_false_alarm(self):
        return None if self.p_false_alarm is None else wilson_half_width(self.p_false_alarm, self.trials)

    @property
    def half_width_miss(self):
        return None if self.p_miss is None else wilson_half_width(self.p_miss, self.trials)

    def at(self, k: int) -> int:
        hits = np.flatnonzero(self.steps == k)
        if hits.size == 0:
            raise KeyError(f"step {k} was not recorded")
        return int(hits[0])

    def miss_rate(self, k: int) -> np.ndarray:
        """Per-agent ``-log P_M(k) / k`` (inf where no miss was observed)."""
        with np.errstate(divide="ignore"):
            return -np.log(self.p_miss[self.at(k)]) / k

    def to_csv(self, fh) -> None:
        """Columns k, agent, p_false_alarm, p_miss, ci_half_width.

        A column is omitted when its hypothesis was not simulated. With both,
        ``ci_half_width`` is the larger of the two Wilson half-widths.
        """
        cols = ["k", "agent"]
        parts = []
        if self.p_false_alarm is not None:
            cols.append("p_false_alarm")
            parts.append(self.p_false_alarm)
        if self.p_miss is not None:
            cols.append("p_miss")
            parts.append(self.p_miss)
        cols.append("ci_half_width")
        widths = [w for w in (self.half_width_false_alarm, self.half_width_miss) if w is not None]
        width = np.maximum.reduce(widths)
        fh.write(",".join(cols) + "\n")
        for r, k in enumerate(self.steps):
            for i in range(width.shape[1]):
                vals = [f"{part[r, i]:.10g}" for part in parts]
                fh.write(f"{k},{i + 1}," + ",".join(vals) + f",{width[r, i]:.10g}\n")


def _prepare(config: ExperimentConfig):
    n = config.n_agents
    p = max(1, max(noise.p for _, noise in config.agents))
    q = max(1, max(noise.q for _, noise in config.agents))
    ar = np.zeros((n, p))
    ma = np.zeros((n, q))
    for i, (_, noise) in enumerate(config.agents):
        ar[i, : noise.p] = noise.ar_coeffs
        ma[i, : noise.q] = noise.ma_coeffs
    gain = np.array([noise.gain for _, noise in config.agents])
    theta, theta_hat = config.signals()
    csr = config.weights.csr()
    return dict(
        theta=np.ascontiguousarray(theta), theta_hat=np.ascontiguousarray(theta_hat),
        noise_ar=ar, noise_ma=ma, noise_gain=gain,
        indptr=csr.indptr.astype(np.int64), indices=csr.indices.astype(np.int64),
        wdata=np.ascontiguousarray(csr.data, dtype=float),
    )


def _row_map(horizon, steps):
    rows = np.full(horizon + 1, -1, dtype=np.int64)
    for r, k in enumerate(steps):
        rows[k] = r
    return rows


def _run_chunk(task):
    (prep, seed, start, stop, horizon, gamma, run_h0, run_h1,
     record_steps, sample_steps, backend) = task
    n = prep["noise_gain"].size
    count = stop - start
    eps = np.empty((count, horizon + 1, n))
    for c in range(count):
        eps[c] = trial_noise(seed, start + c, horizon, n)
    fa = np.zeros((len(record_steps), n), dtype=np.int64)
    miss = np.zeros_like(fa)
    s0 = np.zeros((count, len(sample_steps), n))
    s1 = np.zeros_like(s0)
    kernel = kernels.BACKENDS[backend] if backend else kernels.simulate_chunk
    kernel(
        eps, prep["theta"], prep["theta_hat"], prep["noise_ar"], prep["noise_ma"], prep["noise_gain"],
        prep["indptr"], prep["indices"], prep["wdata"], float(gamma), bool(run_h0), bool(run_h1),
        _row_map(horizon, record_steps), fa, miss, _row_map(horizon, sample_steps), s0, s1,
    )
    return fa, miss, s0, s1


def _simulate(config: ExperimentConfig, record_steps, sample_steps=(), workers=1, backend=None):
    spectral_summary(config.agents)  # assumption violations surface before any trial runs
    prep = _prepare(config)
    run_h0 = config.hypothesis in ("H0", "both")
    run_h1 = config.hypothesis in ("H1", "both")
    sample_steps = np.asarray(sorted(sample_steps), dtype=np.int64)
    tasks = [
        (prep, config.seed, start, min(start + CHUNK_TRIALS, config.trials), config.horizon,
         config.gamma, run_h0, run_h1, record_steps, sample_steps, backend)
        for start in range(0, config.trials, CHUNK_TRIALS)
    ]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    fa = sum(r[0] for r in results)
    miss = sum(r[1] for r in results)
    s0 = np.concatenate([r[2] for r in results])
    s1 = np.concatenate([r[3] for r in results])
    return run_h0, run_h1, fa, miss, s0, s1


def run_experiment(config: ExperimentConfig, workers: int = 1, backend: str | None = None) -> ErrorCurves:
    steps = config.record_steps()
    run_h0, run_h1, fa, miss, _, _ = _simulate(config, steps, workers=workers, backend=backend)
    t = config.trials
    return ErrorCurves(
        steps, t,
        fa / t if run_h0 else None,
        miss / t if run_h1 else None,
    )


def predicted_curves(config: ExperimentConfig, steps=None):
    """Exact finite-k Gaussian error probabilities from the moment recursions."""
    steps = config.record_steps() if steps is None else steps
    _, theta_hat = config.signals()
    trace = moment_trace(theta_hat, config.weights, config.horizon, steps=steps, diagonal_only=True)
    return trace.error_probabilities(config.gamma)


@dataclass(frozen=True)
class MomentCheck:
    steps: np.ndarray
    trials: int
    mean: np.ndarray
    variance: np.ndarray
    mean_theory: np.ndarray
    variance_theory: np.ndarray

    @property
    def z_mean(self) -> np.ndarray:
        return (self.mean - self.mean_theory) / np.sqrt(self.variance_theory / self.trials)

    @property
    def z_variance(self) -> np.ndarray:
        return (self.variance - self.variance_theory) / (self.variance_theory * math.sqrt(2.0 / (self.trials - 1)))

    @property
    def max_abs_z(self) -> float:
        return float(max(np.abs(self.z_mean).max(), np.abs(self.z_variance).max()))

    def to_json(self) -> dict:
        return {
            "steps": self.steps.tolist(),
            "trials": self.trials,
            "z_mean": self.z_mean.tolist(),
            "z_variance": self.z_variance.tolist(),
            "max_abs_z": self.max_abs_z,
        }


def moment_check(config: ExperimentConfig, steps=(10, 100, 1000), workers: int = 1, backend=None) -> MomentCheck:
    """Compare trial mean/variance of l(k) under H1 with the moment recursions."""
    if config.trials < 2:
        raise ValueError("moment check needs at least two trials")
    steps = np.asarray(sorted(set(int(s) for s in steps)))
    cfg = config.with_overrides(horizon=int(steps[-1]), hypothesis="H1")
    _, _, _, _, _, samples = _simulate(cfg, np.zeros(0, dtype=np.int64), steps, workers, backend)
    _, theta_hat = cfg.signals()
    trace = moment_trace(theta_hat, cfg.weights, cfg.horizon, steps=steps, diagonal_only=True)
    return MomentCheck(
        steps, cfg.trials, samples.mean(axis=0), samples.var(axis=0, ddof=1), trace.mean, trace.covariance
    )
