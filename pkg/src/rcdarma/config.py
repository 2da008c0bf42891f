"""JSON experiment configs: parsing, validation reports and DC-level generators.

Schema (version 1)::

    {
      "version": 1,
      "graph": {"type": "erdos_renyi", "n": 40, "p": 0.184, "seed": 1,
                "weights": {"rule": "laplacian"}},
      "gamma": 0.0,
      "agents": [{"signal": {"ar": [1.0], "ma": [], "gain": 1.0},
                  "noise":  {"ar": [1.0], "ma": [0.3], "gain": 10.0}}, ...],
      "simulation": {"trials": 10000, "horizon": 4000, "seed": 0,
                     "hypothesis": "both", "stride": 10, "muted_agents": []}
    }

Graph types are ``erdos_renyi`` (n, p, seed), ``complete``, ``path``, ``ring``,
``star`` (n) and ``edges`` (n plus a 0-based ``edges`` list). Weight rules are
``laplacian``, ``metropolis`` or ``explicit`` (with ``rows``). The
``simulation`` block is optional; CLI flags override it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arma import ArmaModel, whitened_signal_tf
from .errors import AssumptionViolation, ConfigError, GraphGenerationError, RcdError
from .network import (
    WEIGHT_RULES, Graph, WeightMatrix, complete_graph, erdos_renyi, path_graph, ring_graph, star_graph,
)
from .simharness import HYPOTHESES, ExperimentConfig

SCHEMA_VERSION = 1
_TOP_KEYS = {"version", "graph", "gamma", "agents", "simulation", "coefficient_seed", "description"}
_SIM_DEFAULTS = {"trials": 10_000, "horizon": 1000, "seed": 0, "hypothesis": "both", "stride": 10}


def parse_json(text: str, source: str = "<config>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines() or [""]
        line = lines[min(exc.lineno, len(lines)) - 1]
        caret = " " * (exc.colno - 1) + "^"
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n  {line}\n  {caret}") from None


def _require(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return value


def parse_model(obj, where) -> ArmaModel:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object with ar, ma, gain")
    unknown = set(obj) - {"ar", "ma", "gain"}
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return ArmaModel.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


_FIXED_GRAPHS = {"complete": complete_graph, "path": path_graph, "ring": ring_graph, "star": star_graph}


def build_graph(graph_cfg) -> Graph:
    kind = _require(graph_cfg, "type", "graph", str)
    n = _require(graph_cfg, "n", "graph", int)
    if n < 1:
        raise ConfigError("graph.n must be >= 1")
    if kind == "erdos_renyi":
        p = float(_require(graph_cfg, "p", "graph", (int, float)))
        seed = _require(graph_cfg, "seed", "graph", int)
        return erdos_renyi(n, p, seed)
    if kind in _FIXED_GRAPHS:
        return _FIXED_GRAPHS[kind](n)
    if kind == "edges":
        try:
            return Graph(n, tuple(tuple(e) for e in _require(graph_cfg, "edges", "graph", list)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"graph.edges: {exc}") from None
    raise ConfigError(f"graph.type: unknown graph type {kind!r}")


def build_weights(graph_cfg, graph: Graph) -> WeightMatrix:
    rule_cfg = graph_cfg.get("weights", {"rule": "laplacian"})
    rule = _require(rule_cfg, "rule", "graph.weights", str)
    if rule == "explicit":
        return WeightMatrix.from_entries(_require(rule_cfg, "rows", "graph.weights", list), graph)
    if rule not in WEIGHT_RULES:
        raise ConfigError(f"graph.weights.rule: unknown rule {rule!r}")
    return WEIGHT_RULES[rule](graph)


@dataclass
class ParsedConfig:
    """Structurally valid config; graph and models are not yet checked."""

    raw: dict
    agents: list
    gamma: float
    simulation: dict
    muted_agents: tuple = ()
    source: str = "<config>"
    sha256: str = ""


def parse_config(text: str, source: str = "<config>") -> ParsedConfig:
    raw = parse_json(text, source)
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    version = _require(raw, "version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config.version: unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
    graph = _require(raw, "graph", "config", dict)
    agents_raw = _require(raw, "agents", "config", list)
    if not agents_raw:
        raise ConfigError("config.agents: at least one agent is required")
    agents = [
        (parse_model(_require(a, "signal", f"agents[{i}]"), f"agents[{i}].signal"),
         parse_model(_require(a, "noise", f"agents[{i}]"), f"agents[{i}].noise"))
        for i, a in enumerate(agents_raw)
    ]
    n = _require(graph, "n", "graph", int)
    if n != len(agents):
        raise ConfigError(f"graph.n = {n} but {len(agents)} agents are listed")
    gamma = raw.get("gamma", 0.0)
    if not isinstance(gamma, (int, float)) or not math.isfinite(gamma):
        raise ConfigError("config.gamma must be a finite number")
    sim = dict(_SIM_DEFAULTS)
    sim_raw = raw.get("simulation", {})
    unknown = set(sim_raw) - set(_SIM_DEFAULTS) - {"muted_agents"}
    if unknown:
        raise ConfigError(f"simulation: unknown keys {sorted(unknown)}")
    sim.update({k: v for k, v in sim_raw.items() if k != "muted_agents"})
    if sim["hypothesis"] not in HYPOTHESES:
        raise ConfigError(f"simulation.hypothesis must be one of {HYPOTHESES}")
    muted = tuple(sim_raw.get("muted_agents", ()))
    return ParsedConfig(
        raw, agents, float(gamma), sim, muted, source,
        hashlib.sha256(text.encode()).hexdigest(),
    )


def read_config(path) -> ParsedConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    parsed = parse_config(data.decode("utf-8"), str(path))
    parsed.sha256 = hashlib.sha256(data).hexdigest()
    return parsed


def experiment_from(parsed: ParsedConfig, **overrides) -> ExperimentConfig:
    """Build graph and weights, then the ExperimentConfig; CLI overrides win when not None."""
    graph = build_graph(parsed.raw["graph"])
    weights = build_weights(parsed.raw["graph"], graph)
    sim = dict(parsed.simulation)
    sim["gamma"] = parsed.gamma
    sim["muted_agents"] = parsed.muted_agents
    sim.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(agents=tuple(parsed.agents), weights=weights, graph=graph, **sim)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_experiment(path, **overrides) -> ExperimentConfig:
    return experiment_from(read_config(path), **overrides)


@dataclass
class ValidationReport:
    """Per-item pass/fail; ``agents`` rows carry 1-based ids."""

    graph: dict = field(default_factory=dict)
    agents: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph.get("ok", False) and all(a["ok"] for a in self.agents)

    def to_json(self) -> dict:
        return {"ok": self.ok, "graph": self.graph, "agents": self.agents}

    def lines(self):
        g = self.graph
        if g["ok"]:
            yield f"graph: ok (n={g['n']}, edges={g['edges']}, consensus gap {g['consensus_gap']:.6g})"
        else:
            yield f"graph: FAIL [{g['kind']}] {g['message']}"
        for a in self.agents:
            if a["ok"]:
                flag = "  rho = 1 (informative)" if a["unit_pole"] else ""
                yield f"agent {a['agent']}: ok rho={a['rho']:.6g}{flag}"
            else:
                yield f"agent {a['agent']}: FAIL [{a['kind']}] {a['message']}"


def validate_parsed(parsed: ParsedConfig) -> ValidationReport:
    """Check graph, weights and every agent, collecting all failures instead of stopping."""
    from .arma import UNIT_TOL

    report = ValidationReport()
    try:
        graph = build_graph(parsed.raw["graph"])
        weights = build_weights(parsed.raw["graph"], graph)
        report.graph = {
            "ok": True, "n": graph.n, "edges": len(graph.edges), "consensus_gap": weights.consensus_gap,
        }
    except AssumptionViolation as exc:
        report.graph = {"ok": False, "kind": exc.kind, "message": str(exc)}
    except GraphGenerationError as exc:
        report.graph = {"ok": False, "kind": "disconnected", "message": str(exc)}
    for i, (signal, noise) in enumerate(parsed.agents, start=1):
        try:
            tf = whitened_signal_tf(signal, noise, agent=i)
            report.agents.append(
                {"agent": i, "ok": True, "rho": tf.rho, "unit_pole": abs(tf.rho - 1.0) < UNIT_TOL}
            )
        except AssumptionViolation as exc:
            report.agents.append({"agent": i, "ok": False, "kind": exc.kind, "message": str(exc)})
        except RcdError as exc:
            report.agents.append({"agent": i, "ok": False, "kind": type(exc).__name__, "message": str(exc)})
    return report


def dc_level_agent(b: float, amplitude: float, sigma: float) -> dict:
    """DC level A in integrated ARMA(1,1) noise with MA coefficient b."""
    return {
        "signal": {"ar": [1.0], "ma": [], "gain": amplitude},
        "noise": {"ar": [1.0], "ma": [float(b)], "gain": sigma},
    }


def dc_level_coefficients(seed: int, n: int, regime: str) -> np.ndarray:
    """MA coefficients b_i ~ U(-1, 1) from ``seed``.

    Regime "a" then sets agent 3's coefficient to 1 (unit pole); regime "b"
    redraws it from U(-1, 1) with the next value of the same stream.
    """
    rng = np.random.default_rng(seed)
    b = rng.uniform(-1.0, 1.0, n)
    if n >= 3:
        b[2] = 1.0 if regime == "a" else rng.uniform(-1.0, 1.0)
    return b


def dc_level_config(
    regime: str, b_seed: int, graph_seed: int, n: int = 40, amplitude: float = 1.0,
    sigma: float | None = None, simulation: dict | None = None,
) -> dict:
    if regime not in ("a", "b"):
        raise ConfigError("regime must be 'a' or 'b'")
    sigma = (10.0 if regime == "a" else 5.0) if sigma is None else sigma
    b = dc_level_coefficients(b_seed, n, regime)
    cfg = {
        "version": SCHEMA_VERSION,
        "graph": {
            "type": "erdos_renyi", "n": n, "p": 2 * math.log(n) / n, "seed": graph_seed,
            "weights": {"rule": "laplacian"},
        },
        "gamma": 0.0,
        "agents": [dc_level_agent(bi, amplitude, sigma) for bi in b],
        "coefficient_seed": b_seed,
    }
    if simulation:
        cfg["simulation"] = simulation
    return cfg
