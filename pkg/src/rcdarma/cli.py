"""Command line entry point: ``rcdarma {validate,analyze,simulate,moments,dc-config,plot}``.

Exit codes: 0 success, 2 validation failure, 3 runtime or numeric failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analysis import classify, spectral_summary
from .arma import run_filter
from .config import dc_level_config, experiment_from, read_config, validate_parsed
from .detector import DetectorState, rcd_step, write_trace
from .errors import AssumptionViolation, ConfigError, DegenerateProblemError, GraphGenerationError, RcdError
from .simharness import HYPOTHESES, moment_check, predicted_curves, run_experiment, trial_noise

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
_VALIDATION_ERRORS = (ConfigError, AssumptionViolation, GraphGenerationError, DegenerateProblemError)


def _now():
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _artifact_version():
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"], capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _emit(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    report = validate_parsed(read_config(args.config))
    if args.json:
        _emit(report.to_json(), None)
    else:
        for line in report.lines():
            print(line)
    return EXIT_OK if report.ok else EXIT_INVALID


def analyze(config_path, gamma=None):
    parsed = read_config(config_path)
    n = len(parsed.agents)
    summary = spectral_summary(parsed.agents)
    return classify(summary, n, parsed.gamma if gamma is None else gamma)


def cmd_analyze(args) -> int:
    _emit(analyze(args.config, args.gamma).to_json(), args.out)
    return EXIT_OK


def _overrides(args):
    return dict(
        seed=args.seed, trials=args.trials, horizon=args.horizon, hypothesis=args.hypothesis,
        gamma=args.gamma, stride=args.stride,
    )


def _write_trace(config, path):
    """Trial 0 through the streaming detector, same noise stream as the batch run."""
    eps = trial_noise(config.seed, 0, config.horizon, config.n_agents)
    noise = np.column_stack([run_filter(model, eps[:, i]) for i, (_, model) in enumerate(config.agents)])
    if config.hypothesis != "H0":
        theta, _ = config.signals()
        noise = noise + theta
    state = DetectorState.create(config.agents, config.weights, config.gamma)
    records = []
    for k in range(config.horizon + 1):
        state, rec = rcd_step(state, noise[k])
        records.append(rec)
    with open(path, "w", newline="") as fh:
        write_trace(records, fh)


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    parsed = read_config(args.config)
    config = experiment_from(parsed, **_overrides(args))
    if config.muted_agents and args.trace:
        raise ConfigError("--trace does not support muted agents")
    written = []
    started, t0 = _now(), time.perf_counter()
    try:
        curves = run_experiment(config, workers=args.workers)
        csv_path = out / "error_curves.csv"
        written.append(csv_path)
        with open(csv_path, "w", newline="") as fh:
            curves.to_csv(fh)
        if args.trace:
            trace_path = out / "trace.csv"
            written.append(trace_path)
            _write_trace(config, trace_path)
        pred_f, pred_m = predicted_curves(config, curves.steps)
        gaps = {}
        if curves.p_false_alarm is not None:
            gaps["p_false_alarm"] = float(np.abs(curves.p_false_alarm[-1] - pred_f[-1]).max())
        if curves.p_miss is not None:
            gaps["p_miss"] = float(np.abs(curves.p_miss[-1] - pred_m[-1]).max())
        manifest = {
            "config_path": str(Path(args.config)),
            "config_sha256": parsed.sha256,
            "artifact_version": _artifact_version(),
            "backend": kernels.BACKEND,
            "seed": config.seed,
            "trials": config.trials,
            "horizon": config.horizon,
            "hypothesis": config.hypothesis,
            "gamma": config.gamma,
            "stride": config.stride,
            "workers": args.workers,
            "started": started,
            "finished": _now(),
            "wall_time_s": round(time.perf_counter() - t0, 3),
            "max_abs_gap_final_k": gaps,
        }
        manifest_path = out / "manifest.json"
        written.append(manifest_path)
        manifest["outputs"] = [p.name for p in written]
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    summary = ", ".join(f"{k} {v:.4g}" for k, v in gaps.items())
    print(f"k={config.horizon}: max |empirical - predicted| {summary} ({config.trials} trials)")
    print(f"wrote {', '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_moments(args) -> int:
    config = experiment_from(read_config(args.config), seed=args.seed, trials=args.trials)
    check = moment_check(config, steps=args.steps, workers=args.workers)
    _emit(check.to_json(), args.out)
    return EXIT_OK


def cmd_dc_config(args) -> int:
    sim = {"trials": args.trials, "horizon": args.horizon, "seed": args.sim_seed,
           "hypothesis": "H1" if args.regime == "a" else "both", "stride": 10}
    cfg = dc_level_config(args.regime, args.seed, args.graph_seed, n=args.n, sigma=args.sigma, simulation=sim)
    _emit(cfg, args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    script = [sys.executable, "-m", "rcdarma.plot_curves", args.csv, "--out", args.out]
    if args.agents:
        script += ["--agents", *map(str, args.agents)]
    return subprocess.call(script)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcdarma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check graph, weights and every agent model")
    p.add_argument("config")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="asymptotic regime, exponents and floors as JSON")
    p.add_argument("config")
    p.add_argument("--gamma", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo error curves")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--hypothesis", choices=HYPOTHESES)
    p.add_argument("--gamma", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--trace", action="store_true", help="also write per-step k, agent, l, D for trial 0")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="z-scores of simulated l(k) moments against the recursions")
    p.add_argument("config")
    p.add_argument("--steps", type=int, nargs="+", default=[10, 100, 1000])
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("dc-config", help="generate a DC-level-in-ARMA-noise experiment config")
    p.add_argument("--regime", choices=("a", "b"), required=True)
    p.add_argument("--seed", type=int, required=True, help="seed for the MA coefficients")
    p.add_argument("--graph-seed", type=int, default=1)
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--sigma", type=float)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--horizon", type=int, default=4000)
    p.add_argument("--sim-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dc_config)

    p = sub.add_parser("plot", help="render an error-curve CSV (needs matplotlib)")
    p.add_argument("csv")
    p.add_argument("--out", default="error_curves.png")
    p.add_argument("--agents", type=int, nargs="*")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RcdError, ArithmeticError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
