"""Time the compiled and NumPy Monte Carlo kernels on the same workload.

    python benchmarks/bench_kernel.py [--trials 256] [--horizon 1000] [--agents 40]

Each kernel is timed alone on identical pre-drawn noise, then end to end
through run_experiment (which adds noise generation and the one-off signal
preparation). Both backends must produce identical error counts.
"""

import argparse
import time

import numpy as np

from rcdarma import kernels
from rcdarma.arma import ArmaModel
from rcdarma.network import erdos_renyi, laplacian_weights
from rcdarma import simharness
from rcdarma.simharness import ExperimentConfig, run_experiment, trial_noise


def build(n, horizon, trials):
    rng = np.random.default_rng(0)
    agents = [(ArmaModel([1.0], [], 1.0), ArmaModel([1.0], [b], 5.0)) for b in rng.uniform(-0.9, 0.9, n)]
    graph = erdos_renyi(n, min(1.0, 2 * np.log(n) / n), 1)
    return ExperimentConfig(agents, laplacian_weights(graph), horizon=horizon, trials=trials, stride=10)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=256)
    parser.add_argument("--horizon", type=int, default=1000)
    parser.add_argument("--agents", type=int, default=40)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--chunk", type=int, default=simharness.CHUNK_TRIALS, help="trials per kernel call")
    args = parser.parse_args()

    config = build(args.agents, args.horizon, args.trials)
    prep = simharness._prepare(config)
    n, k1 = args.agents, args.horizon + 1
    eps = np.stack([trial_noise(0, t, args.horizon, n) for t in range(args.trials)])
    rows = simharness._row_map(args.horizon, config.record_steps())
    no_samples = np.full(k1, -1, dtype=np.int64)

    def kernel_once(fn):
        # same chunking as run_experiment
        fa = np.zeros((len(config.record_steps()), n), dtype=np.int64)
        miss = np.zeros_like(fa)
        for start in range(0, args.trials, args.chunk):
            block = eps[start:start + args.chunk]
            empty = np.zeros((len(block), 0, n))
            fn(block, prep["theta"], prep["theta_hat"], prep["noise_ar"], prep["noise_ma"], prep["noise_gain"],
               prep["indptr"], prep["indices"], prep["wdata"], 0.0, True, True, rows, fa, miss, no_samples,
               empty, empty.copy())
        return fa, miss

    kernel_times, e2e_times, counts = {}, {}, {}
    for name, fn in sorted(kernels.BACKENDS.items()):
        kernel_times[name] = min(_timed(lambda: kernel_once(fn))[0] for _ in range(args.repeat))
        counts[name] = kernel_once(fn)
        e2e_times[name] = min(_timed(lambda: run_experiment(config, backend=name))[0] for _ in range(args.repeat))

    ref = next(iter(counts.values()))
    for name, (fa, miss) in counts.items():
        if not (np.array_equal(fa, ref[0]) and np.array_equal(miss, ref[1])):
            raise SystemExit(f"backend {name} disagrees with the others")

    steps = args.trials * k1
    print(f"{args.trials} trials x {k1} steps x {n} agents, both hypotheses, {args.chunk} trials per call")
    for name in kernel_times:
        print(f"{name:>7}: kernel {kernel_times[name]:7.3f} s ({1e6 * kernel_times[name] / steps:.2f} us per "
              f"trial-step), end to end {e2e_times[name]:7.3f} s")
    if len(kernel_times) == 2:
        print(f"kernel speedup: {kernel_times['python'] / kernel_times['cython']:.1f}x, "
              f"end to end: {e2e_times['python'] / e2e_times['cython']:.1f}x")
    else:
        print("compiled kernel not available; only the NumPy backend was timed")


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return time.perf_counter() - t0, out

if __name__ == "__main__":
    main()
