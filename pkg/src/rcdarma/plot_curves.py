"""Render error-curve CSVs written by ``rcdarma simulate`` (requires matplotlib)."""

import argparse
import csv
import sys
from collections import defaultdict


def load(path):
    curves = defaultdict(lambda: defaultdict(list))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            agent = int(row["agent"])
            for col in ("p_false_alarm", "p_miss"):
                if col in row:
                    curves[col][agent].append((int(row["k"]), float(row[col])))
    return curves


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv")
    parser.add_argument("--out", default="error_curves.png")
    parser.add_argument("--agents", type=int, nargs="*")
    args = parser.parse_args(argv)
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; pip install 'artifact[plot]'", file=sys.stderr)
        return 3
    curves = load(args.csv)
    fig, axes = plt.subplots(1, len(curves), figsize=(6 * len(curves), 4), squeeze=False)
    for ax, (col, per_agent) in zip(axes[0], curves.items()):
        for agent in args.agents or sorted(per_agent):
            pts = [(k, p) for k, p in per_agent[agent] if p > 0]
            if pts:
                ax.semilogy(*zip(*pts), label=f"agent {agent}", lw=1)
        ax.set_xlabel("k")
        ax.set_ylabel(col)
        if args.agents:
            ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    return 0


if __name__ == "__main__":
    sys.exit(main())
