#!/usr/bin/env python3
"""Run the full synthetic comparison suite (all five problems, default
budgets, 20 repetitions) and render the summary figures if the plotting
frontend has been built.

Equivalent to `krigego benchmark --preset paper-synthetic` plus a plot pass.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from krigego.cli import build_preset_configs
from krigego.harness import run_experiment

FRONTEND = Path(__file__).resolve().parents[1] / "frontend"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/paper-synthetic")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--nv", type=int, default=10000)
    args = ap.parse_args()

    failures = 0
    for config in build_preset_configs(
        "paper-synthetic", reps=args.reps, seed=args.seed,
        out_dir=args.out, jobs=args.jobs, nv=args.nv,
    ):
        print(f"== {config.problem}: {len(config.variants)} variants x {config.reps} reps")
        manifest = run_experiment(config)
        failures += len(manifest["failures"])
        out = Path(config.out_dir)
        plot_cli = FRONTEND / "dist" / "cli.js"
        if plot_cli.exists():
            for kind, src in [
                ("convergence-median", out / "summary" / f"{config.problem}__convergence.csv"),
                ("final-boxplot", out / "summary" / f"{config.problem}__boxplot.csv"),
                ("rmse-boxplot", out / "summary" / f"{config.problem}__boxplot.csv"),
            ]:
                dst = out / "summary" / f"{config.problem}__{kind}.svg"
                subprocess.run(
                    ["node", str(plot_cli), "--kind", kind, "--in", str(src), "--out", str(dst)],
                    check=True,
                )
            print(f"   figures under {out / 'summary'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
