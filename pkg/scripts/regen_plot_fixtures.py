#!/usr/bin/env python3
"""Regenerate the plotting frontend's fixture CSVs.

Runs the Branin comparison (constant trend vs tensor-dictionary selection,
20 repetitions) and copies the summary files into frontend/tests/fixtures.
The run is fully seeded, so the fixtures are reproducible byte-for-byte.
"""

import shutil
import sys
import tempfile
from pathlib import Path

from krigego.harness import ExperimentConfig, VariantSpec, run_experiment

FIXTURES = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        config = ExperimentConfig(
            problem="branin",
            variants=[VariantSpec(algo="ok"), VariantSpec(algo="pck-tensor", pmax=4)],
            n_init=20, n_upd=10, reps=20, master_seed=2024,
            out_dir=tmp, n_validation=200, jobs=1,
        )
        run_experiment(config)
        FIXTURES.mkdir(parents=True, exist_ok=True)
        for name in ("branin__convergence.csv", "branin__boxplot.csv"):
            shutil.copy(Path(tmp) / "summary" / name, FIXTURES / name)
            print(f"wrote {FIXTURES / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
