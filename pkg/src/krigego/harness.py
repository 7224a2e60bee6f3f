"""Benchmark harness: repeated optimization runs with shared initial
designs, performance metrics, and CSV/JSON persistence.

Each repetition draws one Latin hypercube design that every algorithm
variant shares; runs are independent and may execute in a process pool.
All files are written deterministically (fixed field order, shortest
round-trip float formatting, no timestamps) so re-runs with the same
master seed are byte-identical.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ego import EgoRunError, ego_step, initial_state
from .hyperopt import TuneKind, TuneState, TuneStrategy
from .kriging import ExperimentalDesign, KrigingError, denormalize_point
from .polybasis import IndexScheme
from .testfunctions import PROBLEMS, Problem
from .trendselect import build_bk, build_pck, build_uk_fixed, build_uk_frequentist

__all__ = [
    "lhs_sample",
    "improvement",
    "validation_rmse",
    "BoxplotStats",
    "boxplot_stats",
    "VariantSpec",
    "VARIANT_IDS",
    "SurrogateBuilder",
    "validate_variant",
    "RunRecord",
    "ExperimentConfig",
    "ego_run",
    "run_experiment",
    "write_record_csv",
    "write_convergence_csv",
    "write_boxplot_csv",
]

VARIANT_IDS = ("ok", "uk1", "uk2", "bk", "pck-to", "pck-tf", "pck-tensor", "uk1-freq")

_DEFAULT_TUNE = {
    "ok": "exhaustive",
    "uk1": "exhaustive",
    "uk2": "exhaustive",
    "bk": "simplified",
    "pck-to": "simplified",
    "pck-tf": "simplified",
    "pck-tensor": "simplified",
    "uk1-freq": "simplified",
}


def lhs_sample(n, m, seed):
    """Latin hypercube in [0,1)^m: per column, one jittered point per stratum."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    u = np.empty((n, m))
    for j in range(m):
        perm = rng.permutation(n)
        u[:, j] = (perm + rng.random(n)) / n
    return u


def improvement(best, optimum):
    """Relative distance of the incumbent to the known optimum."""
    if optimum == 0.0:
        raise ValueError("improvement metric is undefined for a zero optimum")
    return abs(optimum - best) / abs(optimum)


@dataclass(frozen=True)
class BoxplotStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]
    mean: float


def boxplot_stats(values) -> BoxplotStats:
    """Quartiles, 1.5-IQR whiskers clipped to the data, outliers, and mean."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values")
    q1, med, q3 = (float(q) for q in np.percentile(v, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    whisker_low = float(inside.min()) if inside.size else q1
    whisker_high = float(inside.max()) if inside.size else q3
    outliers = tuple(float(x) for x in np.sort(v[(v < lo_fence) | (v > hi_fence)]))
    return BoxplotStats(q1, med, q3, whisker_low, whisker_high, outliers, float(np.mean(v)))


def validation_rmse(model, problem: Problem, n_v, seed):
    """RMSE of the surrogate against the training-scale objective on
    uniform random points."""
    if n_v < 1:
        raise ValueError("need at least one validation point")
    rng = np.random.default_rng(seed)
    b = problem.raw_bounds
    raw = rng.uniform(b[:, 0], b[:, 1], size=(int(n_v), problem.dimension))
    truth = np.array([problem.train_value(problem.evaluate(x)) for x in raw])
    norm = 2.0 * (raw - b[:, 0]) / (b[:, 1] - b[:, 0]) - 1.0
    pred = model.predict_many(norm)
    return float(np.sqrt(np.mean((truth - pred) ** 2)))


@dataclass(frozen=True)
class VariantSpec:
    """One algorithm variant: surrogate kind plus its scan settings."""

    algo: str
    pmax: int | None = None
    tune: str | None = None

    def __post_init__(self):
        if self.algo not in VARIANT_IDS:
            raise ValueError(f"unknown algorithm id {self.algo!r}; valid: {VARIANT_IDS}")

    @property
    def tune_kind(self) -> str:
        return self.tune if self.tune is not None else _DEFAULT_TUNE[self.algo]

    def resolved_pmax(self, problem: Problem) -> int:
        if self.pmax is not None:
            return self.pmax
        if self.algo in problem.pmax_defaults:
            return problem.pmax_defaults[self.algo]
        return {"ok": 0, "uk1": 1, "uk2": 2, "uk1-freq": 1}.get(self.algo, 2)


def _total_order_size(m, p):
    return math.comb(m + p, p)


def validate_variant(problem: Problem, variant: VariantSpec, n_init: int):
    """Reject variants whose trend cannot be carried by n_init samples."""
    m = problem.dimension
    if variant.algo == "uk1" and _total_order_size(m, 1) > n_init:
        raise ValueError(f"uk1 needs {_total_order_size(m, 1)} samples, have {n_init}")
    if variant.algo == "uk2" and _total_order_size(m, 2) > n_init:
        raise ValueError(
            f"uk2 polynomial size {_total_order_size(m, 2)} exceeds the sample size {n_init} "
            f"for {problem.name}"
        )
    if variant.algo == "uk1-freq" and _total_order_size(m, 1) >= n_init:
        raise ValueError(f"uk1-freq needs the dictionary ({_total_order_size(m, 1)}) below n ({n_init})")


class SurrogateBuilder:
    """Per-run builder: owns the warm-start state for one optimization run."""

    def __init__(self, problem: Problem, variant: VariantSpec, ga_population=100, ga_generations=200):
        self.problem = problem
        self.variant = variant
        self.ga_population = ga_population
        self.ga_generations = ga_generations
        self.state = TuneState()

    def _strategy(self, seed) -> TuneStrategy:
        return TuneStrategy(
            kind=TuneKind(self.variant.tune_kind),
            ga_population=self.ga_population,
            ga_generations=self.ga_generations,
            rng_seed=int(seed),
        )

    def __call__(self, design: ExperimentalDesign, seed):
        strategy = self._strategy(seed)
        algo = self.variant.algo
        pmax = self.variant.resolved_pmax(self.problem)
        if algo == "ok":
            return build_uk_fixed(design, 0, strategy, self.state), None
        if algo == "uk1":
            return build_uk_fixed(design, 1, strategy, self.state), None
        if algo == "uk2":
            return build_uk_fixed(design, 2, strategy, self.state), None
        if algo == "bk":
            return build_bk(design, range(2, max(2, pmax) + 1), strategy, self.state)
        if algo == "pck-to":
            return build_pck(design, range(0, pmax + 1), IndexScheme.TOTAL_ORDER, strategy, self.state)
        if algo == "pck-tf":
            return build_pck(design, [max(2, pmax)], IndexScheme.TWO_FACTOR, strategy, self.state)
        if algo == "pck-tensor":
            return build_pck(design, range(0, pmax + 1), IndexScheme.TENSOR_PRODUCT, strategy, self.state)
        if algo == "uk1-freq":
            return build_uk_frequentist(design, max(1, pmax), strategy, self.state)
        raise ValueError(f"unknown algorithm id {algo!r}")


@dataclass
class RunRecord:
    """One optimization repetition: every evaluation plus derived metrics."""

    problem: str
    algorithm: str
    rep: int
    seed: int
    evaluations: list  # dicts: iteration, phase, x_raw, y_raw, best_so_far, improvement
    best_trajectory: list
    improvement_trajectory: list
    selection_traces: list
    validation_rmse: float | None = None
    failed: str | None = None


@dataclass
class ExperimentConfig:
    """Benchmark request: one problem, several variants, repeated runs."""

    problem: str
    variants: list
    n_init: int | None = None
    n_upd: int | None = None
    reps: int = 20
    master_seed: int = 0
    out_dir: str = "results"
    n_validation: int = 10000
    jobs: int | None = None
    ga_population: int = 100
    ga_generations: int = 200

    def resolve(self):
        problem = PROBLEMS[self.problem]
        n_init = self.n_init if self.n_init is not None else problem.n_init_default
        n_upd = self.n_upd if self.n_upd is not None else problem.n_upd_default
        return problem, n_init, n_upd


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def ego_run(problem: Problem, variant: VariantSpec, *, lhs_u, run_seed, n_upd,
            rep=0, ga_population=100, ga_generations=200) -> RunRecord:
    """One full optimization run on a prepared initial design.

    Evaluations, bests, and the improvement metric are recorded in raw
    problem units; for transformed problems the surrogate itself trains on
    the transformed responses.
    """
    b = problem.raw_bounds
    raw_init = b[:, 0] + lhs_u * (b[:, 1] - b[:, 0])
    norm_init = 2.0 * lhs_u - 1.0

    evaluations = []
    raw_values = []
    best_raw = math.inf
    for i, x_raw in enumerate(raw_init):
        y_raw = problem.evaluate(x_raw)
        raw_values.append(y_raw)
        best_raw = min(best_raw, y_raw)
        evaluations.append(
            {
                "iteration": i + 1,
                "phase": "init",
                "x_raw": [float(v) for v in x_raw],
                "y_raw": float(y_raw),
                "best_so_far": float(best_raw),
                "improvement": improvement(best_raw, problem.known_optimum_value),
            }
        )
    train_values = np.array([problem.train_value(y) for y in raw_values])
    design = ExperimentalDesign.from_normalized(norm_init, b, train_values)

    best_trajectory = [best_raw]
    raw_by_norm_order = []

    def objective(x_norm):
        x_raw = denormalize_point(x_norm, b)
        y_raw = problem.evaluate(x_raw)
        raw_by_norm_order.append((x_raw, y_raw))
        return problem.train_value(y_raw)

    builder = SurrogateBuilder(problem, variant, ga_population, ga_generations)
    state = initial_state(design)
    failure = None
    for _ in range(int(n_upd)):
        try:
            ego_step(state, builder, objective, run_seed)
        except (EgoRunError, KrigingError) as exc:
            failure = str(exc)
            break
        x_raw, y_raw = raw_by_norm_order[-1]
        best_raw = min(best_raw, y_raw)
        best_trajectory.append(best_raw)
        evaluations.append(
            {
                "iteration": len(evaluations) + 1,
                "phase": "update",
                "x_raw": [float(v) for v in x_raw],
                "y_raw": float(y_raw),
                "best_so_far": float(best_raw),
                "improvement": improvement(best_raw, problem.known_optimum_value),
            }
        )

    traces = [h["trace"] for h in state.history]
    return RunRecord(
        problem=problem.name,
        algorithm=variant.algo,
        rep=rep,
        seed=int(run_seed),
        evaluations=evaluations,
        best_trajectory=[float(v) for v in best_trajectory],
        improvement_trajectory=[
            improvement(v, problem.known_optimum_value) for v in best_trajectory
        ],
        selection_traces=traces,
        failed=failure,
    )


def _run_task(args):
    (problem_name, variant, rep, lhs_u, run_seed, val_seed, n_upd, n_validation,
     ga_population, ga_generations) = args
    problem = PROBLEMS[problem_name]
    try:
        record = ego_run(
            problem, variant,
            lhs_u=lhs_u, run_seed=run_seed, n_upd=n_upd, rep=rep,
            ga_population=ga_population, ga_generations=ga_generations,
        )
    except Exception as exc:  # record the failure, keep the batch alive
        return RunRecord(problem_name, variant.algo, rep, int(run_seed),
                         [], [], [], [], failed=str(exc))
    if n_validation > 0 and record.failed is None:
        try:
            b = problem.raw_bounds
            raw_init = b[:, 0] + lhs_u * (b[:, 1] - b[:, 0])
            train = np.array([problem.train_value(problem.evaluate(x)) for x in raw_init])
            design = ExperimentalDesign.from_normalized(2.0 * lhs_u - 1.0, b, train)
            builder = SurrogateBuilder(problem, variant, ga_population, ga_generations)
            model, _ = _as_pair(builder(design, _derive_seed(run_seed, 0xF17)))
            record.validation_rmse = validation_rmse(model, problem, n_validation, val_seed)
        except Exception as exc:
            record.validation_rmse = None
            record.failed = f"validation: {exc}"
    return record


def _as_pair(result):
    return result if isinstance(result, tuple) else (result, None)


def _fmt(v) -> str:
    return repr(float(v))


def write_record_csv(record: RunRecord, path, dimension):
    cols = ["problem", "algorithm", "rep", "iteration", "phase"]
    cols += [f"x_{j + 1}" for j in range(dimension)]
    cols += ["y_raw", "best_so_far", "improvement"]
    lines = [",".join(cols)]
    for ev in record.evaluations:
        row = [record.problem, record.algorithm, str(record.rep), str(ev["iteration"]), ev["phase"]]
        row += [_fmt(v) for v in ev["x_raw"]]
        row += [_fmt(ev["y_raw"]), _fmt(ev["best_so_far"]), _fmt(ev["improvement"])]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_convergence_csv(path, problem_name, per_algo_improvements):
    """per_algo_improvements: {algo: (reps, n_upd+1) array of I values}."""
    lines = ["problem,algorithm,iteration,median_I,q1_I,q3_I,mean_I"]
    for algo in sorted(per_algo_improvements):
        I = np.asarray(per_algo_improvements[algo], dtype=float)
        for it in range(I.shape[1]):
            col = I[:, it]
            q1, med, q3 = np.percentile(col, [25.0, 50.0, 75.0])
            lines.append(
                ",".join(
                    [problem_name, algo, str(it), _fmt(med), _fmt(q1), _fmt(q3), _fmt(col.mean())]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_boxplot_csv(path, problem_name, metric_values):
    """metric_values: {(algo, metric): 1-D array of values}."""
    lines = [
        "problem,algorithm,metric,q1,median,q3,whisker_low,whisker_high,mean,outliers"
    ]
    for algo, metric in sorted(metric_values):
        vals = metric_values[(algo, metric)]
        st = boxplot_stats(vals)
        outliers = ";".join(_fmt(v) for v in st.outliers)
        lines.append(
            ",".join(
                [
                    problem_name, algo, metric,
                    _fmt(st.q1), _fmt(st.median), _fmt(st.q3),
                    _fmt(st.whisker_low), _fmt(st.whisker_high), _fmt(st.mean),
                    outliers,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every (variant, repetition) pair and persist records + summaries.

    Initial designs are shared across variants within each repetition.
    Returns a manifest dict (also written to out_dir/manifest.json).
    """
    problem, n_init, n_upd = config.resolve()
    variants = [v if isinstance(v, VariantSpec) else VariantSpec(**v) for v in config.variants]
    if not variants:
        raise ValueError("no algorithm variants configured")
    for v in variants:
        validate_variant(problem, v, n_init)

    out = Path(config.out_dir)
    (out / "records").mkdir(parents=True, exist_ok=True)
    (out / "summary").mkdir(parents=True, exist_ok=True)

    rep_seeds = {}
    tasks = []
    for rep in range(config.reps):
        lhs_seed = _derive_seed(config.master_seed, rep, 0)
        val_seed = _derive_seed(config.master_seed, rep, 1)
        lhs_u = lhs_sample(n_init, problem.dimension, lhs_seed)
        rep_seeds[rep] = {"lhs": lhs_seed, "validation": val_seed, "runs": {}}
        for vi, variant in enumerate(variants):
            run_seed = _derive_seed(config.master_seed, rep, 2, vi)
            rep_seeds[rep]["runs"][variant.algo] = run_seed
            tasks.append(
                (problem.name, variant, rep, lhs_u, run_seed, val_seed, n_upd,
                 config.n_validation, config.ga_population, config.ga_generations)
            )

    jobs = config.jobs if config.jobs is not None else (os.cpu_count() or 1)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = [_run_task(t) for t in tasks]

    by_key = {(r.algorithm, r.rep): r for r in records}
    failures = []
    record_paths = []
    for (algo, rep), rec in sorted(by_key.items()):
        stem = f"{problem.name}__{algo}__rep{rep:03d}"
        path = out / "records" / f"{stem}.csv"
        write_record_csv(rec, path, problem.dimension)
        record_paths.append(str(path.relative_to(out)))
        if any(t is not None for t in rec.selection_traces):
            (out / "records" / f"{stem}.traces.json").write_text(
                json.dumps(rec.selection_traces, sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
        if rec.failed is not None:
            failures.append({"algorithm": algo, "rep": rep, "error": rec.failed})

    per_algo = {}
    rmse_values = {}
    for variant in variants:
        rows = []
        rmses = []
        for rep in range(config.reps):
            rec = by_key[(variant.algo, rep)]
            if rec.failed is None and len(rec.improvement_trajectory) == n_upd + 1:
                rows.append(rec.improvement_trajectory)
            if rec.validation_rmse is not None:
                rmses.append(rec.validation_rmse)
        if rows:
            per_algo[variant.algo] = np.asarray(rows)
        if rmses:
            rmse_values[(variant.algo, "validation_rmse")] = np.asarray(rmses)

    conv_path = out / "summary" / f"{problem.name}__convergence.csv"
    box_path = out / "summary" / f"{problem.name}__boxplot.csv"
    if per_algo:
        write_convergence_csv(conv_path, problem.name, per_algo)
        final_values = {
            (algo, "final_improvement"): I[:, -1] for algo, I in per_algo.items()
        }
        final_values.update(rmse_values)
        write_boxplot_csv(box_path, problem.name, final_values)

    manifest = {
        "version": __version__,
        "problem": problem.name,
        "master_seed": config.master_seed,
        "n_init": n_init,
        "n_upd": n_upd,
        "reps": config.reps,
        "n_validation": config.n_validation,
        "variants": [asdict(v) for v in variants],
        "per_rep_seeds": {str(k): v for k, v in rep_seeds.items()},
        "records": sorted(record_paths),
        "failures": failures,
        "summary": {
            "convergence": str(conv_path.relative_to(out)) if per_algo else None,
            "boxplot": str(box_path.relative_to(out)) if per_algo else None,
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
