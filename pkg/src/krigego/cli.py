"""Command-line entry point: fit a single surrogate, run one optimization
configuration, or drive the full benchmark comparison suite."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harness import (
    PROBLEMS,
    ExperimentConfig,
    SurrogateBuilder,
    VariantSpec,
    VARIANT_IDS,
    lhs_sample,
    run_experiment,
    validate_variant,
)
from .kriging import ExperimentalDesign

__all__ = ["main", "build_preset_configs", "ConfigError"]

_SCHEME_TO_ALGO = {
    "total-order": "pck-to",
    "two-factor": "pck-tf",
    "tensor-product": "pck-tensor",
}

# Table-driven synthetic comparison suite: every problem at its default
# initial/update budget, with the variant list the problem can carry.
_PRESET_VARIANTS = {
    "branin": ["ok", "uk1", "uk2", "bk", "pck-tensor"],
    "sasena": ["ok", "uk1", "uk2", "bk", "pck-tensor"],
    "hosaki": ["ok", "uk1", "uk2", "bk", "pck-tensor"],
    "hartman6": ["ok", "uk1", "uk2", "bk", "pck-to", "pck-tf"],
    "borehole": ["ok", "uk1", "bk", "pck-to", "pck-tf"],  # uk2 exceeds n_init
}


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krigego", description=__doc__)
    p.add_argument("--version", action="version", version=f"krigego {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=str, help="JSON config file; flags override its values")
        sp.add_argument("--problem", type=str)
        sp.add_argument("--algo", action="append", help="algorithm variant id (repeatable)")
        sp.add_argument("--pmax", type=int)
        sp.add_argument("--scheme", type=str, choices=sorted(_SCHEME_TO_ALGO))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tune", type=str, choices=["exhaustive", "simplified", "bfgs"])

    fit = sub.add_parser("fit", help="fit one surrogate on one design and report it")
    common(fit)
    fit.add_argument("--n", type=int, help="sample count for the design")

    for name, helptext in [
        ("optimize", "run the optimization loop for one variant"),
        ("benchmark", "run all configured variants with shared initial designs"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--n-init", type=int)
        sp.add_argument("--n-upd", type=int)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--out", type=str)
        sp.add_argument("--nv", type=int, help="validation sample count (0 disables)")
        sp.add_argument("--preset", type=str, choices=["paper-synthetic"])
    return p


def _merge_config_file(args):
    """Apply values from --config for any flag the user did not pass."""
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)
    return args


def _resolve_variants(args) -> list[VariantSpec]:
    algos = args.algo or []
    if isinstance(algos, str):
        algos = [algos]
    if args.scheme:
        algos = [_SCHEME_TO_ALGO[args.scheme] if a.startswith("pck") else a for a in algos]
    variants = []
    for a in algos:
        if a not in VARIANT_IDS:
            raise ConfigError(f"unknown algorithm id {a!r}; valid ids: {', '.join(VARIANT_IDS)}")
        variants.append(VariantSpec(algo=a, pmax=args.pmax, tune=args.tune))
    return variants


def _require_problem(args):
    if not args.problem:
        raise ConfigError("--problem is required")
    if args.problem not in PROBLEMS:
        raise ConfigError(f"unknown problem {args.problem!r}; valid: {', '.join(sorted(PROBLEMS))}")
    return PROBLEMS[args.problem]


def cmd_fit(args) -> int:
    problem = _require_problem(args)
    variants = _resolve_variants(args)
    if len(variants) != 1:
        raise ConfigError("fit needs exactly one --algo")
    variant = variants[0]
    n = args.n if args.n is not None else problem.n_init_default
    try:
        validate_variant(problem, variant, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed = args.seed if args.seed is not None else 0

    u = lhs_sample(n, problem.dimension, seed)
    b = problem.raw_bounds
    raw = b[:, 0] + u * (b[:, 1] - b[:, 0])
    y = np.array([problem.train_value(problem.evaluate(x)) for x in raw])
    design = ExperimentalDesign.from_normalized(2.0 * u - 1.0, b, y)

    builder = SurrogateBuilder(problem, variant)
    result = builder(design, seed)
    model, trace = result if isinstance(result, tuple) else (result, None)

    print(f"problem: {problem.name}   algorithm: {variant.algo}   n: {n}   seed: {seed}")
    print(f"loocv_rmse: {model.loocv_rmse!r}")
    print(f"theta: {[float(t) for t in model.theta.theta]!r}")
    print(f"trend terms ({model.trend_size}): {[list(z) for z in model.basis.index_set.indices]}")
    if trace is not None:
        print(f"selection: p={trace.p_chosen} scheme={trace.scheme} "
              f"prefix={trace.chosen_prefix_length} steps={len(trace.loocv_per_step)}")
    return 0


def _experiment_config(args, problem, variants) -> ExperimentConfig:
    return ExperimentConfig(
        problem=problem.name,
        variants=variants,
        n_init=args.n_init,
        n_upd=args.n_upd,
        reps=args.reps if args.reps is not None else 20,
        master_seed=args.seed if args.seed is not None else 0,
        out_dir=args.out if args.out is not None else "results",
        n_validation=args.nv if args.nv is not None else 10000,
        jobs=args.jobs,
    )


def build_preset_configs(preset, *, reps=None, seed=0, out_dir="results", jobs=None, nv=None):
    """Expand a named preset into per-problem experiment configs."""
    if preset != "paper-synthetic":
        raise ConfigError(f"unknown preset {preset!r}")
    configs = []
    for name, algos in _PRESET_VARIANTS.items():
        configs.append(
            ExperimentConfig(
                problem=name,
                variants=[VariantSpec(algo=a) for a in algos],
                reps=reps if reps is not None else 20,
                master_seed=seed,
                out_dir=str(Path(out_dir) / name),
                n_validation=nv if nv is not None else 10000,
                jobs=jobs,
            )
        )
    return configs


def _run_configs(configs) -> int:
    any_failure = False
    for config in configs:
        problem, n_init, _ = config.resolve()
        for v in config.variants:
            try:
                validate_variant(problem, v, n_init)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        manifest = run_experiment(config)
        print(f"{config.problem}: {len(manifest['records'])} records -> {config.out_dir}")
        if manifest["failures"]:
            any_failure = True
            for f in manifest["failures"]:
                print(f"  failed: {f['algorithm']} rep {f['rep']}: {f['error']}", file=sys.stderr)
    return 1 if any_failure else 0


def cmd_optimize(args) -> int:
    problem = _require_problem(args)
    variants = _resolve_variants(args)
    if len(variants) != 1:
        raise ConfigError("optimize needs exactly one --algo; use benchmark for comparisons")
    if args.reps is None:
        args.reps = 1
    return _run_configs([_experiment_config(args, problem, variants)])


def cmd_benchmark(args) -> int:
    if args.preset:
        configs = build_preset_configs(
            args.preset,
            reps=args.reps,
            seed=args.seed if args.seed is not None else 0,
            out_dir=args.out if args.out is not None else "results",
            jobs=args.jobs,
            nv=args.nv,
        )
        return _run_configs(configs)
    problem = _require_problem(args)
    variants = _resolve_variants(args)
    if not variants:
        raise ConfigError("benchmark needs at least one --algo (or --preset)")
    return _run_configs([_experiment_config(args, problem, variants)])


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config_file(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        if args.command == "benchmark":
            return cmd_benchmark(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
