import numpy as np
import pytest

from krigego.harness import lhs_sample
from krigego.hyperopt import TuneStrategy
from krigego.kriging import ExperimentalDesign


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_design(n, m, seed, func=None, bounds=None):
    """LHS design on [0,1]^m (or the given box) with a smooth response."""
    u = lhs_sample(n, m, seed)
    if bounds is None:
        bounds = np.tile([0.0, 1.0], (m, 1))
    b = np.asarray(bounds, dtype=float)
    raw = b[:, 0] + u * (b[:, 1] - b[:, 0])
    if func is None:
        func = lambda x: float(np.sum(np.sin(3.0 * x)) + 0.5 * np.sum(x**2))
    y = np.array([func(x) for x in raw])
    return ExperimentalDesign.from_normalized(2.0 * u - 1.0, b, y)


def quick_strategy(kind="simplified", seed=0):
    """Small GA budget for unit tests that only need a sane theta."""
    return TuneStrategy(
        kind=kind, ga_population=24, ga_generations=40,
        rng_seed=seed, ga_stall_generations=10,
    )
