"""Kriging surrogates with automatic polynomial trend selection, driven by
an expected-improvement global optimization loop, plus a benchmark harness
for repeated synthetic experiments."""

__version__ = "0.1.0"

from .polybasis import (  # noqa: F401
    BasisSpec,
    IndexScheme,
    MultiIndexSet,
    PolyFamily,
    bk_encode,
    eval_basis,
    generate_index_set,
    legendre_eval,
    monic_eval,
)
from .kriging import (  # noqa: F401
    DegenerateResponseError,
    ExperimentalDesign,
    Hyperparameters,
    IllConditionedError,
    KrigingError,
    KrigingModel,
    SingularTrendError,
    concentrated_log_likelihood,
    fit,
    loocv_rmse,
    predict,
    predict_mse,
)
from .hyperopt import TuneKind, TuneState, TuneStrategy  # noqa: F401
from .trendselect import (  # noqa: F401
    SelectionTrace,
    build_bk,
    build_pck,
    build_uk_fixed,
    build_uk_frequentist,
    lars_select,
)
from .ego import expected_improvement, maximize_ei  # noqa: F401
from .testfunctions import PROBLEMS, Problem  # noqa: F401
from .harness import (  # noqa: F401
    ExperimentConfig,
    RunRecord,
    VariantSpec,
    boxplot_stats,
    ego_run,
    improvement,
    lhs_sample,
    run_experiment,
    validation_rmse,
)
