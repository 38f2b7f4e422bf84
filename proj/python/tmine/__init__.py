"""Unsupervised commonsense triple scoring.

Thin wrapper over the C++ extension. Backends are passed explicitly to each
operation; a LookupBackend or UniformBackend serves both the masked and the
causal role.
"""

from ._tmine import (
    BackendError,
    ConfigError,
    DataError,
    Error,
    FunctionBackend,
    LabeledTriple,
    LookupBackend,
    MixtureModel,
    PmiComponents,
    RemoteBackend,
    Report,
    ScoredTriple,
    Triple,
    UniformBackend,
    aic,
    build_balanced_dataset,
    enumerate_candidates,
    f1_score,
    fit_gmm_em,
    generate,
    lambda_grid,
    normalize_surface,
    parse_candidate_line,
    parse_labeled_line,
    relations,
    run_scoring,
    run_task1,
    run_task2,
    sample_negatives,
    score_triple,
    select_best,
    tune_lambda_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
