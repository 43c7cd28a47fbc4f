"""Zero-shot action recognition by kernel regression into word-embedding space."""

from ._zslkit import (
    ConvergenceError,
    InvalidArgument,
    ParseError,
    SemanticRegressor,
    VocabularyError,
    ZslkitError,
    chi2_distance,
    config_fingerprint,
    eval_multishot,
    eval_zsl,
    fit_regressor,
    generate_splits,
    gram_matrix,
    heuristic_gamma,
    kmeans,
    match,
    self_train,
    simulate_random_guess,
    tokenize,
    train_svr,
)

__all__ = [
    "ConvergenceError",
    "InvalidArgument",
    "ParseError",
    "SemanticRegressor",
    "VocabularyError",
    "ZslkitError",
    "chi2_distance",
    "config_fingerprint",
    "eval_multishot",
    "eval_zsl",
    "fit_regressor",
    "generate_splits",
    "gram_matrix",
    "heuristic_gamma",
    "kmeans",
    "match",
    "self_train",
    "simulate_random_guess",
    "tokenize",
    "train_svr",
]
