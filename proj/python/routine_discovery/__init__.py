"""Routine / non-routine day discovery in egocentric photo-stream features."""

from ._core import (
    ConfigError,
    IsoForest,
    RoutineError,
    __version__,
    aggregate_votes,
    average_path_length,
    decide,
    detect,
    evaluate,
    fit_iforest,
    report,
    run,
    score_from_path,
    signatures,
    synth,
)

__all__ = [
    "ConfigError",
    "IsoForest",
    "RoutineError",
    "__version__",
    "aggregate_votes",
    "average_path_length",
    "decide",
    "detect",
    "evaluate",
    "fit_iforest",
    "report",
    "run",
    "score_from_path",
    "signatures",
    "synth",
]
