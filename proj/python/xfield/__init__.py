from ._core import (
    ChainResult,
    Error,
    FieldPrior,
    PathTable,
    build_field_prior,
    calibrate,
    distance_transform,
    hpd_interval,
    phantom,
    run_cli,
    score,
    segment,
    spearman,
    update_delta,
)

__all__ = [
    "ChainResult",
    "Error",
    "FieldPrior",
    "PathTable",
    "build_field_prior",
    "calibrate",
    "distance_transform",
    "hpd_interval",
    "phantom",
    "run_cli",
    "score",
    "segment",
    "spearman",
    "update_delta",
]
