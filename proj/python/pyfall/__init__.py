"""Anchor-regularized local linear regression (closed-form per-sample models)."""

from ._core import (
    DataError,
    FallModel,
    benchmark,
    build_qp,
    kmeans,
    knn_predict,
    load_csv,
    local_model,
    ridge_fit,
    synth_step,
    synth_two_moons,
    verify,
)

__all__ = [
    "DataError",
    "FallModel",
    "benchmark",
    "build_qp",
    "kmeans",
    "knn_predict",
    "load_csv",
    "local_model",
    "ridge_fit",
    "synth_step",
    "synth_two_moons",
    "verify",
]

__version__ = "0.1.0"
