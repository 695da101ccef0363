"""Numerical verification of metric connections with parallel torsion on coordinate charts."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateMetricError,
    DomainError,
    ExprError,
    GeoVerifyError,
    ModelMismatchError,
    PreconditionError,
    SpecError,
    UnboundParameterError,
)
from .expr import Jet2, eval_jet2, parse  # noqa: E402
from .geometry import MetricSpec, metric_at, signature_at, witt_frame_at  # noqa: E402

__all__ = [
    "__version__",
    "GeoVerifyError", "ExprError", "DomainError", "UnboundParameterError",
    "DegenerateMetricError", "SpecError", "PreconditionError", "ModelMismatchError",
    "Jet2", "eval_jet2", "parse",
    "MetricSpec", "metric_at", "signature_at", "witt_frame_at",
]
