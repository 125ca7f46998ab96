"""Extremality of commuting contraction tuples: decisions, extension
certificates, and von Neumann inequality checks."""

__version__ = "0.1.0"

from .errors import ExtremalError, ValidationError  # noqa: E402
from .linalg_core import DEFAULT_TOL, Subspace, ToleranceConfig  # noqa: E402
from .tuples import OperatorTuple, PredicateReport  # noqa: E402
from .extensions import (  # noqa: E402
    ExtensionCertificate,
    Provenance,
    extend_by_gap,
    extend_by_scaling,
    gap_subspace,
    rank_one_probe,
    validate_certificate,
)

__all__ = [
    "DEFAULT_TOL",
    "ExtensionCertificate",
    "ExtremalError",
    "OperatorTuple",
    "PredicateReport",
    "Provenance",
    "Subspace",
    "ToleranceConfig",
    "ValidationError",
    "extend_by_gap",
    "extend_by_scaling",
    "gap_subspace",
    "rank_one_probe",
    "validate_certificate",
]
