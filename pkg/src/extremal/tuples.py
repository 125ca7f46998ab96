"""Operator tuples and the family-membership / extension predicates."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Tuple

import numpy as np

from .errors import DimMismatch, InvarianceViolation, ValidationError
from .linalg_core import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    adjoint,
    as_cmatrix,
    column_space,
    intersect_all,
    nullspace,
    operator_norm,
    span_union,
)

PARTIAL_ISOMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """An n-tuple of d x d complex matrices acting on one space C^d."""

    ops: Tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_cmatrix(m, f"operator {i}") for i, m in enumerate(self.ops))
        if not ops:
            raise ValidationError("an operator tuple needs at least one operator")
        d = ops[0].shape[0]
        if d < 1:
            raise ValidationError("operators must act on a space of dimension >= 1")
        for i, m in enumerate(ops):
            if m.shape != (d, d):
                raise DimMismatch(f"operator {i} has shape {m.shape}, expected {(d, d)}")
            m.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.ops[i]

    def __iter__(self):
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def norms(self) -> list[float]:
        return [operator_norm(t) for t in self.ops]

    def __repr__(self) -> str:
        return f"OperatorTuple(n={self.n}, dim={self.dim})"


@dataclass(frozen=True)
class PredicateReport:
    passed: bool
    worst_value: float
    worst_pair: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "worst_value": float(self.worst_value),
            "worst_pair": list(self.worst_pair) if self.worst_pair is not None else None,
        }


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def check_commuting(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> PredicateReport:
    worst, pair = 0.0, None
    for i, j in combinations(range(t.n), 2):
        value = operator_norm(commutator(t[i], t[j]))
        if pair is None or value > worst:
            worst, pair = value, (i, j)
    return PredicateReport(worst <= tol.eps_comm, worst, pair)


def check_contractive(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> PredicateReport:
    excess = [nrm - 1.0 for nrm in t.norms()]
    i = int(np.argmax(excess))
    return PredicateReport(excess[i] <= tol.eps_contr, excess[i], (i, i))


def check_partial_isometries(t: OperatorTuple) -> PredicateReport:
    residuals = [operator_norm(m @ adjoint(m) @ m - m) for m in t]
    i = int(np.argmax(residuals))
    return PredicateReport(residuals[i] <= PARTIAL_ISOMETRY_TOL, residuals[i], (i, i))


def big_range(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Closed span of the ranges of all operators."""
    return span_union([column_space(m, tol) for m in t], tol)


def big_kernel(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Common kernel of all operators."""
    return intersect_all([nullspace(m, tol) for m in t], tol)


def direct_sum(t: OperatorTuple, s: OperatorTuple) -> OperatorTuple:
    if t.n != s.n:
        raise DimMismatch(f"cannot sum a {t.n}-tuple with a {s.n}-tuple")
    d, e = t.dim, s.dim
    ops = []
    for a, b in zip(t, s):
        m = np.zeros((d + e, d + e), dtype=np.complex128)
        m[:d, :d] = a
        m[d:, d:] = b
        ops.append(m)
    return OperatorTuple(tuple(ops))


def _invariance_residuals(t: OperatorTuple, s: Subspace) -> Tuple[list, list]:
    """Per operator: ||(I-P) T P|| and ||P T (I-P)||."""
    if s.ambient_dim != t.dim:
        raise DimMismatch(f"subspace lives in C^{s.ambient_dim}, tuple acts on C^{t.dim}")
    p = s.projector()
    q = np.eye(t.dim) - p
    out_of = [operator_norm(q @ m @ p) for m in t]
    into = [operator_norm(p @ m @ q) for m in t]
    return out_of, into


def invariance_residual(t: OperatorTuple, s: Subspace) -> float:
    return max(_invariance_residuals(t, s)[0])


def restrict(t: OperatorTuple, s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorTuple:
    """Restriction to an invariant subspace, written in the coordinates of ``s.basis``."""
    out_of, _ = _invariance_residuals(t, s)
    for i, r in enumerate(out_of):
        if r > tol.eps_comm:
            raise InvarianceViolation(i, r)
    if s.dim == 0:
        raise ValidationError("cannot restrict to the zero subspace")
    b = s.basis
    return OperatorTuple(tuple(adjoint(b) @ m @ b for m in t))


def is_reducing(t: OperatorTuple, s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    out_of, into = _invariance_residuals(t, s)
    return max(out_of + into) <= tol.eps_comm


def leading_subspace(d: int, total: int) -> Subspace:
    """The copy of C^d sitting as the first ``d`` coordinates of C^total."""
    return Subspace(np.eye(total, d, dtype=np.complex128))
