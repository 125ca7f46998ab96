"""Dense complex linear algebra and subspace arithmetic.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; the
helpers here enforce that contract and implement rank decisions relative to
the largest singular value.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbientMismatch, ValidationError

#: guards rank decisions for the all-zero matrix
ABS_FLOOR = 1e-14


@dataclass(frozen=True)
class ToleranceConfig:
    eps_comm: float = 1e-10
    eps_contr: float = 1e-10
    eps_rank: float = 1e-9
    eps_orth: float = 1e-12
    eps_det: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and value > 0 and np.isfinite(value)):
                raise ValueError(f"tolerance {f.name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_env(cls, **overrides) -> "ToleranceConfig":
        """Defaults, then ``EXTREMAL_EPS_RANK`` from the environment, then explicit overrides."""
        values = {}
        env = os.environ.get("EXTREMAL_EPS_RANK")
        if env:
            values["eps_rank"] = float(env)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = ToleranceConfig()


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex128 array (a copy)."""
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def conjugate(m: np.ndarray) -> np.ndarray:
    """Entrywise complex conjugate, no transpose."""
    return np.conj(m)


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def numerical_rank(s: np.ndarray, eps_rank: float) -> int:
    """Count singular values above ``eps_rank * s_max`` (all zero when ``s_max`` is below the floor)."""
    if s.size == 0 or s[0] <= ABS_FLOOR:
        return 0
    return int(np.sum(s > eps_rank * s[0]))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^d held by an orthonormal column basis of shape (d, m)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim != 2:
            raise ValidationError("subspace basis must be 2-dimensional")
        if b.shape[1] > b.shape[0]:
            raise ValidationError("subspace has more basis vectors than ambient dimension")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_vectors(cls, vectors, tol: ToleranceConfig = DEFAULT_TOL) -> "Subspace":
        """Orthonormal basis of the column space of ``vectors`` (shape (d, m))."""
        return column_space(as_cmatrix(vectors), tol)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=np.complex128))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ adjoint(self.basis)

    def orthonormality_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        gram = adjoint(self.basis) @ self.basis
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def contains(self, other: "Subspace", atol: float = 1e-9) -> bool:
        _check_ambient(self, other)
        if other.dim == 0:
            return True
        residual = other.basis - self.projector() @ other.basis
        return operator_norm(residual) <= atol

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _check_ambient(*spaces: Subspace) -> None:
    dims = {s.ambient_dim for s in spaces}
    if len(dims) > 1:
        raise AmbientMismatch(f"subspaces live in different ambient dimensions {sorted(dims)}")


def column_space(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    if m.shape[1] == 0:
        return Subspace.zero(m.shape[0])
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return Subspace(u[:, : numerical_rank(s, tol.eps_rank)])


def nullspace(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the right null space of ``m``.

    A singular value is zero iff it is at most ``eps_rank * s_max``; a matrix
    whose largest singular value is below ``ABS_FLOOR`` has the whole domain
    as its kernel.
    """
    cols = m.shape[1]
    if m.shape[0] == 0 or cols == 0:
        return Subspace.full(cols)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    rank = numerical_rank(s, tol.eps_rank)
    return Subspace(adjoint(vh[rank:]))


def orthogonal_complement(s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    if s.dim == 0:
        return Subspace.full(s.ambient_dim)
    return nullspace(adjoint(s.basis), tol)


def intersect(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """S1 ∩ S2 as the kernel of the stacked complementary projectors."""
    _check_ambient(s1, s2)
    eye = np.eye(s1.ambient_dim)
    stacked = np.vstack([eye - s1.projector(), eye - s2.projector()])
    return nullspace(stacked, tol)


def intersect_all(spaces: Iterable[Subspace], tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    spaces = list(spaces)
    if not spaces:
        raise ValueError("need at least one subspace")
    out = spaces[0]
    for s in spaces[1:]:
        if out.dim == 0:
            break
        out = intersect(out, s, tol)
    return out


def span_union(spaces: Sequence[Subspace], tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Closed span of all inputs."""
    if not spaces:
        raise ValueError("need at least one subspace")
    _check_ambient(*spaces)
    return column_space(np.hstack([s.basis for s in spaces]), tol)
