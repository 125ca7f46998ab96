"""The Parrott n-tuple ``T_i = [[0, 0], [U_i, 0]]`` built from unitaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import DimMismatch, ExtremalNoKernel, NonUnitaryInput, ValidationError
from .extensions import ExtensionCertificate, Provenance
from .linalg_core import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    adjoint,
    as_cmatrix,
    intersect_all,
    nullspace,
    operator_norm,
)
from .tuples import OperatorTuple, commutator

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ParrottInput:
    unitaries: Tuple[np.ndarray, ...]

    def __post_init__(self):
        us = tuple(as_cmatrix(u, f"unitary {i}") for i, u in enumerate(self.unitaries))
        if not us:
            raise ValidationError("need at least one unitary")
        d = us[0].shape[0]
        for i, u in enumerate(us):
            if u.shape != (d, d):
                raise DimMismatch(f"unitary {i} has shape {u.shape}, expected {(d, d)}")
            residual = operator_norm(adjoint(u) @ u - np.eye(d))
            if residual > UNITARY_TOL:
                raise NonUnitaryInput(i, residual)
            u.setflags(write=False)
        object.__setattr__(self, "unitaries", us)

    @property
    def n(self) -> int:
        return len(self.unitaries)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]


def build_parrott(p: ParrottInput) -> OperatorTuple:
    d = p.dim
    ops = []
    for u in p.unitaries:
        t = np.zeros((2 * d, 2 * d), dtype=np.complex128)
        t[d:, :d] = u
        ops.append(t)
    return OperatorTuple(tuple(ops))


def pivot_words(p: ParrottInput, k: int) -> Tuple[np.ndarray, ...]:
    """``W_j = U_k^* U_j`` for pivot ``k`` (1-based)."""
    if not 1 <= k <= p.n:
        raise ValueError(f"pivot must be in 1..{p.n}, got {k}")
    uk = adjoint(p.unitaries[k - 1])
    return tuple(uk @ u for u in p.unitaries)


def commutator_kernel(p: ParrottInput, k: int, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Common kernel of all commutators ``[W_i, W_j]`` for pivot ``k`` (1-based)."""
    w = pivot_words(p, k)
    kernels = [Subspace.full(p.dim)]
    for i in range(p.n):
        for j in range(i + 1, p.n):
            kernels.append(nullspace(commutator(w[i], w[j]), tol))
    return intersect_all(kernels, tol)


def kernel_dims(p: ParrottInput, tol: ToleranceConfig = DEFAULT_TOL) -> Dict[int, int]:
    return {k: commutator_kernel(p, k, tol).dim for k in range(1, p.n + 1)}


def parrott_is_extremal(p: ParrottInput, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return commutator_kernel(p, p.n, tol).dim == 0


def parrott_extension(p: ParrottInput, tol: ToleranceConfig = DEFAULT_TOL) -> ExtensionCertificate:
    """Non-trivial extension on ``C^{2d} ⊕ K`` with top-right blocks ``W_i A_n``.

    ``A_n`` is the inclusion of the commutator kernel ``K`` into ``C^d``.
    """
    kern = commutator_kernel(p, p.n, tol)
    if kern.dim == 0:
        raise ExtremalNoKernel("commutator kernel is {0}: the Parrott tuple is extremal")
    t = build_parrott(p)
    d, k = p.dim, kern.dim
    a_blocks = []
    for w in pivot_words(p, p.n):
        a = np.zeros((2 * d, k), dtype=np.complex128)
        a[:d, :] = w @ kern.basis
        a_blocks.append(a)
    cert = ExtensionCertificate(
        base=t,
        A=tuple(a_blocks),
        B=tuple(np.zeros((k, k)) for _ in range(p.n)),
        provenance=Provenance.ParrottKernel,
        notes={"kernel_dim": k},
    )
    return cert.validated(tol)


def favoritism_check(p: ParrottInput, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff the commutator kernel is trivial for every pivot or for none."""
    trivial = [dim == 0 for dim in kernel_dims(p, tol).values()]
    return all(trivial) or not any(trivial)


def pauli_like_input() -> ParrottInput:
    """``(σ_x, σ_z, I)``: the commutator ``[σ_x, σ_z]`` is invertible."""
    return ParrottInput((
        np.array([[0, 1], [1, 0]]),
        np.array([[1, 0], [0, -1]]),
        np.eye(2),
    ))
