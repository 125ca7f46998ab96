"""The Varopoulos triple on ``C ⊕ C^J ⊕ C`` and its extremality decision.

``T_i`` sends the first coordinate to ``x_i`` in the middle block and the
middle block to the last coordinate through the functional ``h -> x_i^T h``
(the adjoint of the conjugate vector).  Extremality is decided by reducing
to unit vectors spanning the whole middle block and then inspecting the
6 x 3r matrix ``Λ`` of linear constraints on the extension blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DimMismatch, NormExceeded, TrivialKernel, ValidationError
from .extensions import (
    ExtensionCertificate,
    Provenance,
    extend_by_gap,
    extend_by_scaling,
    scaled_certificate,
)
from .linalg_core import ABS_FLOOR, DEFAULT_TOL, ToleranceConfig, nullspace, operator_norm
from .tuples import OperatorTuple

NORM_SLACK = 1e-12

#: ordered pairs (i, j) behind rows 4-6 of Λ
LAMBDA_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True, eq=False)
class VaropoulosInput:
    x: np.ndarray  # shape (3, J)

    def __post_init__(self):
        x = np.array(self.x, dtype=np.complex128)
        if x.ndim != 2 or x.shape[0] != 3:
            raise DimMismatch(f"need three vectors of equal length, got shape {x.shape}")
        if x.shape[1] < 1:
            raise ValidationError("vectors must have length >= 1")
        if not np.all(np.isfinite(x)):
            raise ValidationError("vectors have non-finite entries")
        for i, nrm in enumerate(np.linalg.norm(x, axis=1)):
            if nrm > 1.0 + NORM_SLACK:
                raise NormExceeded(i, float(nrm))
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def of(cls, *vectors) -> "VaropoulosInput":
        return cls(np.array(vectors, dtype=np.complex128))

    @property
    def J_size(self) -> int:
        return self.x.shape[1]

    @property
    def dim(self) -> int:
        return self.J_size + 2


@dataclass(frozen=True)
class Decision:
    extremal: bool
    reason: Optional[str] = None

    @property
    def label(self) -> str:
        return "Extremal" if self.extremal else "NotExtremal"

    def to_dict(self) -> dict:
        return {"decision": self.label, "reason": self.reason}


@dataclass(frozen=True, eq=False)
class VaropoulosAnalysis:
    R_basis: np.ndarray  # (J, r), real entries
    r: int
    a: np.ndarray  # (3, r), a[i, l] = <x_i, e_l>
    lam: np.ndarray  # (6, 3r)
    lam_det: Optional[complex]
    decision: Optional[Decision] = None
    certificate: Optional[ExtensionCertificate] = None


def build_varopoulos(v: VaropoulosInput) -> OperatorTuple:
    j = v.J_size
    ops = []
    for x in v.x:
        t = np.zeros((j + 2, j + 2), dtype=np.complex128)
        t[1:j + 1, 0] = x
        t[j + 1, 1:j + 1] = x  # conj(x)^* = x^T
        ops.append(t)
    return OperatorTuple(tuple(ops))


def real_span_basis(x: np.ndarray, eps_rank: float) -> np.ndarray:
    """Real orthonormal basis of span{x_i, conj(x_i)} by Gram-Schmidt on
    ``Re x_1, Im x_1, Re x_2, ...``, dropping near-dependent vectors."""
    candidates = []
    for row in x:
        candidates.extend([row.real.copy(), row.imag.copy()])
    scale = max(np.linalg.norm(c) for c in candidates)
    if scale <= ABS_FLOOR:
        return np.zeros((x.shape[1], 0))
    basis: list = []
    for c in candidates:
        v = c.copy()
        for _ in range(2):  # re-orthogonalise once for stability
            for e in basis:
                v -= (e @ v) * e
        nrm = np.linalg.norm(v)
        if nrm > eps_rank * scale:
            basis.append(v / nrm)
    if not basis:
        return np.zeros((x.shape[1], 0))
    return np.column_stack(basis)


def lambda_matrix(a: np.ndarray) -> np.ndarray:
    """``Λ`` for coefficients ``a`` of shape (3, r), laid out in the display's row order."""
    r = a.shape[1]
    lam = np.zeros((6, 3 * r), dtype=np.complex128)
    for i in range(3):
        lam[i, i * r:(i + 1) * r] = a[i]
    ac = np.conj(a)
    for row, (i, j) in enumerate(LAMBDA_PAIRS, start=3):
        lam[row, i * r:(i + 1) * r] = ac[j]
        lam[row, j * r:(j + 1) * r] = -ac[i]
    return lam


def analyze(v: VaropoulosInput, tol: ToleranceConfig = DEFAULT_TOL) -> VaropoulosAnalysis:
    basis = real_span_basis(v.x, tol.eps_rank)
    r = basis.shape[1]
    if r == v.J_size:
        # the canonical coordinates are conjugation-fixed and already span R
        basis = np.eye(v.J_size)
    a = v.x @ basis
    lam = lambda_matrix(a)
    lam_det = complex(np.linalg.det(lam)) if r == 2 else None
    analysis = VaropoulosAnalysis(R_basis=basis, r=r, a=a, lam=lam, lam_det=lam_det)
    decision, cert = decide(analysis, v, tol)
    return replace(analysis, decision=decision, certificate=cert)


def det_threshold(lam: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return tol.eps_det * max(1.0, operator_norm(lam) ** 6)


def decide(
    analysis: VaropoulosAnalysis, v: VaropoulosInput, tol: ToleranceConfig = DEFAULT_TOL
) -> Tuple[Decision, Optional[ExtensionCertificate]]:
    """Extremal iff every ``x_i`` is a unit vector, ``R`` is the whole
    middle block, ``r = 2`` and ``Λ`` is invertible.

    Branches are tried in a fixed order so that overlapping failures always
    report the same reason.
    """
    t = build_varopoulos(v)
    norms = np.linalg.norm(v.x, axis=1)
    if norms.min() < 1.0 - tol.eps_contr:
        cert, _ = extend_by_scaling(t, tol)
        return Decision(False, "subunit norm"), cert
    if analysis.r < v.J_size:
        return Decision(False, "R proper"), extend_by_gap(t, tol)
    if analysis.r >= 3:
        return Decision(False, "3r > 6"), lambda_kernel_certificate(analysis, v, tol)
    if analysis.r == 1:
        return Decision(False, "rank one"), rank_one_certificate(v, tol)
    if abs(analysis.lam_det) > det_threshold(analysis.lam, tol):
        return Decision(True), None
    try:
        cert = lambda_kernel_certificate(analysis, v, tol)
    except TrivialKernel:
        # |det Λ| is below threshold but no singular value is: use the nearest kernel vector
        _, _, vh = np.linalg.svd(analysis.lam)
        cert = lambda_kernel_certificate(analysis, v, tol, vector=np.conj(vh[-1]))
    return Decision(False, "det Λ = 0"), cert


def blocks_from_kernel_vector(
    analysis: VaropoulosAnalysis, h: np.ndarray
) -> Tuple[np.ndarray, ...]:
    """``C_i = Σ_l e_l conj(h^{(i)}_l)`` as columns of C^J (extension space ``M = C``)."""
    r = analysis.r
    return tuple(analysis.R_basis @ np.conj(h[i * r:(i + 1) * r]) for i in range(3))


def lambda_kernel_certificate(
    analysis: VaropoulosAnalysis,
    v: VaropoulosInput,
    tol: ToleranceConfig = DEFAULT_TOL,
    vector: Optional[np.ndarray] = None,
) -> ExtensionCertificate:
    """Extension on ``H ⊕ C`` whose middle A-entries come from a kernel vector of ``Λ``."""
    if vector is None:
        kern = nullspace(analysis.lam, tol)
        if kern.dim == 0:
            raise TrivialKernel("Λ has trivial kernel")
        vector = kern.basis[:, 0]
    h = np.asarray(vector, dtype=np.complex128)
    h = h / np.linalg.norm(h)
    j = v.J_size
    a_blocks = []
    for c in blocks_from_kernel_vector(analysis, h):
        a = np.zeros((j + 2, 1), dtype=np.complex128)
        a[1:j + 1, 0] = c
        a_blocks.append(a)
    t = build_varopoulos(v)
    zero = tuple(np.zeros((1, 1)) for _ in range(3))
    return scaled_certificate(
        t, a_blocks, zero, Provenance.VaropoulosLambda, tol,
        notes={"lambda_residual": float(np.linalg.norm(analysis.lam @ h))},
    )


def rank_one_certificate(v: VaropoulosInput, tol: ToleranceConfig = DEFAULT_TOL) -> ExtensionCertificate:
    """For ``x_i = c_i x_1``: extension on ``H ⊕ C`` with top-row entries ``c_i``."""
    x1 = v.x[0]
    coeffs = [complex(np.vdot(x1, xi) / np.vdot(x1, x1)) for xi in v.x]
    a_blocks = []
    for c in coeffs:
        a = np.zeros((v.dim, 1), dtype=np.complex128)
        a[0, 0] = c
        a_blocks.append(a)
    cert = ExtensionCertificate(
        base=build_varopoulos(v),
        A=tuple(a_blocks),
        B=tuple(np.zeros((1, 1)) for _ in range(3)),
        provenance=Provenance.VaropoulosRankOne,
        notes={"c": [[c.real, c.imag] for c in coeffs]},
    )
    return cert.validated(tol)


def determinant_examples() -> Tuple[VaropoulosInput, VaropoulosInput]:
    """The two r = 2 inputs with ``det Λ = 1`` and ``det Λ = 0`` respectively."""
    s = 1.0 / np.sqrt(2.0)
    return (
        VaropoulosInput.of([1, 0], [s, s], [0, 1]),
        VaropoulosInput.of([1, 0], [1, 0], [0, 1]),
    )
