"""Extension certificates, the two general non-extremality constructions, and a
one-sided search for non-trivial extensions.

Every extension of ``T`` on ``H = C^d`` is stored in block form
``X_i = [[T_i, A_i], [0, B_i]]`` on ``H ⊕ C^k``; ``H`` is always the leading
summand, so ``X`` is an extension by direct sum exactly when every ``A_i``
vanishes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from .errors import AllNormsOne, DimMismatch, EmptyGap, InvarianceViolation
from .linalg_core import (
    ABS_FLOOR,
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    adjoint,
    column_space,
    intersect,
    nullspace,
    operator_norm,
    orthogonal_complement,
)
from .tuples import (
    OperatorTuple,
    PredicateReport,
    big_kernel,
    big_range,
    check_commuting,
    check_contractive,
    is_reducing,
    leading_subspace,
    restrict,
)

#: an A-block counts as non-zero above this operator norm
NONTRIVIAL_TOL = 1e-10

B_SAMPLE_RADIUS = 0.9
BISECTION_MAX_ITER = 40
BISECTION_REL_WIDTH = 1e-12


class Provenance(str, enum.Enum):
    GapLemma = "GapLemma"
    ScalingLemma = "ScalingLemma"
    RankOneProbe = "RankOneProbe"
    ParrottKernel = "ParrottKernel"
    VaropoulosLambda = "VaropoulosLambda"
    VaropoulosRankOne = "VaropoulosRankOne"
    Manual = "Manual"


@dataclass(frozen=True)
class CertificateVerdicts:
    commuting: PredicateReport
    contractive: PredicateReport
    restriction: PredicateReport
    a_block_norm: float
    nontrivial_by_blocks: bool
    nontrivial_by_reducing: bool
    nontrivial_by_direct_sum: bool

    @property
    def views_agree(self) -> bool:
        views = {self.nontrivial_by_blocks, self.nontrivial_by_reducing, self.nontrivial_by_direct_sum}
        return len(views) == 1

    @property
    def nontrivial(self) -> bool:
        return self.nontrivial_by_blocks

    @property
    def valid(self) -> bool:
        """X is a commuting contractive extension of the base tuple."""
        return self.commuting.passed and self.contractive.passed and self.restriction.passed

    @property
    def all_passed(self) -> bool:
        """Valid, non-trivial, and with all triviality views in agreement."""
        return self.valid and self.nontrivial and self.views_agree

    def to_dict(self) -> dict:
        return {
            "commuting": self.commuting.to_dict(),
            "contractive": self.contractive.to_dict(),
            "restriction": self.restriction.to_dict(),
            "a_block_norm": float(self.a_block_norm),
            "nontrivial": bool(self.nontrivial),
            "nontrivial_by_blocks": bool(self.nontrivial_by_blocks),
            "nontrivial_by_reducing": bool(self.nontrivial_by_reducing),
            "nontrivial_by_direct_sum": bool(self.nontrivial_by_direct_sum),
            "views_agree": bool(self.views_agree),
            "valid": bool(self.valid),
        }


@dataclass(frozen=True, eq=False)
class ExtensionCertificate:
    base: OperatorTuple
    A: Tuple[np.ndarray, ...]
    B: Tuple[np.ndarray, ...]
    provenance: Provenance = Provenance.Manual
    seed: Optional[int] = None
    notes: dict = field(default_factory=dict)
    verdicts: Optional[CertificateVerdicts] = None

    def __post_init__(self):
        a = tuple(np.array(m, dtype=np.complex128) for m in self.A)
        b = tuple(np.array(m, dtype=np.complex128) for m in self.B)
        n, d = self.base.n, self.base.dim
        if len(a) != n or len(b) != n:
            raise DimMismatch(f"need {n} A-blocks and {n} B-blocks, got {len(a)} and {len(b)}")
        k = b[0].shape[0] if b[0].ndim == 2 else 0
        for i in range(n):
            if a[i].shape != (d, k) or b[i].shape != (k, k):
                raise DimMismatch(
                    f"block {i}: A has shape {a[i].shape}, B has shape {b[i].shape}; expected {(d, k)}, {(k, k)}"
                )
            a[i].setflags(write=False)
            b[i].setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def ext_dim(self) -> int:
        return self.B[0].shape[0]

    def assembled(self) -> OperatorTuple:
        d, k = self.base.dim, self.ext_dim
        ops = []
        for t, a, b in zip(self.base, self.A, self.B):
            x = np.zeros((d + k, d + k), dtype=np.complex128)
            x[:d, :d] = t
            x[:d, d:] = a
            x[d:, d:] = b
            ops.append(x)
        return OperatorTuple(tuple(ops))

    def a_block_norm(self) -> float:
        return max(operator_norm(a) for a in self.A)

    def validated(self, tol: ToleranceConfig = DEFAULT_TOL) -> "ExtensionCertificate":
        return replace(self, verdicts=validate_certificate(self.base, self, tol))


@dataclass(frozen=True)
class ScalingParams:
    delta: Tuple[float, ...]
    eta: Tuple[float, ...]
    beta: Tuple[float, ...]

    @classmethod
    def from_norms(cls, norms: Sequence[float]) -> "ScalingParams":
        delta = []
        for nrm in norms:
            if nrm <= ABS_FLOOR:
                delta.append(1.0)
            else:
                delta.append(min(1.0, max(0.0, (1.0 - nrm**2) / nrm)))
        eta = [1.0 - dl for dl in delta]
        beta = [1.0 + dl**2 + et**2 for dl, et in zip(delta, eta)]
        return cls(tuple(delta), tuple(eta), tuple(beta))

    def norm_bounds(self, norms: Sequence[float]) -> List[float]:
        """Upper bounds for ||X_i||^2 of the scaling extension."""
        return [
            0.5 * (b + math.sqrt(max(b * b - 4.0 * e * e, 0.0))) * nrm**2
            for b, e, nrm in zip(self.beta, self.eta, norms)
        ]


def validate_certificate(
    base: OperatorTuple, cert: ExtensionCertificate, tol: ToleranceConfig = DEFAULT_TOL
) -> CertificateVerdicts:
    """Check that ``cert`` describes a commuting contractive extension of ``base``.

    Triviality is judged three ways (A-block norms, whether ``H`` reduces
    ``X``, whether ``X`` equals ``T ⊕ B`` entrywise) so callers can confirm
    that they agree.
    """
    x = cert.assembled()
    d = base.dim
    h = leading_subspace(d, x.dim)

    if x.n != base.n or cert.base.dim != d:
        restriction = PredicateReport(False, math.inf, None)
    else:
        try:
            r = restrict(x, h, tol)
            diffs = [float(np.max(np.abs(ri - ti))) for ri, ti in zip(r, base)]
            i = int(np.argmax(diffs))
            restriction = PredicateReport(diffs[i] <= 1e-12, diffs[i], (i, i))
        except InvarianceViolation as exc:
            restriction = PredicateReport(False, exc.residual, (exc.index, exc.index))

    a_norm = cert.a_block_norm()
    k = cert.ext_dim
    split = []
    for xi, ti, bi in zip(x, cert.base, cert.B):
        ds = np.zeros_like(xi)
        ds[:d, :d] = ti
        ds[d:, d:] = bi
        split.append(float(np.max(np.abs(xi - ds))) if k else 0.0)

    return CertificateVerdicts(
        commuting=check_commuting(x, tol),
        contractive=check_contractive(x, tol),
        restriction=restriction,
        a_block_norm=a_norm,
        nontrivial_by_blocks=a_norm > NONTRIVIAL_TOL,
        nontrivial_by_reducing=not is_reducing(x, h, tol),
        nontrivial_by_direct_sum=max(split) > NONTRIVIAL_TOL,
    )


def gap_subspace(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """(Ran T)^⊥ ∩ Ker T."""
    return intersect(orthogonal_complement(big_range(t, tol), tol), big_kernel(t, tol), tol)


def extend_by_gap(t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> ExtensionCertificate:
    """Attach the gap subspace ``E`` with every ``A_i`` the inclusion ``E -> H`` and ``B_i = 0``."""
    e = gap_subspace(t, tol)
    if e.dim == 0:
        raise EmptyGap("(Ran T)^⊥ ∩ Ker T is trivial")
    k = e.dim
    cert = ExtensionCertificate(
        base=t,
        A=tuple(e.basis for _ in range(t.n)),
        B=tuple(np.zeros((k, k)) for _ in range(t.n)),
        provenance=Provenance.GapLemma,
    )
    return cert.validated(tol)


def extend_by_scaling(
    t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL
) -> Tuple[ExtensionCertificate, ScalingParams]:
    """``X_i = [[T_i, δ_i T_i], [0, (1-δ_i) T_i]]`` for a tuple with some ``||T_i|| < 1``."""
    norms = t.norms()
    if min(norms) >= 1.0 - tol.eps_contr:
        raise AllNormsOne(f"every operator has norm >= 1 (min {min(norms):.12g})")
    params = ScalingParams.from_norms(norms)
    cert = ExtensionCertificate(
        base=t,
        A=tuple(dl * m for dl, m in zip(params.delta, t)),
        B=tuple(et * m for et, m in zip(params.eta, t)),
        provenance=Provenance.ScalingLemma,
        notes={"delta": list(params.delta), "norm_bounds_sq": params.norm_bounds(norms)},
    )
    return cert.validated(tol), params


def random_commuting_contractions(
    n: int, k: int, rng: np.random.Generator, radius: float = B_SAMPLE_RADIUS
) -> Tuple[np.ndarray, ...]:
    """``n`` commuting normal k x k matrices of norm <= ``radius``: a random unitary
    conjugating random diagonals."""
    q = unitary_group.rvs(k, random_state=rng) if k > 1 else np.ones((1, 1))
    q = np.atleast_2d(q)
    out = []
    for _ in range(n):
        mod = radius * np.sqrt(rng.uniform(size=k))
        lam = mod * np.exp(2j * np.pi * rng.uniform(size=k))
        out.append(q @ np.diag(lam) @ adjoint(q))
    return tuple(out)


def extension_system(
    t: OperatorTuple, b: Sequence[np.ndarray], tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Matrix of the homogeneous linear system in the A-blocks for fixed ``B``.

    Unknowns are the column-major vectorisations of ``A_1..A_n`` stacked.
    Rows encode ``T_i A_j + A_i B_j = T_j A_i + A_j B_i`` for ``i < j`` and
    ``(I - P_i) A_i = 0`` with ``P_i`` the projector onto ``ran(I - T_i T_i^*)``.
    """
    n, d = t.n, t.dim
    k = b[0].shape[0]
    m = d * k
    eye_k, eye_d = np.eye(k), np.eye(d)
    blocks = []
    for i, j in combinations(range(n), 2):
        row = np.zeros((m, n * m), dtype=np.complex128)
        row[:, j * m:(j + 1) * m] += np.kron(eye_k, t[i]) - np.kron(b[i].T, eye_d)
        row[:, i * m:(i + 1) * m] += np.kron(b[j].T, eye_d) - np.kron(eye_k, t[j])
        blocks.append(row)
    for i in range(n):
        defect = column_space(eye_d - t[i] @ adjoint(t[i]), tol)
        row = np.zeros((m, n * m), dtype=np.complex128)
        row[:, i * m:(i + 1) * m] = np.kron(eye_k, eye_d - defect.projector())
        blocks.append(row)
    return np.vstack(blocks)


def unvec_blocks(v: np.ndarray, n: int, d: int, k: int) -> Tuple[np.ndarray, ...]:
    m = d * k
    return tuple(v[i * m:(i + 1) * m].reshape((d, k), order="F") for i in range(n))


def max_contractive_scale(
    t: OperatorTuple, a: Sequence[np.ndarray], b: Sequence[np.ndarray], limit: Optional[float] = None
) -> float:
    """Largest ``ε`` in [0, 1] (by bisection) with every ``[[T_i, εA_i], [0, B_i]]`` of norm <= ``limit``.

    The norm is even and convex in ``ε``, hence monotone on ``ε >= 0``.
    """
    if limit is None:
        limit = max([1.0] + t.norms()) + 1e-13
    d, k = t.dim, b[0].shape[0]

    def worst(eps: float) -> float:
        out = 0.0
        for ti, ai, bi in zip(t, a, b):
            x = np.zeros((d + k, d + k), dtype=np.complex128)
            x[:d, :d] = ti
            x[:d, d:] = eps * ai
            x[d:, d:] = bi
            out = max(out, operator_norm(x))
        return out

    if worst(1.0) <= limit:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if worst(mid) <= limit:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECTION_REL_WIDTH * hi:
            break
    return lo


def scaled_certificate(
    t: OperatorTuple,
    a: Sequence[np.ndarray],
    b: Sequence[np.ndarray],
    provenance: Provenance,
    tol: ToleranceConfig = DEFAULT_TOL,
    **extra,
) -> ExtensionCertificate:
    eps = max_contractive_scale(t, a, b)
    notes = {"scale": eps, **extra.pop("notes", {})}
    cert = ExtensionCertificate(
        base=t,
        A=tuple(eps * ai for ai in a),
        B=tuple(b),
        provenance=provenance,
        notes=notes,
        **extra,
    )
    return cert.validated(tol)


@dataclass(frozen=True, eq=False)
class ProbeSample:
    index: int
    B: Tuple[np.ndarray, ...]
    solutions: Subspace


def probe_samples(
    t: OperatorTuple, samples: int, k: int, seed: int, tol: ToleranceConfig = DEFAULT_TOL
) -> Iterator[ProbeSample]:
    """Solution spaces of the A-block system, first for ``B = 0`` then for
    ``samples`` random commuting strict contractions on C^k."""
    if k < 1 or samples < 1:
        raise ValueError("need k >= 1 and samples >= 1")
    rng = np.random.default_rng(seed)
    zero = tuple(np.zeros((k, k), dtype=np.complex128) for _ in range(t.n))
    for index in range(samples + 1):
        b = zero if index == 0 else random_commuting_contractions(t.n, k, rng)
        yield ProbeSample(index, b, nullspace(extension_system(t, b, tol), tol))


def rank_one_probe(
    t: OperatorTuple, samples: int, k: int, seed: int, tol: ToleranceConfig = DEFAULT_TOL
) -> Optional[ExtensionCertificate]:
    """Look for a non-trivial extension on ``H ⊕ C^k``.

    Sound but not complete: a returned certificate proves non-extremality,
    ``None`` proves nothing.
    """
    for sample in probe_samples(t, samples, k, seed, tol):
        if sample.solutions.dim == 0:
            continue
        a = unvec_blocks(sample.solutions.basis[:, 0], t.n, t.dim, k)
        cert = scaled_certificate(
            t, a, sample.B, Provenance.RankOneProbe, tol,
            seed=seed, notes={"sample": sample.index, "solution_dim": sample.solutions.dim},
        )
        if cert.verdicts.all_passed:
            return cert
    return None
