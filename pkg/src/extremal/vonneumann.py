"""Von Neumann inequality checks for commuting tuples.

For an analytic polynomial the supremum over the open polydisc equals the
maximum over the distinguished torus (maximum principle in each variable),
so ``|p|`` is sampled on a uniform angular grid of the torus.  The grid
maximum is a lower bound for the supremum; adding ``L * ρ`` with
``L = Σ |c_α| |α|_1`` (a Lipschitz constant in the angles) and ``ρ = π √n / N``
(the largest distance to a grid point) gives a certified upper bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import NonCommutingTuple, VarCountMismatch, ValidationError
from .linalg_core import DEFAULT_TOL, ToleranceConfig, operator_norm
from .tuples import OperatorTuple, check_commuting

Alpha = Tuple[int, ...]

VIOLATION_MARGIN = 1e-9
SMOOTH_Q = 8


@dataclass(frozen=True)
class MultiPolynomial:
    n_vars: int
    terms: Mapping[Alpha, complex]

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValidationError("a polynomial needs at least one variable")
        clean: Dict[Alpha, complex] = {}
        for alpha, c in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n_vars or any(a < 0 for a in alpha):
                raise ValidationError(f"bad multi-index {alpha} for {self.n_vars} variables")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValidationError(f"non-finite coefficient at {alpha}")
            c = clean.get(alpha, 0) + c
            clean[alpha] = c
        object.__setattr__(self, "terms", {a: c for a, c in sorted(clean.items()) if c != 0})

    @classmethod
    def from_arrays(cls, n_vars: int, alphas: Sequence[Alpha], coeffs: Sequence[complex]):
        return cls(n_vars, dict(zip(map(tuple, alphas), coeffs)))

    @classmethod
    def random(cls, n_vars: int, degree: int, rng: np.random.Generator) -> "MultiPolynomial":
        alphas = monomials(n_vars, degree)
        c = rng.normal(size=len(alphas)) + 1j * rng.normal(size=len(alphas))
        return cls.from_arrays(n_vars, alphas, c)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def __call__(self, *z) -> complex:
        return sum(c * math.prod(zi**ai for zi, ai in zip(z, a)) for a, c in self.terms.items())

    def gradient_bound(self) -> float:
        """``Σ |c_α| |α|_1``, a bound on the angular gradient over the torus."""
        return float(sum(abs(c) * sum(a) for a, c in self.terms.items()))


def monomials(n_vars: int, degree: int) -> List[Alpha]:
    """All exponents of total degree <= ``degree``, graded then lexicographic."""
    out = [a for a in itertools.product(range(degree + 1), repeat=n_vars) if sum(a) <= degree]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def monomial_matrices(t: OperatorTuple, alphas: Sequence[Alpha]) -> Dict[Alpha, np.ndarray]:
    """``T^α`` for every requested ``α``, sharing products between monomials."""
    cache: Dict[Alpha, np.ndarray] = {(0,) * t.n: np.eye(t.dim, dtype=np.complex128)}

    def get(alpha: Alpha) -> np.ndarray:
        if alpha not in cache:
            k = next(i for i, a in enumerate(alpha) if a > 0)
            prev = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1:]
            cache[alpha] = t[k] @ get(prev)
        return cache[alpha]

    return {a: get(a) for a in alphas}


def _check_evaluable(p: MultiPolynomial, t: OperatorTuple, tol: ToleranceConfig) -> None:
    if p.n_vars != t.n:
        raise VarCountMismatch(f"polynomial has {p.n_vars} variables, tuple has {t.n} operators")
    report = check_commuting(t, tol)
    if not report.passed:
        raise NonCommutingTuple(report.worst_pair, report.worst_value)


def eval_at_tuple(p: MultiPolynomial, t: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    _check_evaluable(p, t, tol)
    mats = monomial_matrices(t, list(p.terms))
    out = np.zeros((t.dim, t.dim), dtype=np.complex128)
    for a, c in p.terms.items():
        out += c * mats[a]
    return out


def torus_values(p: MultiPolynomial, grid: int) -> np.ndarray:
    """``p`` at all points ``(e^{2πi j_1/N}, ..., e^{2πi j_n/N})`` via an inverse FFT.

    Exponents are reduced mod ``N``, which is exact on the grid.
    """
    coeffs = np.zeros((grid,) * p.n_vars, dtype=np.complex128)
    for a, c in p.terms.items():
        coeffs[tuple(x % grid for x in a)] += c
    return np.fft.ifftn(coeffs) * grid**p.n_vars


def grid_radius(n_vars: int, grid: int) -> float:
    return math.pi * math.sqrt(n_vars) / grid


def torus_sup(p: MultiPolynomial, grid: int) -> Tuple[float, float]:
    """(lower, upper) bracket of ``sup |p|`` over the polydisc."""
    if grid < 8:
        raise ValueError("grid must be at least 8")
    lower = float(np.abs(torus_values(p, grid)).max()) if p.terms else 0.0
    return lower, lower + p.gradient_bound() * grid_radius(p.n_vars, grid)


@dataclass(frozen=True)
class VNRecord:
    norm_pT: float
    sup_lower: float
    sup_upper: float
    certified_violation: bool
    grid: int

    @property
    def optimistic_ratio(self) -> float:
        return self.norm_pT / self.sup_lower if self.sup_lower > 0 else math.inf

    @property
    def certified_ratio(self) -> float:
        return self.norm_pT / self.sup_upper if self.sup_upper > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "norm_pT": self.norm_pT,
            "sup_lower": self.sup_lower,
            "sup_upper": self.sup_upper,
            "certified_violation": self.certified_violation,
            "grid": self.grid,
            "optimistic_ratio": self.optimistic_ratio,
            "certified_ratio": self.certified_ratio,
        }


def vn_defect(
    t: OperatorTuple, p: MultiPolynomial, grid: int = 64, tol: ToleranceConfig = DEFAULT_TOL
) -> VNRecord:
    norm = operator_norm(eval_at_tuple(p, t, tol))
    lower, upper = torus_sup(p, grid)
    return VNRecord(norm, lower, upper, norm > upper + VIOLATION_MARGIN, grid)


@dataclass(frozen=True)
class SearchResult:
    polynomial: MultiPolynomial
    record: VNRecord  # at the certification grid
    search_record: VNRecord  # at the search grid
    seed: int
    restarts: int
    restart_objectives: List[float] = field(default_factory=list)

    @property
    def certified_ratio(self) -> float:
        return self.record.certified_ratio

    @property
    def certified_violation(self) -> bool:
        return self.record.certified_violation


class _AscentProblem:
    """Objective ``||p(T)|| / (S(p) + w L ρ)`` with incremental updates along
    single coordinates.

    ``S`` is the grid maximum of ``|p|``, or the smoother grid mean
    ``(mean |p|^q)^(1/q)`` when ``smooth_q`` is set; coordinate ascent stalls
    at the kinks of the plain maximum.
    """

    def __init__(
        self,
        mats: np.ndarray,
        alphas: Sequence[Alpha],
        n_vars: int,
        grid: int,
        penalty: float,
        smooth_q: Optional[int] = None,
    ):
        self.mats = mats  # (K, d, d)
        self.weights = np.array([sum(a) for a in alphas], dtype=float)
        self.penalty = penalty
        self.smooth_q = smooth_q
        self.g = _monomial_grid(n_vars, grid, alphas)  # (K, grid**n)

    def value(self, c: np.ndarray, vals: np.ndarray, pt: np.ndarray) -> float:
        mod = np.abs(vals)
        if self.smooth_q is None:
            size = mod.max()
        else:
            size = float(np.mean(mod**self.smooth_q)) ** (1.0 / self.smooth_q)
        denom = size + self.penalty * float(np.abs(c) @ self.weights)
        if denom <= 0:
            return 0.0
        return np.linalg.norm(pt, 2) / denom

    def ascend(self, c: np.ndarray, step: float, min_step: float, max_sweeps: int) -> Tuple[np.ndarray, float]:
        c = c.copy()
        vals = c @ self.g
        pt = np.tensordot(c, self.mats, 1)
        best = self.value(c, vals, pt)
        scale = np.abs(c).max()
        sweeps = 0
        while step >= min_step and sweeps < max_sweeps:
            sweeps += 1
            improved = False
            for k in range(len(c)):
                for unit in (1.0, 1j):
                    for sign in (1.0, -1.0):
                        delta = sign * unit * step * scale
                        c[k] += delta
                        trial_vals = vals + delta * self.g[k]
                        trial_pt = pt + delta * self.mats[k]
                        value = self.value(c, trial_vals, trial_pt)
                        if value > best:
                            best, vals, pt = value, trial_vals, trial_pt
                            improved = True
                            break
                        c[k] -= delta
            if not improved:
                step *= 0.5
            # rescale to keep coefficients O(1); the objective is scale invariant
            s = np.abs(c).max()
            if s > 0:
                c, vals, pt, scale = c / s, vals / s, pt / s, 1.0
        return c, best


def _monomial_grid(n_vars: int, grid: int, alphas: Sequence[Alpha]) -> np.ndarray:
    idx = np.indices((grid,) * n_vars).reshape(n_vars, -1)
    phase = np.array(alphas, dtype=np.int64) @ idx  # (K, grid**n)
    return np.exp(2j * np.pi * (phase % grid) / grid)


def vn_violation_search(
    t: OperatorTuple,
    degree: int,
    restarts: int,
    grid: int = 64,
    seed: int = 0,
    *,
    coarse_grid: Optional[int] = None,
    polish: int = 3,
    penalty_weight: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> SearchResult:
    """Random-restart coordinate ascent for a polynomial with large ``||p(T)|| / sup |p|``.

    Restarts alternate between dense random coefficients and random
    coefficients on the top-degree monomials only.  Each restart ascends on a
    coarse torus grid, first against a smoothed sup, then the grid sup; the ``polish`` best are
    refined on ``grid`` and certified on ``2 * grid``.  The denominator adds
    ``penalty_weight`` times the gradient slack ``L ρ`` of the certification
    grid, steering the search to polynomials whose violation survives
    certification (``penalty_weight=0`` gives the plain grid ratio).
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    _check_evaluable(MultiPolynomial(t.n, {(0,) * t.n: 1}), t, tol)
    rng = np.random.default_rng(seed)
    alphas = monomials(t.n, degree)
    mat_map = monomial_matrices(t, alphas)
    mats = np.stack([mat_map[a] for a in alphas])
    cert_grid = 2 * grid
    penalty = penalty_weight * grid_radius(t.n, cert_grid)
    coarse = coarse_grid or min(grid, max(8, 4 * degree + 4))

    top_degree = np.array([sum(a) == degree for a in alphas])
    smooth = _AscentProblem(mats, alphas, t.n, coarse, penalty, smooth_q=SMOOTH_Q)
    sharp = _AscentProblem(mats, alphas, t.n, coarse, penalty)
    starts = []
    for r in range(restarts):
        c0 = rng.normal(size=len(alphas)) + 1j * rng.normal(size=len(alphas))
        if r % 2 == 1:
            c0 = c0 * top_degree
        c, _ = smooth.ascend(c0, step=0.25, min_step=1e-3, max_sweeps=100)
        c, value = sharp.ascend(c, step=0.05, min_step=1e-3, max_sweeps=100)
        starts.append((value, c))
    objectives = [float(v) for v, _ in starts]
    del smooth, sharp

    fine_problem = _AscentProblem(mats, alphas, t.n, grid, penalty)
    ranked = sorted(range(restarts), key=lambda i: -objectives[i])[: max(1, polish)]
    best: Optional[Tuple[float, MultiPolynomial, VNRecord, VNRecord]] = None
    for i in ranked:
        c, _ = fine_problem.ascend(starts[i][1], step=1e-2, min_step=1e-5, max_sweeps=60)
        p = MultiPolynomial.from_arrays(t.n, alphas, c)
        p = _normalized(p)
        record = vn_defect(t, p, cert_grid, tol)
        if best is None or record.certified_ratio > best[0]:
            best = (record.certified_ratio, p, record, vn_defect(t, p, grid, tol))
    _, p, record, search_record = best
    return SearchResult(p, record, search_record, seed, restarts, objectives)


def _normalized(p: MultiPolynomial) -> MultiPolynomial:
    s = max(abs(c) for c in p.terms.values())
    return MultiPolynomial(p.n_vars, {a: c / s for a, c in p.terms.items()})
