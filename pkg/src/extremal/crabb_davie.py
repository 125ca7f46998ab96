"""The 8 x 8 Crabb-Davie triple of commuting partial isometries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .extensions import gap_subspace, probe_samples
from .linalg_core import DEFAULT_TOL, ToleranceConfig
from .tuples import OperatorTuple

# (row, col, value), 0-based; every unlisted entry is zero.  Column 0 feeds
# rows 1-3, columns 1-3 feed rows 4-6 through the signed pattern
#   (-δ_i1  δ_i3  δ_i2 ;  δ_i3 -δ_i2  δ_i1 ;  δ_i2  δ_i1 -δ_i3)
# and columns 4-6 feed row 7.
_ENTRIES = (
    ((1, 0, 1), (4, 1, -1), (5, 3, 1), (6, 2, 1), (7, 4, 1)),
    ((2, 0, 1), (4, 3, 1), (5, 2, -1), (6, 1, 1), (7, 5, 1)),
    ((3, 0, 1), (4, 2, 1), (5, 1, 1), (6, 3, -1), (7, 6, 1)),
)

#: diagonal of T_i T_i^* for i = 1, 2, 3
DEFECT_DIAGONALS = (
    (0, 1, 0, 0, 1, 1, 1, 1),
    (0, 0, 1, 0, 1, 1, 1, 1),
    (0, 0, 0, 1, 1, 1, 1, 1),
)


def integer_matrices() -> List[np.ndarray]:
    """The three matrices as exact int64 arrays."""
    out = []
    for i in range(3):
        m = np.zeros((8, 8), dtype=np.int64)
        for row, col, value in _ENTRIES[i]:
            m[row, col] = value
        out.append(m)
    return out


@dataclass(frozen=True, eq=False)
class CrabbDavieTriple:
    tuple: OperatorTuple
    integer: List[np.ndarray] = field(repr=False)


def build_crabb_davie() -> CrabbDavieTriple:
    ints = integer_matrices()
    return CrabbDavieTriple(OperatorTuple(tuple(m.astype(np.complex128) for m in ints)), ints)


def structure_report(cd: CrabbDavieTriple | None = None) -> dict:
    """Exact integer checks of the structural identities."""
    cd = cd or build_crabb_davie()
    ms = cd.integer
    comm = max(int(np.abs(ms[i] @ ms[j] - ms[j] @ ms[i]).max()) for i in range(3) for j in range(3))
    piso = max(int(np.abs(m @ m.T @ m - m).max()) for m in ms)
    defect_ok = all(
        np.array_equal(m @ m.T, np.diag(diag)) for m, diag in zip(ms, DEFECT_DIAGONALS)
    )
    nonzero_ok = all(np.count_nonzero(m) == 5 and set(np.abs(m[m != 0])) == {1} for m in ms)
    gap_dim = gap_subspace(cd.tuple).dim
    return {
        "commutator_max_abs": comm,
        "partial_isometry_max_abs": piso,
        "defect_diagonals_exact": bool(defect_ok),
        "entry_pattern_ok": bool(nonzero_ok),
        "gap_dim": gap_dim,
        "passed": comm == 0 and piso == 0 and defect_ok and nonzero_ok and gap_dim == 0,
    }


def cd_extension_evidence(
    k: int, samples: int, seed: int, tol: ToleranceConfig = DEFAULT_TOL
) -> dict:
    """Solution-space dimension of the extension system for ``B = 0`` and
    ``samples`` random commuting ``B`` on C^k.

    Numerical evidence only: an all-zero record is consistent with
    extremality but does not prove it.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    t = build_crabb_davie().tuple
    dims = [s.solutions.dim for s in probe_samples(t, samples, k, seed, tol)]
    return {
        "k": k,
        "samples": samples,
        "seed": seed,
        "solution_dims": dims,
        "max_solution_dim": max(dims),
        "verdict": "consistent with extremal" if max(dims) == 0 else "non-trivial extension found",
        "kind": "numerical evidence",
    }
