"""JSON wire formats for matrices, tuples, certificates, polynomials and inputs.

Matrices are ``{"rows", "cols", "entries": [[re, im], ...]}`` in row-major
order.  Python's float ``repr`` round-trips exactly, so emitted files re-parse
to bit-identical arrays.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import ValidationError
from .extensions import ExtensionCertificate, Provenance
from .parrott import ParrottInput
from .tuples import OperatorTuple
from .varopoulos import VaropoulosInput
from .vonneumann import MultiPolynomial

PathLike = Union[str, Path]


def _scalar(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"complex entry must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise ValidationError(f"cannot read {value!r} as a complex scalar")


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel(order="C")],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"matrix JSON needs rows, cols and entries: {exc}") from None
    if len(entries) != rows * cols:
        raise ValidationError(f"matrix has {len(entries)} entries, expected {rows * cols}")
    arr = np.array([_scalar(e) for e in entries], dtype=np.complex128).reshape((rows, cols))
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


def tuple_to_json(t: OperatorTuple) -> dict:
    return {"n": t.n, "dim": t.dim, "ops": [matrix_to_json(m) for m in t]}


def tuple_from_json(obj: dict) -> OperatorTuple:
    if "ops" not in obj:
        raise ValidationError("tuple JSON needs an 'ops' list")
    t = OperatorTuple(tuple(matrix_from_json(m) for m in obj["ops"]))
    if "n" in obj and int(obj["n"]) != t.n:
        raise ValidationError(f"tuple declares n={obj['n']} but has {t.n} operators")
    if "dim" in obj and int(obj["dim"]) != t.dim:
        raise ValidationError(f"tuple declares dim={obj['dim']} but operators are {t.dim}x{t.dim}")
    return t


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return complex_to_json(value)
    return value


def certificate_to_json(cert: ExtensionCertificate) -> dict:
    return {
        "base": tuple_to_json(cert.base),
        "ext_dim": cert.ext_dim,
        "A": [matrix_to_json(a) for a in cert.A],
        "B": [matrix_to_json(b) for b in cert.B],
        "provenance": cert.provenance.value,
        "verdicts": cert.verdicts.to_dict() if cert.verdicts is not None else None,
        "seed": cert.seed,
        "notes": _jsonable(cert.notes),
    }


def certificate_from_json(obj: dict) -> ExtensionCertificate:
    return ExtensionCertificate(
        base=tuple_from_json(obj["base"]),
        A=tuple(matrix_from_json(a) for a in obj["A"]),
        B=tuple(matrix_from_json(b) for b in obj["B"]),
        provenance=Provenance(obj.get("provenance", "Manual")),
        seed=obj.get("seed"),
        notes=obj.get("notes") or {},
    )


def polynomial_to_json(p: MultiPolynomial) -> dict:
    return {
        "n_vars": p.n_vars,
        "terms": [{"alpha": list(a), "c": complex_to_json(c)} for a, c in p.terms.items()],
    }


def polynomial_from_json(obj: dict) -> MultiPolynomial:
    try:
        n_vars = int(obj["n_vars"])
        terms = {}
        for term in obj["terms"]:
            alpha = tuple(int(a) for a in term["alpha"])
            terms[alpha] = terms.get(alpha, 0) + _scalar(term["c"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"polynomial JSON needs n_vars and terms[alpha, c]: {exc}") from None
    return MultiPolynomial(n_vars, terms)


def vector_from_json(v) -> np.ndarray:
    return np.array([_scalar(e) for e in v], dtype=np.complex128)


def varopoulos_input_from_json(obj: dict) -> VaropoulosInput:
    try:
        xs = [vector_from_json(v) for v in obj["x"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"vectors JSON needs 'x': {exc}") from None
    if len(xs) != 3:
        raise ValidationError(f"need exactly three vectors, got {len(xs)}")
    j = int(obj.get("J", len(xs[0])))
    if any(len(x) != j for x in xs):
        raise ValidationError(f"every vector must have length J={j}")
    return VaropoulosInput(np.array(xs))


def varopoulos_input_to_json(v: VaropoulosInput) -> dict:
    return {"J": v.J_size, "x": [[complex_to_json(z) for z in row] for row in v.x]}


def parrott_input_from_json(obj) -> ParrottInput:
    mats = obj["unitaries"] if isinstance(obj, dict) else obj
    return ParrottInput(tuple(matrix_from_json(m) for m in mats))


def parrott_input_to_json(p: ParrottInput) -> dict:
    return {"unitaries": [matrix_to_json(u) for u in p.unitaries]}


def load_json(path: PathLike):
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path: PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
