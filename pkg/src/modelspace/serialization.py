"""JSON encodings of the package's values.

Complex numbers are ``[re, im]`` pairs of doubles; floats are written with
Python's shortest round-trip ``repr``.  Decoders are strict: missing
required fields, unknown fields and wrong types raise ``ParseError``.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .clark import ClarkMeasure
from .decompose import Component, Decomposition
from .errors import ParseError
from .inner_function import BlaschkeProduct
from .tto import BOUNDARY, D, DBAR, SYMBOL_KINDS, SymbolSpec, SymbolTerm

ORIENTATIONS = (D, DBAR, BOUNDARY)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def _check_keys(obj: Any, what: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(f"{what} must be a JSON object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ParseError(f"unknown field(s) in {what}: {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"missing field(s) in {what}: {', '.join(missing)}")
    return obj


def parse_real(x: Any, what: str = "number") -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{what} must be a number")
    x = float(x)
    if not math.isfinite(x):
        raise ParseError(f"{what} must be finite")
    return x


def parse_int(x: Any, what: str = "integer") -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{what} must be an integer")
    return x


def parse_complex(x: Any, what: str = "complex number") -> complex:
    if not isinstance(x, list) or len(x) != 2:
        raise ParseError(f"{what} must be a [re, im] pair")
    return complex(parse_real(x[0], what), parse_real(x[1], what))


def dump_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def parse_complex_list(x: Any, what: str) -> list[complex]:
    if not isinstance(x, list):
        raise ParseError(f"{what} must be a list")
    return [parse_complex(v, what) for v in x]


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def theta_to_json(B: BlaschkeProduct) -> dict:
    return {"zeros": [dump_complex(a) for a in B.zeros], "constant": dump_complex(B.constant)}


def theta_from_json(obj: Any) -> BlaschkeProduct:
    obj = _check_keys(obj, "theta", ("zeros",), ("constant",))
    zeros = parse_complex_list(obj["zeros"], "theta zero")
    constant = parse_complex(obj["constant"], "theta constant") if "constant" in obj else 1.0
    return BlaschkeProduct(tuple(zeros), constant)


def vector_to_json(v: np.ndarray) -> dict:
    return {"coords": [dump_complex(x) for x in np.asarray(v).ravel()]}


def vector_from_json(obj: Any) -> np.ndarray:
    obj = _check_keys(obj, "vector", ("coords",))
    return np.array(parse_complex_list(obj["coords"], "vector entry"), dtype=complex)


def matrix_to_json(A: np.ndarray) -> dict:
    A = np.asarray(A)
    return {"rows": int(A.shape[0]), "cols": int(A.shape[1]),
            "data": [dump_complex(x) for x in A.ravel()]}


def matrix_from_json(obj: Any) -> np.ndarray:
    obj = _check_keys(obj, "matrix", ("rows", "cols", "data"))
    rows, cols = parse_int(obj["rows"], "rows"), parse_int(obj["cols"], "cols")
    data = parse_complex_list(obj["data"], "matrix entry")
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise ParseError(f"matrix data has {len(data)} entries, expected {rows} x {cols}")
    return np.array(data, dtype=complex).reshape(rows, cols)


def symbol_to_json(phi: SymbolSpec) -> dict:
    terms = []
    for t in phi.terms:
        item = {"kind": t.kind, "m": t.m, "coeff": dump_complex(t.coeff)}
        if t.lam is not None:
            item["lambda"] = dump_complex(t.lam)
        terms.append(item)
    return {"terms": terms}


def symbol_from_json(obj: Any) -> SymbolSpec:
    obj = _check_keys(obj, "symbol", ("terms",))
    if not isinstance(obj["terms"], list):
        raise ParseError("symbol terms must be a list")
    terms = []
    for item in obj["terms"]:
        item = _check_keys(item, "symbol term", ("kind", "m"), ("coeff", "lambda"))
        kind = item["kind"]
        if kind not in SYMBOL_KINDS:
            raise ParseError(f"unknown symbol kind {kind!r}")
        lam = parse_complex(item["lambda"], "pole") if "lambda" in item else None
        coeff = parse_complex(item["coeff"], "coefficient") if "coeff" in item else 1.0
        terms.append(SymbolTerm(kind, parse_int(item["m"], "m"), coeff, lam))
    return SymbolSpec(tuple(terms))


def clark_to_json(cm: ClarkMeasure) -> dict:
    return {"alpha": dump_complex(cm.alpha),
            "atoms": [dump_complex(x) for x in cm.atoms],
            "masses": [float(w) for w in cm.masses]}


def clark_from_json(obj: Any) -> ClarkMeasure:
    obj = _check_keys(obj, "clark measure", ("alpha", "atoms", "masses"))
    atoms = np.array(parse_complex_list(obj["atoms"], "atom"), dtype=complex)
    if not isinstance(obj["masses"], list):
        raise ParseError("masses must be a list")
    masses = np.array([parse_real(w, "mass") for w in obj["masses"]])
    if atoms.shape != masses.shape:
        raise ParseError("atoms and masses differ in length")
    return ClarkMeasure(parse_complex(obj["alpha"], "alpha"), atoms, masses)


def decomposition_to_json(d: Decomposition) -> dict:
    return {"components": [{"point": dump_complex(c.point), "order": c.order,
                            "orientation": c.orientation,
                            "coefficients": [dump_complex(x) for x in c.coefficients]}
                           for c in d.components],
            "residual": float(d.residual)}


def decomposition_from_json(obj: Any) -> Decomposition:
    obj = _check_keys(obj, "decomposition", ("components", "residual"))
    if not isinstance(obj["components"], list):
        raise ParseError("components must be a list")
    comps = []
    for item in obj["components"]:
        item = _check_keys(item, "component", ("point", "order", "orientation", "coefficients"))
        if item["orientation"] not in ORIENTATIONS:
            raise ParseError(f"unknown orientation {item['orientation']!r}")
        order = parse_int(item["order"], "order")
        coefs = parse_complex_list(item["coefficients"], "coefficient")
        if order < 0 or len(coefs) != order + 1:
            raise ParseError("a component of order n needs n + 1 coefficients")
        comps.append(Component(parse_complex(item["point"], "point"), order,
                               item["orientation"], tuple(coefs)))
    return Decomposition(tuple(comps), parse_real(obj["residual"], "residual"))


# ---------------------------------------------------------------------------
# text
# ---------------------------------------------------------------------------

def dumps(obj: Any) -> str:
    """Canonical text: sorted keys, no NaN, trailing newline."""
    return json.dumps(obj, sort_keys=True, allow_nan=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
