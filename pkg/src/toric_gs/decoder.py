"""Input documents and command line specs to domain objects.

Documents are JSON5, parsed with `ujson5`, so hand written inputs may carry
comments and trailing commas. Schema errors carry a JSON pointer to the
offending value.
"""

from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import ujson5

from . import polytope as pt
from . import rational as rq
from .core import RationalVector, SchemaError, ToricGSError
from .err_msg import SchemaErr, WeightErr
from .mafunc import DiscretePotential, interval
from .polytope import LabelledPolytope
from .quadrature import WeightFunction
from .stability import PLConvexFunction

BUILTIN_PREFIX = "builtin:"
WEIGHT_KINDS = ("constant", "affine", "exp_affine", "polynomial")


def load_document(path: str | Path) -> Any:
    """Read and parse a JSON5 file.

    Raises:
        SchemaError: if the file is missing or is not valid JSON5
    """
    try:
        text = Path(path).read_text(encoding="utf8")
    except OSError as e:
        raise SchemaError("SchemaViolation", SchemaErr.unreadable_file(str(path))) from e
    return loads_document(text)


def loads_document(text: str) -> Any:
    """Parse a JSON5 string."""
    try:
        return ujson5.loads(text)
    except ujson5.JSON5DecodeError as e:
        raise SchemaError("SchemaViolation", SchemaErr.bad_document(e.msg), pointer="") from e


def _require(doc: Any, key: str, pointer: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError("SchemaViolation", SchemaErr.wrong_type("object", doc), pointer=pointer)
    if key not in doc:
        raise SchemaError("SchemaViolation", SchemaErr.missing_key(key), pointer=pointer)
    return doc[key]


def _list(value: Any, pointer: str) -> list[Any]:
    if not isinstance(value, list):
        raise SchemaError("SchemaViolation", SchemaErr.wrong_type("array", value), pointer=pointer)
    return value


def _vector(value: Any, pointer: str) -> RationalVector:
    items = _list(value, pointer)
    out = []
    for i, item in enumerate(items):
        try:
            out.append(rq.to_fraction(item))
        except SchemaError as e:
            e.pointer = f"{pointer}/{i}"
            raise
    return tuple(out)


def _scalar(value: Any, pointer: str) -> Any:
    try:
        return rq.to_fraction(value)
    except SchemaError as e:
        e.pointer = pointer
        raise


def _with_pointer(err: ToricGSError, pointer: str) -> ToricGSError:
    if err.pointer is None:
        err.pointer = pointer
    return err


def polytope_from_dict(doc: Any, pointer: str = "") -> LabelledPolytope:
    """Polytope from `{"builtin"}`, `{"vertices"}` or `{"dim", "facets"}`."""
    if not isinstance(doc, dict):
        raise SchemaError("SchemaViolation", SchemaErr.wrong_type("object", doc), pointer=pointer)
    if "builtin" in doc:
        name = doc["builtin"]
        if not isinstance(name, str):
            raise SchemaError(
                "SchemaViolation", SchemaErr.wrong_type("string", name), pointer=f"{pointer}/builtin"
            )
        return pt.builtin(name)
    if "vertices" in doc:
        points = [
            _vector(p, f"{pointer}/vertices/{i}")
            for i, p in enumerate(_list(doc["vertices"], f"{pointer}/vertices"))
        ]
        try:
            return pt.from_vertices(points)
        except ToricGSError as e:
            raise _with_pointer(e, f"{pointer}/vertices") from e
    facets = _list(_require(doc, "facets", pointer), f"{pointer}/facets")
    normals = []
    labels = []
    for i, facet in enumerate(facets):
        here = f"{pointer}/facets/{i}"
        normals.append(_vector(_require(facet, "normal", here), f"{here}/normal"))
        labels.append(_scalar(facet.get("label", 1), f"{here}/label"))
    if "dim" in doc and normals and doc["dim"] != len(normals[0]):
        raise SchemaError(
            "SchemaViolation",
            SchemaErr.wrong_type(f"dim {len(normals[0])}", doc["dim"]),
            pointer=f"{pointer}/dim",
        )
    try:
        return pt.from_facets(normals, labels)
    except ToricGSError as e:
        pointer_to = f"{pointer}/facets" if e.index is None else f"{pointer}/facets/{e.index}"
        raise _with_pointer(e, pointer_to) from e


def parse_polytope(spec: str) -> LabelledPolytope:
    """`builtin:NAME` or the path of a polytope document."""
    if spec.startswith(BUILTIN_PREFIX):
        return pt.builtin(spec[len(BUILTIN_PREFIX) :])
    return polytope_from_dict(load_document(spec))


def weight_from_dict(doc: Any, dim: int, pointer: str = "") -> WeightFunction:
    """Weight from `{"kind", "a0", "b", "coeffs"}`."""
    kind = _require(doc, "kind", pointer)
    if kind not in WEIGHT_KINDS:
        raise SchemaError("SchemaViolation", WeightErr.unknown_kind(str(kind)), pointer=f"{pointer}/kind")
    if kind == "constant":
        return WeightFunction.constant(_scalar(_require(doc, "a0", pointer), f"{pointer}/a0"), dim)
    if kind in ("affine", "exp_affine"):
        a0 = _scalar(doc.get("a0", 0), f"{pointer}/a0")
        b = _vector(_require(doc, "b", pointer), f"{pointer}/b")
        if len(b) != dim:
            raise SchemaError(
                "SchemaViolation", SchemaErr.wrong_type(f"{dim} coefficients", b), pointer=f"{pointer}/b"
            )
        if kind == "affine":
            return WeightFunction.affine(a0, b)
        return WeightFunction.exp_affine(a0, b)
    coeffs = []
    for i, term in enumerate(_list(_require(doc, "coeffs", pointer), f"{pointer}/coeffs")):
        here = f"{pointer}/coeffs/{i}"
        powers = _list(_require(term, "powers", here), f"{here}/powers")
        if len(powers) != dim or not all(isinstance(k, int) and k >= 0 for k in powers):
            raise SchemaError(
                "SchemaViolation", WeightErr.missing_param("polynomial", "powers"), pointer=f"{here}/powers"
            )
        coeffs.append((powers, _scalar(_require(term, "c", here), f"{here}/c")))
    return WeightFunction.polynomial(coeffs, dim)


def parse_vector(text: str) -> RationalVector:
    """`"1,-1/2"` to an exact vector."""
    try:
        return tuple(rq.to_fraction(part) for part in text.split(","))
    except SchemaError as e:
        raise SchemaError("SchemaViolation", SchemaErr.bad_vector(text)) from e


def parse_weight(spec: str, dim: int) -> WeightFunction:
    """`kind:params` or the path of a weight document.

    `constant:C`, `affine:A0,B1,...,Bn` and `exp_affine:A0,B1,...,Bn` are
    accepted inline; polynomial weights need a document.
    """
    kind, sep, params = spec.partition(":")
    if not sep or kind not in WEIGHT_KINDS:
        if Path(spec).is_file():
            return weight_from_dict(load_document(spec), dim)
        raise SchemaError("SchemaViolation", SchemaErr.bad_weight_spec(spec))
    values = parse_vector(params) if params else ()
    if kind == "constant" and len(values) == 1:
        return WeightFunction.constant(values[0], dim)
    if kind in ("affine", "exp_affine") and len(values) == dim + 1:
        return weight_from_dict({"kind": kind, "a0": values[0], "b": list(values[1:])}, dim)
    raise SchemaError("SchemaViolation", SchemaErr.bad_weight_spec(spec))


def pl_from_dict(doc: Any, poly: LabelledPolytope, pointer: str = "") -> PLConvexFunction:
    """PL convex function from `{"pieces": [{"a", "c"}]}`."""
    pieces = []
    for i, piece in enumerate(_list(_require(doc, "pieces", pointer), f"{pointer}/pieces")):
        here = f"{pointer}/pieces/{i}"
        slope = _vector(_require(piece, "a", here), f"{here}/a")
        if len(slope) != poly.dim:
            raise SchemaError(
                "SchemaViolation", SchemaErr.wrong_type(f"{poly.dim} slopes", slope), pointer=f"{here}/a"
            )
        pieces.append((slope, _scalar(piece.get("c", 0), f"{here}/c")))
    return PLConvexFunction.normalized(poly, pieces)


def potential_from_dict(
    doc: Any, poly: LabelledPolytope, pointer: str = ""
) -> DiscretePotential:
    """Grid potential from `{"grid": {"R", "N"}, "values": [...]}`."""
    lower, upper = interval(poly)
    grid = _require(doc, "grid", pointer)
    radius = _require(grid, "R", f"{pointer}/grid")
    nodes = _require(grid, "N", f"{pointer}/grid")
    values: Sequence[Any] = _list(_require(doc, "values", pointer), f"{pointer}/values")
    if not isinstance(nodes, int) or nodes < 3 or len(values) != nodes:
        raise SchemaError(
            "SchemaViolation", SchemaErr.wrong_type(f"{nodes} values", values), pointer=f"{pointer}/values"
        )
    if not isinstance(radius, (int, float)) or radius <= 0:
        raise SchemaError(
            "SchemaViolation", SchemaErr.wrong_type("positive number", radius), pointer=f"{pointer}/grid/R"
        )
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
            raise SchemaError(
                "SchemaViolation",
                SchemaErr.wrong_type("finite number", value),
                pointer=f"{pointer}/values/{i}",
            )
    return DiscretePotential(float(radius), np.asarray(values, dtype=float), lower, upper)
