"""Exact linear algebra over `fractions.Fraction`.

The polytope layer needs exact answers for tightness and feasibility checks, so
vertex enumeration and facet recovery never touch floating point.
"""

from collections.abc import Sequence
from fractions import Fraction
from math import lcm
from typing import Any

from .core import RationalVector, SchemaError
from .err_msg import SchemaErr


def to_fraction(value: Any) -> Fraction:
    """Convert ints, floats, `"p/q"` strings and Fractions to a Fraction.

    Floats are converted exactly (their binary value), which keeps later
    comparisons exact.

    Raises:
        SchemaError: if the value is not a rational number
    """
    if isinstance(value, bool):
        raise SchemaError("SchemaViolation", SchemaErr.bad_rational(value))
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise SchemaError("SchemaViolation", SchemaErr.bad_rational(value))
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError("SchemaViolation", SchemaErr.bad_rational(value)) from e
    raise SchemaError("SchemaViolation", SchemaErr.bad_rational(value))


def to_vector(values: Sequence[Any]) -> RationalVector:
    """Convert a sequence to an exact vector."""
    return tuple(to_fraction(v) for v in values)


def format_fraction(value: Fraction) -> str:
    """Serialize as `"p/q"`, or `"p"` for integers."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    """Exact inner product."""
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> RationalVector:
    """Exact difference of two vectors."""
    return tuple(x - y for x, y in zip(a, b))


def _row_reduce(
    rows: list[list[Fraction]], ncols: int
) -> tuple[list[list[Fraction]], list[int], int]:
    """Gauss-Jordan elimination on the first `ncols` columns.

    Returns:
        the reduced rows, pivot columns, and the number of row swaps
    """
    mat = [list(r) for r in rows]
    pivots: list[int] = []
    swaps = 0
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        if pivot != row:
            mat[row], mat[pivot] = mat[pivot], mat[row]
            swaps += 1
        inv = 1 / mat[row][col]
        mat[row] = [x * inv for x in mat[row]]
        for r, other in enumerate(mat):
            if r != row and other[col] != 0:
                factor = other[col]
                mat[r] = [x - factor * y for x, y in zip(other, mat[row])]
        pivots.append(col)
        row += 1
        if row == len(mat):
            break
    return mat, pivots, swaps


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a list of exact vectors."""
    if not vectors:
        return 0
    _, pivots, _ = _row_reduce([list(v) for v in vectors], len(vectors[0]))
    return len(pivots)


def affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    """Dimension of the affine hull of the points."""
    if not points:
        return -1
    base = points[0]
    return rank([sub(p, base) for p in points[1:]])


def solve(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> RationalVector | None:
    """Solve a square system exactly.

    Returns:
        the unique solution, or None when the matrix is singular
    """
    n = len(matrix)
    augmented = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    reduced, pivots, _ = _row_reduce(augmented, n)
    if len(pivots) < n:
        return None
    return tuple(reduced[i][n] for i in range(n))


def det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-preserving elimination."""
    n = len(matrix)
    mat = [list(r) for r in matrix]
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            result = -result
        result *= mat[col][col]
        for r in range(col + 1, n):
            if mat[r][col] != 0:
                factor = mat[r][col] / mat[col][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
    return result


def common_denominator(values: Sequence[Fraction]) -> int:
    """Least common multiple of the denominators."""
    return lcm(*(v.denominator for v in values)) if values else 1
