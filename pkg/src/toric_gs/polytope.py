"""Monotone labelled lattice polytopes.

A polytope is stored in facet form P = {x : <nu_i, x> <= 1} with every label
normalized to 1, together with its exactly enumerated vertices and a star
triangulation from the origin. All of this is rational; floats only appear in
the cached arrays handed to the numeric modules.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import factorial, floor, ceil
from typing import Any, NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import rational as rq
from .consts import BUILTIN_VERTICES, LATTICE_POINT_CAP, MAX_DIM
from .core import FloatArray, IntArray, PolytopeError, RationalVector, SchemaError
from .err_msg import PolytopeErr, SchemaErr

logger = logging.getLogger(__name__)

ORIGIN = -1
"""Index used in simplices for the origin, which is not a vertex."""


class Facet(NamedTuple):
    """Facet `<normal, x> <= label` of a polytope."""

    normal: RationalVector
    label: Fraction


class Cell(NamedTuple):
    """A general convex polytope given by its vertices and a triangulation.

    Used for the pieces of PL functions and other sub-polytopes of P that do not
    contain the origin.
    """

    vertices: tuple[RationalVector, ...]
    simplices: tuple[tuple[int, ...], ...]

    def simplex_points(self) -> list[list[RationalVector]]:
        """Vertices of every simplex of the triangulation."""
        return [[self.vertices[i] for i in s] for s in self.simplices]


@dataclass(frozen=True)
class LabelledPolytope:
    """Monotone labelled polytope P = {<nu_i, x> <= 1}.

    Instances are immutable and are built with `from_facets`, `from_vertices` or
    `builtin`.

    Attributes:
        dim: ambient dimension n, 1 <= n <= 4
        facets: facets with labels normalized to 1
        vertices: exact vertices, sorted lexicographically
        facet_vertices: for each facet, the indices of the vertices on it
        triangulation: star triangulation from the origin, each simplex a tuple of
            n+1 indices into `vertices` where `ORIGIN` stands for the origin
    """

    dim: int
    facets: tuple[Facet, ...]
    vertices: tuple[RationalVector, ...]
    facet_vertices: tuple[frozenset[int], ...] = field(repr=False)
    triangulation: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def normals(self) -> tuple[RationalVector, ...]:
        """Facet normals, i.e. the vertices of the dual polytope."""
        return tuple(f.normal for f in self.facets)

    @property
    def dual_vertices(self) -> tuple[RationalVector, ...]:
        """Alias of `normals`: P is monotone, so the normals span the dual."""
        return self.normals

    @cached_property
    def vertex_array(self) -> FloatArray:
        """Vertices as a float array of shape (V, n)."""
        return np.array([[float(x) for x in v] for v in self.vertices])

    @cached_property
    def normal_array(self) -> FloatArray:
        """Normals as a float array of shape (F, n)."""
        return np.array([[float(x) for x in nu] for nu in self.normals])

    def point(self, idx: int) -> RationalVector:
        """Vertex `idx`, or the origin for `ORIGIN`."""
        if idx == ORIGIN:
            return tuple(Fraction(0) for _ in range(self.dim))
        return self.vertices[idx]

    def simplex_points(self) -> list[list[RationalVector]]:
        """Exact vertices of every simplex of the triangulation."""
        return [[self.point(i) for i in s] for s in self.triangulation]

    @cached_property
    def simplex_volumes(self) -> tuple[Fraction, ...]:
        """Exact volume of each triangulation simplex."""
        return tuple(simplex_volume(pts) for pts in self.simplex_points())

    @cached_property
    def volume(self) -> Fraction:
        """Exact Euclidean volume of P."""
        return sum(self.simplex_volumes, Fraction(0))

    @cached_property
    def is_reflexive(self) -> bool:
        """All vertices and all (label-1) normals are integral."""
        return all(x.denominator == 1 for v in self.vertices for x in v) and all(
            x.denominator == 1 for nu in self.normals for x in nu
        )

    def contains(self, x: Sequence[Any]) -> bool:
        """Exact membership test for rational points."""
        point = rq.to_vector(x)
        return all(rq.dot(f.normal, point) <= 1 for f in self.facets)

    def transform(self, matrix: Sequence[Sequence[int]]) -> "LabelledPolytope":
        """Image of P under the unimodular lattice map x -> U x.

        Normals transform by U^{-T}, so labels stay 1.

        Raises:
            PolytopeError: if U is not an integer matrix with determinant +-1
        """
        u_mat = [[Fraction(x) for x in row] for row in matrix]
        if (
            len(u_mat) != self.dim
            or any(len(row) != self.dim for row in u_mat)
            or any(x.denominator != 1 for row in u_mat for x in row)
            or abs(rq.det(u_mat)) != 1
        ):
            raise PolytopeError("NotUnimodular", PolytopeErr.not_unimodular())
        # nu' = U^{-T} nu  <=>  U^T nu' = nu
        u_t = [[u_mat[j][i] for j in range(self.dim)] for i in range(self.dim)]
        normals = []
        for nu in self.normals:
            solved = rq.solve(u_t, nu)
            assert solved is not None
            normals.append(solved)
        return from_facets(normals, [1] * len(normals))


def simplex_volume(points: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact volume of a full-dimensional simplex given by n+1 points."""
    base = points[0]
    n = len(base)
    return abs(rq.det([rq.sub(p, base) for p in points[1:]])) / factorial(n)


def _kernel_vector(rows: Sequence[Sequence[Fraction]], n: int) -> RationalVector:
    """A non-zero vector orthogonal to `rows`, which must have rank n-1."""
    if not rows:
        return (Fraction(1),)
    reduced, pivots, _ = rq._row_reduce(  # pylint: disable=W0212
        [list(r) for r in rows], n
    )
    free = next(c for c in range(n) if c not in pivots)
    out = [Fraction(0)] * n
    out[free] = Fraction(1)
    for r, col in enumerate(pivots):
        out[col] = -reduced[r][free]
    return tuple(out)


def _check_bounded(normals: Sequence[RationalVector], n: int) -> None:
    """Raise `Unbounded` when {<nu_i, d> <= 0 for all i} contains d != 0."""
    if rq.rank(normals) < n:
        raise PolytopeError("Unbounded", PolytopeErr.unbounded())
    # extreme rays of the recession cone lie on n-1 of its facets
    for subset in combinations(normals, n - 1):
        if rq.rank(list(subset)) != n - 1:
            continue
        ray = _kernel_vector(list(subset), n)
        for d in (ray, tuple(-x for x in ray)):
            if all(rq.dot(nu, d) <= 0 for nu in normals):
                raise PolytopeError("Unbounded", PolytopeErr.unbounded())


def enumerate_vertices(
    normals: Sequence[RationalVector], offsets: Sequence[Fraction]
) -> list[RationalVector]:
    """Vertices of {<normals_i, x> <= offsets_i} by brute-force intersection.

    Every n-subset of hyperplanes is intersected exactly and the feasible
    intersection points are kept. The result is sorted lexicographically.
    """
    if not normals:
        return []
    n = len(normals[0])
    if n == 0:
        return [()] if all(b >= 0 for b in offsets) else []
    found: set[RationalVector] = set()
    for subset in combinations(range(len(normals)), n):
        point = rq.solve([normals[i] for i in subset], [offsets[i] for i in subset])
        if point is None or point in found:
            continue
        if all(rq.dot(nu, point) <= b for nu, b in zip(normals, offsets)):
            found.add(point)
    return sorted(found)


def _incidences(
    vertices: Sequence[RationalVector],
    normals: Sequence[RationalVector],
    offsets: Sequence[Fraction],
) -> list[frozenset[int]]:
    return [
        frozenset(i for i, v in enumerate(vertices) if rq.dot(nu, v) == b)
        for nu, b in zip(normals, offsets)
    ]


def _pull(
    face: frozenset[int],
    face_dim: int,
    facet_sets: Sequence[frozenset[int]],
    vertices: Sequence[RationalVector],
) -> list[tuple[int, ...]]:
    """Pulling triangulation of a face from its smallest vertex index."""
    if face_dim == 0:
        return [(min(face),)]
    apex = min(face)
    subfaces: set[frozenset[int]] = set()
    for facet in facet_sets:
        sub = face & facet
        if apex in sub or len(sub) < face_dim or sub in subfaces:
            continue
        if rq.affine_rank([vertices[i] for i in sorted(sub)]) == face_dim - 1:
            subfaces.add(sub)
    out: list[tuple[int, ...]] = []
    for sub in sorted(subfaces, key=sorted):
        out.extend((apex,) + s for s in _pull(sub, face_dim - 1, facet_sets, vertices))
    return out


def from_facets(
    normals: Sequence[Sequence[Any]], labels: Sequence[Any]
) -> LabelledPolytope:
    """Build a polytope from facet normals and labels.

    Each normal is divided by its label, so the result has every label equal to
    one. Vertices are computed exactly by intersecting all n-subsets of facet
    hyperplanes.

    Args:
        normals: facet normals nu_i (ints, Fractions, floats or "p/q" strings)
        labels: positive facet labels l_i

    Returns:
        the normalized polytope

    Raises:
        PolytopeError: `DegenerateFacet` for non-positive labels, zero, repeated or
            loose facets; `Unbounded`; `Empty`
    """
    if not normals:
        raise PolytopeError("Empty", PolytopeErr.empty())
    n = len(normals[0])
    if not 1 <= n <= MAX_DIM:
        raise PolytopeError("DimensionOutOfRange", PolytopeErr.dimension_out_of_range(n))
    if len(labels) != len(normals):
        raise PolytopeError(
            "DegenerateFacet", PolytopeErr.ragged_input(len(normals), len(labels), 0)
        )
    scaled: list[RationalVector] = []
    for idx, (nu, label) in enumerate(zip(normals, labels)):
        if len(nu) != n:
            raise PolytopeError(
                "DegenerateFacet", PolytopeErr.ragged_input(n, len(nu), idx), index=idx
            )
        lab = rq.to_fraction(label)
        if lab <= 0:
            raise PolytopeError(
                "DegenerateFacet", PolytopeErr.non_positive_label(idx, label), index=idx
            )
        vec = tuple(x / lab for x in rq.to_vector(nu))
        if all(x == 0 for x in vec):
            raise PolytopeError("DegenerateFacet", PolytopeErr.zero_normal(idx), index=idx)
        if vec in scaled:
            raise PolytopeError("DegenerateFacet", PolytopeErr.loose_facet(idx), index=idx)
        scaled.append(vec)

    _check_bounded(scaled, n)
    ones = [Fraction(1)] * len(scaled)
    vertices = enumerate_vertices(scaled, ones)
    if len(vertices) < n + 1 or rq.affine_rank(vertices) < n:
        raise PolytopeError("Empty", PolytopeErr.empty())

    facet_sets = _incidences(vertices, scaled, ones)
    for idx, on_facet in enumerate(facet_sets):
        if len(on_facet) < n or rq.affine_rank([vertices[i] for i in sorted(on_facet)]) != n - 1:
            raise PolytopeError("DegenerateFacet", PolytopeErr.loose_facet(idx), index=idx)

    simplices: list[tuple[int, ...]] = []
    for on_facet in facet_sets:
        simplices.extend(
            (ORIGIN,) + s for s in _pull(on_facet, n - 1, facet_sets, vertices)
        )
    logger.debug(
        "polytope with %d facets, %d vertices, %d simplices",
        len(scaled),
        len(vertices),
        len(simplices),
    )
    return LabelledPolytope(
        dim=n,
        facets=tuple(Facet(nu, Fraction(1)) for nu in scaled),
        vertices=tuple(vertices),
        facet_vertices=tuple(facet_sets),
        triangulation=tuple(simplices),
    )


def _hull_facet_sets(points: Sequence[RationalVector], n: int) -> list[list[int]]:
    """Index sets spanning the hull facets, from scipy's Qhull."""
    if n == 1:
        values = [p[0] for p in points]
        return [[values.index(min(values))], [values.index(max(values))]]
    try:
        hull = ConvexHull(np.array([[float(x) for x in p] for p in points]))
    except QhullError as e:
        raise PolytopeError(
            "LowerDimensional", PolytopeErr.lower_dimensional(n - 1, n)
        ) from e
    return [list(map(int, s)) for s in hull.simplices]


def from_vertices(points: Sequence[Sequence[Any]]) -> LabelledPolytope:
    """Build a polytope as the convex hull of points.

    The hull is found with Qhull. Each hull facet is then recomputed exactly as
    the hyperplane <nu, x> = 1 through its vertices, so round-off in Qhull never
    reaches the result.

    Raises:
        PolytopeError: `LowerDimensional` if the points do not span R^n,
            `OriginNotInterior` if 0 is not strictly inside the hull
    """
    if not points:
        raise PolytopeError("Empty", PolytopeErr.empty())
    n = len(points[0])
    if not 1 <= n <= MAX_DIM:
        raise PolytopeError("DimensionOutOfRange", PolytopeErr.dimension_out_of_range(n))
    exact: list[RationalVector] = []
    for idx, p in enumerate(points):
        if len(p) != n:
            raise PolytopeError(
                "LowerDimensional", PolytopeErr.ragged_input(n, len(p), idx), index=idx
            )
        exact.append(rq.to_vector(p))
    hull_rank = rq.affine_rank(exact)
    if hull_rank < n:
        raise PolytopeError("LowerDimensional", PolytopeErr.lower_dimensional(hull_rank, n))

    normals: list[RationalVector] = []
    for ids in _hull_facet_sets(exact, n):
        nu = rq.solve([exact[i] for i in ids], [Fraction(1)] * n)
        if nu is None:
            # the facet hyperplane passes through the origin
            raise PolytopeError("OriginNotInterior", PolytopeErr.origin_not_interior())
        if any(rq.dot(nu, p) > 1 for p in exact):
            raise PolytopeError("OriginNotInterior", PolytopeErr.origin_not_interior())
        if nu not in normals:
            normals.append(nu)
    return from_facets(normals, [1] * len(normals))


def builtin(name: str) -> LabelledPolytope:
    """Load a builtin polytope and check that it is reflexive.

    Raises:
        PolytopeError: `UnknownBuiltin` or `NotReflexive`
    """
    if name not in BUILTIN_VERTICES:
        raise PolytopeError(
            "UnknownBuiltin", PolytopeErr.unknown_builtin(name, sorted(BUILTIN_VERTICES))
        )
    poly = from_vertices(BUILTIN_VERTICES[name])
    if not poly.is_reflexive:
        raise PolytopeError("NotReflexive", PolytopeErr.not_reflexive(name))
    return poly


def support_min(poly: LabelledPolytope, a: Sequence[Any]) -> Fraction | float:
    """min over P of <a, x>, attained at a vertex.

    Exact (a Fraction) when `a` holds ints or Fractions, float otherwise.
    """
    if len(a) != poly.dim:
        raise PolytopeError("WrongDimension", PolytopeErr.wrong_dimension(poly.dim, len(a)))
    if all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in a):
        vec = rq.to_vector(a)
        return min(rq.dot(vec, v) for v in poly.vertices)
    return float(np.min(poly.vertex_array @ np.asarray(a, dtype=float)))


def triangulate(poly: LabelledPolytope) -> list[list[RationalVector]]:
    """Star triangulation from the origin, as lists of n+1 exact points."""
    return poly.simplex_points()


def clip(
    poly: LabelledPolytope,
    normals: Iterable[Sequence[Any]],
    offsets: Iterable[Any],
) -> Cell | None:
    """P intersected with extra half-spaces {<normal, x> <= offset}.

    Returns:
        the cell with a pulling triangulation, or None when the intersection is
        not full-dimensional
    """
    all_normals = list(poly.normals) + [rq.to_vector(nu) for nu in normals]
    all_offsets = [Fraction(1)] * len(poly.facets) + [rq.to_fraction(b) for b in offsets]
    vertices = enumerate_vertices(all_normals, all_offsets)
    n = poly.dim
    if len(vertices) < n + 1 or rq.affine_rank(vertices) < n:
        return None
    facet_sets = _incidences(vertices, all_normals, all_offsets)
    simplices = _pull(frozenset(range(len(vertices))), n, facet_sets, vertices)
    return Cell(tuple(vertices), tuple(simplices))


def lattice_points(
    poly: LabelledPolytope, m: int, *, cap: int = LATTICE_POINT_CAP
) -> IntArray:
    """All u in mP with integer coordinates, in lexicographic order.

    The facet inequalities are cleared of denominators so membership is decided
    with exact integer arithmetic.

    Raises:
        SchemaError: `SchemaViolation` if m is not positive
        PolytopeError: `OverflowGuard` if more than `cap` points are found
    """
    if m < 1:
        raise SchemaError("SchemaViolation", SchemaErr.not_positive("m", m), pointer="/m")
    n = poly.dim
    int_normals = []
    bounds = []
    for nu in poly.normals:
        scale = rq.common_denominator(nu)
        int_normals.append([int(x * scale) for x in nu])
        bounds.append(scale * m)
    a_mat = np.array(int_normals, dtype=np.int64)
    b_vec = np.array(bounds, dtype=np.int64)

    lo = [floor(min(v[j] for v in poly.vertices) * m) for j in range(n)]
    hi = [ceil(max(v[j] for v in poly.vertices) * m) for j in range(n)]
    chunks: list[np.ndarray] = []
    count = 0
    rest = [np.arange(lo[j], hi[j] + 1, dtype=np.int64) for j in range(1, n)]
    for first in range(lo[0], hi[0] + 1):
        if rest:
            grids = np.meshgrid(*rest, indexing="ij")
            tail = np.stack([g.ravel() for g in grids], axis=1)
            block = np.hstack([np.full((tail.shape[0], 1), first, dtype=np.int64), tail])
        else:
            block = np.array([[first]], dtype=np.int64)
        keep = block[np.all(block @ a_mat.T <= b_vec, axis=1)]
        count += keep.shape[0]
        if count > cap:
            raise PolytopeError(
                "OverflowGuard", PolytopeErr.too_many_lattice_points(cap)
            )
        chunks.append(keep)
    return np.vstack(chunks) if chunks else np.zeros((0, n), dtype=np.int64)


