"""Weighted volume, Duistermaat-Heckman marginals, Futaki invariant and solitons.

Everything here is an integral over the moment polytope: the Duistermaat-Heckman
measure of a toric manifold is Lebesgue measure on P, so the weighted volume is
V_g = n! int_P g dx and the Futaki invariant is read off the weighted barycenter.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, Literal

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import rational as rq
from .consts import BARYCENTER_TOL, KR_MAX_ITER, KR_TOL
from .core import FloatArray, PolytopeError, RationalVector, SolverError
from .err_msg import PolytopeErr, SolverErr
from .polytope import LabelledPolytope, enumerate_vertices
from .quadrature import (
    WeightFunction,
    integrate,
    integrate_exact,
    moments_upto_two,
    unit,
)

logger = logging.getLogger(__name__)

SolitonKind = Literal["kr", "mabuchi"]


@dataclass(frozen=True)
class SolitonSolution:
    """Result of a soliton solve.

    Attributes:
        kind: `"kr"` for Kahler-Ricci solitons, `"mabuchi"` for Mabuchi solitons
        vector: the soliton vector field xi (kr) or the affine slope b (mabuchi)
        weight: the induced weight, exp(<xi, x>) or 1 + <b, x>
        residual: sup norm of the weighted barycenter of `weight`
        feasible: whether the weight is positive on P
        iterations: Newton iterations (0 for the linear Mabuchi solve)
        exact: the rational slope b of a Mabuchi soliton
    """

    kind: SolitonKind
    vector: tuple[float, ...]
    weight: WeightFunction
    residual: float
    feasible: bool
    iterations: int = 0
    exact: RationalVector | None = None

    @property
    def xi(self) -> tuple[float, ...]:
        """Soliton vector field of a Kahler-Ricci soliton."""
        return self.vector

    @property
    def b(self) -> tuple[float, ...]:
        """Affine slope of a Mabuchi soliton."""
        return self.vector


def weighted_volume(poly: LabelledPolytope, weight: WeightFunction, **kwargs: Any) -> float:
    """V_g = n! int_P g dx."""
    return factorial(poly.dim) * integrate(poly, weight, **kwargs).value


def _slice_volume(points: list[RationalVector], dim: int) -> float:
    if dim == 1:
        values = [p[0] for p in points]
        return float(max(values) - min(values))
    if len(points) < dim + 1 or rq.affine_rank(points) < dim:
        return 0.0
    try:
        return float(ConvexHull(np.array([[float(x) for x in p] for p in points])).volume)
    except QhullError:
        return 0.0


def dh_marginal(poly: LabelledPolytope, a: Sequence[Any], t: Any) -> float:
    """Density at t of the pushforward of Lebesgue measure on P under <a, .>.

    The slice {<a, x> = t} is parametrized by the coordinates other than the one
    where |a_k| is largest, so the density is the volume of the projected slice
    divided by |a_k|. For n = 1 the slice is a point and the density is 1/|a|.

    Raises:
        PolytopeError: `ZeroVector`
    """
    vec = rq.to_vector(a)
    if len(vec) != poly.dim:
        raise PolytopeError("WrongDimension", PolytopeErr.wrong_dimension(poly.dim, len(vec)))
    if all(x == 0 for x in vec):
        raise PolytopeError("ZeroVector", PolytopeErr.zero_vector())
    level = rq.to_fraction(t)
    k = max(range(poly.dim), key=lambda i: abs(vec[i]))
    rest = [j for j in range(poly.dim) if j != k]
    # x_k = (t - sum_{j != k} a_j x_j) / a_k substituted into <nu, x> <= 1
    normals = [
        tuple(nu[j] - nu[k] * vec[j] / vec[k] for j in rest) for nu in poly.normals
    ]
    offsets = [1 - nu[k] * level / vec[k] for nu in poly.normals]
    if not rest:
        if all(b >= 0 for b in offsets):
            return float(1 / abs(vec[k]))
        return 0.0
    points = enumerate_vertices(normals, offsets)
    if not points:
        return 0.0
    return _slice_volume(points, len(rest)) / float(abs(vec[k]))


def weighted_barycenter(
    poly: LabelledPolytope, weight: WeightFunction, **kwargs: Any
) -> FloatArray:
    """b_g = int_P x g dx / int_P g dx."""
    mass = integrate(poly, weight, **kwargs).value
    return np.array(
        [integrate(poly, weight, unit(poly.dim, i), **kwargs).value / mass for i in range(poly.dim)]
    )


def futaki(
    poly: LabelledPolytope, weight: WeightFunction, xi: Sequence[float], **kwargs: Any
) -> float:
    """Fut_g(xi) = -<xi, b_g>."""
    bary = weighted_barycenter(poly, weight, **kwargs)
    return -float(np.dot(np.asarray(xi, dtype=float), bary))


def kr_objective(
    poly: LabelledPolytope, xi: Sequence[float]
) -> tuple[float, FloatArray, FloatArray]:
    """W(xi) = int_P exp(<xi, x>) dx with its gradient and Hessian.

    Returns:
        W, the first moments of exp(<xi, x>) dx and its second moment matrix
    """
    weight = WeightFunction.exp_affine(0, [float(x) for x in xi])
    return moments_upto_two(poly, weight)


def solve_kr_soliton(
    poly: LabelledPolytope,
    *,
    tol: float = KR_TOL,
    max_iter: int = KR_MAX_ITER,
) -> SolitonSolution:
    """Minimize W(xi) = int_P exp(<xi, x>) dx by Newton's method.

    W is strictly convex and proper because 0 is interior to P, so its unique
    critical point xi* makes the barycenter of exp(<xi*, x>) dx vanish.

    Raises:
        SolverError: `MaxIterations`
    """
    xi = np.zeros(poly.dim)
    value, grad, hess = kr_objective(poly, xi)
    for iteration in range(max_iter + 1):
        rel = float(np.linalg.norm(grad)) / value
        logger.debug("kr newton %d: |grad W| / W = %.3e", iteration, rel)
        if rel < tol:
            weight = WeightFunction.exp_affine(0, [float(x) for x in xi])
            residual = float(np.max(np.abs(grad))) / value
            return SolitonSolution(
                kind="kr",
                vector=tuple(float(x) for x in xi),
                weight=weight,
                residual=residual,
                feasible=True,
                iterations=iteration,
            )
        if iteration == max_iter:
            break
        step = -np.linalg.solve(hess, grad)
        slope = float(np.dot(grad, step))
        damping = 1.0
        while True:
            candidate = xi + damping * step
            cand_value, cand_grad, cand_hess = kr_objective(poly, candidate)
            if cand_value <= value + 1e-4 * damping * slope + 1e-15 * value:
                break
            damping /= 2
            if damping < 1e-12:
                break
        xi, value, grad, hess = candidate, cand_value, cand_grad, cand_hess
    raise SolverError(
        "MaxIterations",
        SolverErr.max_iterations(max_iter, float(np.linalg.norm(grad)) / value),
    )


def solve_mabuchi_soliton(poly: LabelledPolytope) -> SolitonSolution:
    """Affine weight g = 1 + <b, x> with vanishing weighted barycenter.

    Solves M b = -beta exactly, M_ij = int_P x_i x_j dx, beta_i = int_P x_i dx. The
    weight is a Mabuchi soliton when it is positive on P, which is decided
    exactly at the vertices.

    Raises:
        SolverError: `SingularMomentMatrix`
    """
    n = poly.dim
    one = WeightFunction.constant(1, n)
    second = [
        [integrate_exact(poly, one, tuple(int(t == i) + int(t == j) for t in range(n))) for j in range(n)]
        for i in range(n)
    ]
    first = [integrate_exact(poly, one, unit(n, i)) for i in range(n)]
    b = rq.solve(second, [-x for x in first])
    if b is None:
        raise SolverError("SingularMomentMatrix", SolverErr.singular_moment_matrix())
    weight = WeightFunction.affine(1, b)
    mass = integrate_exact(poly, weight)
    residual = max(abs(integrate_exact(poly, weight, unit(n, i)) / mass) for i in range(n))
    feasible = all(1 + rq.dot(b, v) > 0 for v in poly.vertices)
    if not feasible:
        logger.info("Mabuchi weight 1 + <b, x> is not positive on P, no Mabuchi soliton")
    return SolitonSolution(
        kind="mabuchi",
        vector=tuple(float(x) for x in b),
        weight=weight,
        residual=float(residual),
        feasible=feasible,
        exact=b,
    )


def soliton_weight(solution: SolitonSolution) -> WeightFunction:
    """The weight g induced by a soliton solve."""
    return solution.weight


def barycenter_vanishes(
    poly: LabelledPolytope, weight: WeightFunction, tol: float = BARYCENTER_TOL
) -> bool:
    """Toric existence criterion: the weighted barycenter is 0."""
    return float(np.linalg.norm(weighted_barycenter(poly, weight))) < tol


def exact_barycenter(poly: LabelledPolytope, weight: WeightFunction) -> RationalVector:
    """Rational weighted barycenter for polynomial weights."""
    mass = integrate_exact(poly, weight)
    return tuple(
        Fraction(integrate_exact(poly, weight, unit(poly.dim, i)) / mass)
        for i in range(poly.dim)
    )
