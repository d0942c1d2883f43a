"""Weight functions on a polytope and their integrals.

Integrals are computed simplex by simplex over a triangulation:

* polynomial weights (constant, affine, polynomial) use the Dirichlet formula
  in barycentric coordinates, exactly in rational arithmetic;
* exp-affine weights use the Hermite-Genocchi formula, which turns every
  moment into a (confluent) divided difference of exp. Those are read off the
  exponential of a bidiagonal matrix, which stays accurate when exponents
  coincide;
* any weight can also be integrated with adaptive Grundmann-Moller
  quadrature, used as an independent cross-check.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, product
from math import factorial, fsum
from typing import Any, Literal, Protocol

import numpy as np
from scipy.linalg import expm
from scipy.special import roots_legendre

from . import rational as rq
from .consts import (
    GM_DEGREE,
    GM_MAX_DEPTH,
    GM_TOL,
    POSITIVITY_MARGIN,
    POSITIVITY_SAMPLES,
)
from .core import Estimate, FloatArray, QuadratureError, RationalVector, WeightError
from .err_msg import QuadratureErr, WeightErr
from .polytope import simplex_volume

logger = logging.getLogger(__name__)

WeightKind = Literal["constant", "affine", "exp_affine", "polynomial"]
Method = Literal["auto", "exact", "quadrature"]
Powers = tuple[int, ...]
PolyCoeffs = dict[Powers, Fraction]
"""Polynomial as a map from exponent tuples to coefficients."""


class Region(Protocol):  # pylint: disable=R0903
    """Anything that exposes a triangulation, i.e. polytopes and cells."""

    def simplex_points(self) -> list[list[RationalVector]]:
        """Exact vertices of every simplex."""


class WeightBounds(Protocol):  # pylint: disable=R0903
    """Polytope data needed for positivity checks."""

    dim: int
    vertices: tuple[RationalVector, ...]


def _poly_mul(p: PolyCoeffs, q: PolyCoeffs) -> PolyCoeffs:
    out: PolyCoeffs = {}
    for (kp, cp), (kq, cq) in product(p.items(), q.items()):
        key = tuple(x + y for x, y in zip(kp, kq))
        out[key] = out.get(key, Fraction(0)) + cp * cq
    return {k: c for k, c in out.items() if c != 0}


def _poly_pow(p: PolyCoeffs, k: int, nvars: int) -> PolyCoeffs:
    out: PolyCoeffs = {(0,) * nvars: Fraction(1)}
    for _ in range(k):
        out = _poly_mul(out, p)
    return out


def compose_linear(
    coeffs: PolyCoeffs, rows: Sequence[Sequence[Fraction]], nvars: int
) -> PolyCoeffs:
    """Substitute x_j = sum_i rows[i][j] * y_i into a polynomial in x.

    Args:
        coeffs: polynomial in x
        rows: `rows[i][j]` is the coefficient of y_i in x_j
        nvars: number of y variables

    Returns:
        the polynomial in y
    """
    linear_forms: list[PolyCoeffs] = []
    for j in range(len(rows[0]) if rows else 0):
        form: PolyCoeffs = {}
        for i, row in enumerate(rows):
            if row[j] != 0:
                key = tuple(1 if t == i else 0 for t in range(nvars))
                form[key] = Fraction(row[j])
        linear_forms.append(form)
    out: PolyCoeffs = {}
    for powers, c in coeffs.items():
        term: PolyCoeffs = {(0,) * nvars: c}
        for form, k in zip(linear_forms, powers):
            if k:
                term = _poly_mul(term, _poly_pow(form, k, nvars))
        for key, val in term.items():
            out[key] = out.get(key, Fraction(0)) + val
    return {k: c for k, c in out.items() if c != 0}


@dataclass(frozen=True)
class WeightFunction:
    """Positive weight g on a polytope.

    Attributes:
        kind: one of constant, affine, exp_affine, polynomial
        dim: dimension of the ambient space
        a0: constant term (the constant itself for `constant`)
        b: linear coefficients for affine and exp_affine
        coeffs: `(powers, c)` pairs for polynomial weights

    `g(x)` is `a0`, `a0 + <b, x>`, `exp(a0 + <b, x>)` or `sum c x^powers`.
    """

    kind: WeightKind
    dim: int
    a0: Fraction = Fraction(0)
    b: RationalVector = ()
    coeffs: tuple[tuple[Powers, Fraction], ...] = ()

    @classmethod
    def constant(cls, c: Any, dim: int) -> "WeightFunction":
        """g = c."""
        return cls("constant", dim, a0=rq.to_fraction(c), b=(Fraction(0),) * dim)

    @classmethod
    def affine(cls, a0: Any, b: Sequence[Any]) -> "WeightFunction":
        """g = a0 + <b, x>."""
        return cls("affine", len(b), a0=rq.to_fraction(a0), b=rq.to_vector(b))

    @classmethod
    def exp_affine(cls, a0: Any, b: Sequence[Any]) -> "WeightFunction":
        """g = exp(a0 + <b, x>)."""
        return cls("exp_affine", len(b), a0=rq.to_fraction(a0), b=rq.to_vector(b))

    @classmethod
    def polynomial(
        cls, coeffs: Iterable[tuple[Sequence[int], Any]], dim: int
    ) -> "WeightFunction":
        """g = sum c x^powers."""
        merged: PolyCoeffs = {}
        for powers, c in coeffs:
            key = tuple(int(k) for k in powers)
            if len(key) != dim or any(k < 0 for k in key):
                raise WeightError(
                    "SchemaViolation", WeightErr.missing_param("polynomial", "powers")
                )
            merged[key] = merged.get(key, Fraction(0)) + rq.to_fraction(c)
        items = tuple(sorted((k, c) for k, c in merged.items() if c != 0))
        return cls("polynomial", dim, coeffs=items)

    @property
    def is_polynomial(self) -> bool:
        """True for the kinds integrated by the exact Dirichlet formula."""
        return self.kind != "exp_affine"

    @cached_property
    def poly(self) -> PolyCoeffs:
        """Coefficients of g as a polynomial (not defined for exp_affine)."""
        if self.kind == "exp_affine":
            raise TypeError("exp_affine weights are not polynomials")
        if self.kind == "polynomial":
            return dict(self.coeffs)
        out: PolyCoeffs = {}
        if self.a0 != 0:
            out[(0,) * self.dim] = self.a0
        if self.kind == "affine":
            for i, bi in enumerate(self.b):
                if bi != 0:
                    out[tuple(1 if j == i else 0 for j in range(self.dim))] = bi
        return out

    def _points(self, x: Any) -> FloatArray:
        pts = np.asarray(x, dtype=float)
        if pts.ndim <= 1:
            return pts.reshape(-1, 1) if self.dim == 1 else pts.reshape(1, -1)
        return pts

    @cached_property
    def _b_float(self) -> FloatArray:
        return np.array([float(x) for x in self.b]) if self.b else np.zeros(self.dim)

    def __call__(self, x: Any) -> FloatArray:
        """Evaluate g at points of shape (k, n), a single point, or 1D samples."""
        pts = self._points(x)
        if self.kind == "constant":
            out = np.full(pts.shape[0], float(self.a0))
        elif self.kind == "affine":
            out = float(self.a0) + pts @ self._b_float
        elif self.kind == "exp_affine":
            out = np.exp(float(self.a0) + pts @ self._b_float)
        else:
            out = np.zeros(pts.shape[0])
            for powers, c in self.coeffs:
                out = out + float(c) * np.prod(pts ** np.array(powers), axis=1)
        return out

    def gradient(self, x: Any) -> FloatArray:
        """Gradient of g at points of shape (k, n), shape (k, n)."""
        pts = self._points(x)
        if self.kind in ("constant", "affine"):
            return np.tile(self._b_float, (pts.shape[0], 1))
        if self.kind == "exp_affine":
            return self(pts)[:, None] * self._b_float[None, :]
        grad = np.zeros_like(pts)
        for powers, c in self.coeffs:
            for j, k in enumerate(powers):
                if k == 0:
                    continue
                lowered = np.array(powers)
                lowered[j] -= 1
                grad[:, j] += float(c) * k * np.prod(pts**lowered, axis=1)
        return grad

    def log_gradient(self, x: Any) -> FloatArray:
        """Gradient of f = log g."""
        return self.gradient(x) / self(x)[:, None]

    def check_positive(self, poly: WeightBounds) -> tuple[float, float]:
        """Certify g > 0 on the polytope and return (min_P g, max_P g).

        Constant, affine and exp-affine weights are checked at the vertices, exactly
        for affine weights. Polynomial weights are sampled on a grid of rational
        points of P and must clear a relative margin.

        Raises:
            WeightError: `PositivityViolated`
        """
        if self.kind == "constant":
            if self.a0 <= 0:
                raise WeightError(
                    "PositivityViolated", WeightErr.not_positive(float(self.a0), "P")
                )
            return float(self.a0), float(self.a0)
        if self.kind == "affine":
            values = [self.a0 + rq.dot(self.b, v) for v in poly.vertices]
            for v, val in zip(poly.vertices, values):
                if val <= 0:
                    raise WeightError(
                        "PositivityViolated",
                        WeightErr.not_positive(float(val), str([str(x) for x in v])),
                    )
            return float(min(values)), float(max(values))
        if self.kind == "exp_affine":
            exps = [float(self.a0 + rq.dot(self.b, v)) for v in poly.vertices]
            return float(np.exp(min(exps))), float(np.exp(max(exps)))
        samples = _positivity_samples(poly)
        values = self(samples)
        scale = max(float(np.max(np.abs(values))), 1.0)
        worst = int(np.argmin(values))
        if values[worst] <= POSITIVITY_MARGIN * scale:
            raise WeightError(
                "PositivityViolated",
                WeightErr.not_positive(float(values[worst]), str(samples[worst].tolist())),
            )
        return float(np.min(values)), float(np.max(values))

    def transform(self, matrix: Sequence[Sequence[int]]) -> "WeightFunction":
        """The weight y -> g(U^{-1} y) living on U(P)."""
        n = self.dim
        u_mat = [[Fraction(x) for x in row] for row in matrix]
        inv_cols = [rq.solve(u_mat, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
        # inverse[i][j] = inv_cols[j][i]
        inverse = [[inv_cols[j][i] for j in range(n)] for i in range(n)]  # type: ignore[index]
        if self.kind in ("constant", "affine", "exp_affine"):
            # <b, U^{-1} y> = <U^{-T} b, y>
            new_b = tuple(rq.dot([inverse[i][j] for i in range(n)], self.b) for j in range(n))
            return WeightFunction(self.kind, n, a0=self.a0, b=new_b)
        # x_j = sum_i inverse[j][i] y_i, so rows[i][j] = inverse[j][i]
        rows = [[inverse[j][i] for j in range(n)] for i in range(n)]
        composed = compose_linear(self.poly, rows, n)
        return WeightFunction.polynomial(composed.items(), n)

    def interval_increment(self, lo: FloatArray, hi: FloatArray) -> FloatArray:
        """int_lo^hi g(y) dy for 1D weights, vectorized and cancellation free."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        width = hi - lo
        if self.kind == "constant":
            return float(self.a0) * width
        if self.kind == "affine":
            return width * (float(self.a0) + float(self.b[0]) * 0.5 * (lo + hi))
        if self.kind == "exp_affine":
            beta = float(self.b[0])
            base = np.exp(float(self.a0) + beta * lo)
            if beta == 0.0:
                return base * width
            return base * np.expm1(beta * width) / beta
        nodes, weights = _legendre(8)
        mid = 0.5 * (lo + hi)
        half = 0.5 * width
        pts = mid[..., None] + half[..., None] * nodes
        vals = self(pts.reshape(-1, 1)).reshape(pts.shape)
        return half * np.sum(vals * weights, axis=-1)

    def interval_moments(self, lo: FloatArray, hi: FloatArray, k: int) -> FloatArray:
        """int_lo^hi y^k g(y) dy for 1D weights by 8-point Gauss-Legendre per interval."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        nodes, weights = _legendre(8)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        pts = mid[..., None] + half[..., None] * nodes
        vals = self(pts.reshape(-1, 1)).reshape(pts.shape) * pts**k
        return half * np.sum(vals * weights, axis=-1)


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[FloatArray, FloatArray]:
    nodes, weights = roots_legendre(order)
    return np.asarray(nodes), np.asarray(weights)


def _positivity_samples(poly: WeightBounds) -> FloatArray:
    """Vertices plus a barycentric grid on each simplex of the vertex fan."""
    verts = np.array([[float(x) for x in v] for v in poly.vertices])
    level = max(2, POSITIVITY_SAMPLES // poly.dim)
    # convex combinations of vertices with weights on a simplex grid
    samples = [verts]
    nverts = verts.shape[0]
    for size in range(2, min(nverts, poly.dim + 1) + 1):
        for subset in combinations(range(nverts), size):
            for comp in _compositions(level, size):
                lam = np.array(comp, dtype=float) / level
                samples.append((lam @ verts[list(subset)])[None, :])
    return np.vstack(samples)


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> tuple[tuple[int, ...], ...]:
    """All tuples of `parts` non-negative ints summing to `total`."""
    if parts == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return tuple(out)


def _barycentric_expansion(
    points: Sequence[RationalVector], poly: PolyCoeffs
) -> PolyCoeffs:
    """Rewrite a polynomial in x as a polynomial in barycentric coordinates."""
    n = len(points[0])
    rows = [[Fraction(p[j]) for j in range(n)] for p in points]
    return compose_linear(poly, rows, len(points))


def _dirichlet(k: Powers, n: int) -> Fraction:
    """int over the standard n-simplex of lambda^k, times n! (i.e. per unit volume)."""
    numerator = 1
    for ki in k:
        numerator *= factorial(ki)
    return Fraction(numerator * factorial(n), factorial(sum(k) + n))


def simplex_poly_integral(
    points: Sequence[RationalVector], poly: PolyCoeffs, volume: Fraction
) -> Fraction:
    """Exact integral of a polynomial over a simplex."""
    n = len(points) - 1
    bary = _barycentric_expansion(points, poly)
    return volume * sum((c * _dirichlet(k, n) for k, c in bary.items()), Fraction(0))


def divided_difference_exp(nodes: Sequence[float]) -> float:
    """exp[t_1, ..., t_m], including repeated nodes.

    Read off the top-right entry of the exponential of the bidiagonal matrix with
    the nodes on the diagonal and ones above it.
    """
    t = np.asarray(nodes, dtype=float)
    shift = float(np.max(t))
    size = t.size
    mat = np.diag(t - shift) + np.diag(np.ones(size - 1), k=1)
    return float(np.exp(shift) * expm(mat)[0, size - 1])


def simplex_exp_integral(
    points: Sequence[RationalVector],
    a0: float,
    b: FloatArray,
    poly: PolyCoeffs,
    volume: float,
) -> tuple[float, float]:
    """int over a simplex of p(x) exp(a0 + <b, x>).

    Uses int_simplex lambda^k exp(<z, lambda>) = n! vol k! exp[z_i repeated k_i+1
    times], with z_i = <b, v_i>.

    Returns:
        the value and a round-off error estimate
    """
    n = len(points) - 1
    pts = np.array([[float(x) for x in p] for p in points])
    z = pts @ b
    bary = _barycentric_expansion(points, poly)
    terms = []
    for k, c in bary.items():
        nodes = [zi for zi, ki in zip(z, k) for _ in range(ki + 1)]
        kfact = 1
        for ki in k:
            kfact *= factorial(ki)
        terms.append(float(c) * kfact * divided_difference_exp(nodes))
    scale = factorial(n) * volume * float(np.exp(a0))
    value = scale * fsum(terms)
    error = 64 * np.finfo(float).eps * scale * fsum(abs(t) for t in terms)
    return value, error


@lru_cache(maxsize=None)
def grundmann_moller(n: int, degree: int) -> tuple[FloatArray, FloatArray]:
    """Grundmann-Moller rule on the standard n-simplex.

    Returns:
        barycentric points of shape (k, n+1) and weights summing to 1/n!
    """
    if degree < 1 or degree % 2 == 0:
        raise QuadratureError("BadDegree", QuadratureErr.bad_degree(degree))
    s = (degree - 1) // 2
    points: list[list[float]] = []
    weights: list[float] = []
    for i in range(s + 1):
        denom = degree + n - 2 * i
        w = (-1) ** i * 2.0 ** (-2 * s) * denom**degree / (
            factorial(i) * factorial(degree + n - i)
        )
        for beta in _compositions(s - i, n + 1):
            points.append([(2 * bj + 1) / denom for bj in beta])
            weights.append(w)
    return np.array(points), np.array(weights)


def _gm_simplex(
    func: Any, verts: FloatArray, degree: int
) -> float:
    n = verts.shape[1]
    bary, weights = grundmann_moller(n, degree)
    vol = abs(np.linalg.det(verts[1:] - verts[0])) / factorial(n)
    return float(factorial(n) * vol * np.dot(weights, func(bary @ verts)))


def _split(verts: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Bisect a simplex through the midpoint of its longest edge."""
    best, pair = -1.0, (0, 1)
    for i, j in combinations(range(verts.shape[0]), 2):
        length = float(np.sum((verts[i] - verts[j]) ** 2))
        if length > best:
            best, pair = length, (i, j)
    mid = 0.5 * (verts[pair[0]] + verts[pair[1]])
    left, right = verts.copy(), verts.copy()
    left[pair[0]] = mid
    right[pair[1]] = mid
    return left, right


def adaptive_simplex(
    func: Any,
    verts: FloatArray,
    *,
    degree: int = GM_DEGREE,
    tol: float = GM_TOL,
    max_depth: int = GM_MAX_DEPTH,
) -> Estimate:
    """Adaptive Grundmann-Moller quadrature with longest-edge bisection.

    The coarse rule is compared against one refinement level; simplices that miss
    `tol` are split again until `max_depth`.

    Raises:
        QuadratureError: `QuadratureNotConverged`
    """
    stack = [(verts, tol, 0, _gm_simplex(func, verts, degree))]
    total: list[float] = []
    error: list[float] = []
    while stack:
        current, budget, depth, coarse = stack.pop()
        left, right = _split(current)
        q_left = _gm_simplex(func, left, degree)
        q_right = _gm_simplex(func, right, degree)
        diff = abs(q_left + q_right - coarse)
        if diff <= budget:
            total.append(q_left + q_right)
            error.append(diff)
            continue
        if depth >= max_depth:
            raise QuadratureError(
                "QuadratureNotConverged", QuadratureErr.not_converged(diff, budget)
            )
        logger.debug("refining simplex at depth %d (diff %.3e)", depth + 1, diff)
        stack.append((right, budget / 2, depth + 1, q_right))
        stack.append((left, budget / 2, depth + 1, q_left))
    return Estimate(fsum(total), fsum(error))


def _monomial(powers: Powers) -> PolyCoeffs:
    return {tuple(powers): Fraction(1)}


def _integrand(weight: WeightFunction, powers: Powers) -> Any:
    exps = np.array(powers)

    def func(x: FloatArray) -> FloatArray:
        return weight(x) * np.prod(x**exps, axis=1)

    return func


def _simplex_volumes(simplices: list[list[RationalVector]]) -> list[Fraction]:
    return [simplex_volume(s) for s in simplices]


def integrate_exact(
    region: Region, weight: WeightFunction, powers: Powers | None = None
) -> Fraction:
    """Exact rational integral of x^powers * g for polynomial weights."""
    simplices = region.simplex_points()
    n = len(simplices[0][0])
    powers = powers or (0,) * n
    integrand = _poly_mul(weight.poly, _monomial(powers))
    return sum(
        (
            simplex_poly_integral(s, integrand, vol)
            for s, vol in zip(simplices, _simplex_volumes(simplices))
        ),
        Fraction(0),
    )


def integrate(
    region: Region,
    weight: WeightFunction,
    powers: Sequence[int] | None = None,
    *,
    method: Method = "auto",
    tol: float = GM_TOL,
    degree: int = GM_DEGREE,
) -> Estimate:
    """int over the region of x^powers * g(x) dx.

    Args:
        region: a polytope or a cell
        weight: the weight g
        powers: multi-index of the monomial factor, default 0
        method: `"exact"` (closed forms), `"quadrature"` (adaptive Grundmann-Moller)
            or `"auto"` (closed forms)
        tol: absolute tolerance per simplex for the quadrature path
        degree: Grundmann-Moller degree

    Returns:
        value and error estimate

    Raises:
        QuadratureError: `QuadratureNotConverged`
    """
    simplices = region.simplex_points()
    n = len(simplices[0][0])
    exps: Powers = tuple(powers) if powers is not None else (0,) * n
    if method == "quadrature":
        func = _integrand(weight, exps)
        parts = [
            adaptive_simplex(
                func,
                np.array([[float(x) for x in p] for p in s]),
                degree=degree,
                tol=tol,
            )
            for s in simplices
        ]
        return Estimate(fsum(p.value for p in parts), fsum(p.error for p in parts))
    if weight.is_polynomial:
        return Estimate(float(integrate_exact(region, weight, exps)), 0.0)
    volumes = _simplex_volumes(simplices)
    a0 = float(weight.a0)
    b = np.array([float(x) for x in weight.b])
    parts_exp = [
        simplex_exp_integral(s, a0, b, _monomial(exps), float(vol))
        for s, vol in zip(simplices, volumes)
    ]
    return Estimate(fsum(p[0] for p in parts_exp), fsum(p[1] for p in parts_exp))


def moment(
    region: Region, weight: WeightFunction, alpha: Sequence[int], **kwargs: Any
) -> float:
    """int over the region of x^alpha g(x) dx."""
    return integrate(region, weight, alpha, **kwargs).value


def unit(n: int, i: int, k: int = 1) -> Powers:
    """Multi-index k * e_i."""
    return tuple(k if j == i else 0 for j in range(n))


def moments_upto_two(
    region: Region, weight: WeightFunction, **kwargs: Any
) -> tuple[float, FloatArray, FloatArray]:
    """Mass, first moments and second moment matrix of g dx over the region."""
    simplices = region.simplex_points()
    n = len(simplices[0][0])
    mass = integrate(region, weight, (0,) * n, **kwargs).value
    first = np.array([integrate(region, weight, unit(n, i), **kwargs).value for i in range(n)])
    second = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            powers = tuple(int(t == i) + int(t == j) for t in range(n))
            second[i, j] = second[j, i] = integrate(region, weight, powers, **kwargs).value
    return mass, first, second

