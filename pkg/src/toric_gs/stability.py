"""Valuative and non-Archimedean stability data on the moment polytope.

A toric valuation is a vector a in R^n. With every facet label equal to one its
log discrepancy is A(a) = -min_P <a, .>, and the g-weighted expected vanishing
order is S_g(a) = A(a) + <a, b_g>. Toric test configurations are rational
piecewise linear convex functions on P; their finite-m filtrations are computed
exactly from the lattice points of mP.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import rational as rq
from .consts import BARYCENTER_TOL, DEFAULT_SEED, DELTA_STARTS, DELTA_TOL, LATTICE_POINT_CAP
from .core import FloatArray, IntArray, PolytopeError, RationalVector
from .err_msg import PolytopeErr, SolverErr
from .invariants import weighted_barycenter
from .polytope import Cell, LabelledPolytope, clip, lattice_points, support_min
from .quadrature import WeightFunction, integrate, unit

logger = logging.getLogger(__name__)

Piece = tuple[RationalVector, Fraction]
"""Affine function x -> <a, x> + c."""


def _direction(poly: LabelledPolytope, a: Sequence[Any]) -> Sequence[Any]:
    if len(a) != poly.dim:
        raise PolytopeError("WrongDimension", PolytopeErr.wrong_dimension(poly.dim, len(a)))
    if all(x == 0 for x in a):
        raise PolytopeError("ZeroVector", PolytopeErr.zero_vector())
    return a


def log_discrepancy(poly: LabelledPolytope, a: Sequence[Any]) -> Fraction | float:
    """A(a) = -min_P <a, .>, exact for rational a.

    Raises:
        PolytopeError: `ZeroVector`
    """
    return -support_min(poly, _direction(poly, a))


def s_g(poly: LabelledPolytope, weight: WeightFunction, a: Sequence[Any]) -> float:
    """S_g(a) = int_P (<a, x> - min_P <a, .>) g dx / int_P g dx."""
    a = _direction(poly, a)
    bary = weighted_barycenter(poly, weight)
    return float(log_discrepancy(poly, a)) + float(np.dot(np.asarray(a, dtype=float), bary))


def s_g_lattice(
    poly: LabelledPolytope,
    weight: WeightFunction,
    a: Sequence[Any],
    m: int,
    *,
    cap: int = LATTICE_POINT_CAP,
) -> float:
    """Finite-m value of S_g from the lattice points u of mP.

    sum_u g(u/m) (<a, u>/m - min_P <a, .>) / sum_u g(u/m)
    """
    a = _direction(poly, a)
    pts = lattice_points(poly, m, cap=cap) / m
    weights = weight(pts)
    offsets = pts @ np.asarray(a, dtype=float) + float(log_discrepancy(poly, a))
    return float(np.dot(weights, offsets) / np.sum(weights))


@dataclass(frozen=True)
class ToricValuation:
    """The toric valuation wt_a together with its stability data."""

    a: tuple[float, ...]
    support_min: float
    log_discrepancy: float
    s_g: float

    @classmethod
    def of(
        cls, poly: LabelledPolytope, weight: WeightFunction, a: Sequence[Any]
    ) -> "ToricValuation":
        """Evaluate A and S_g for the direction a."""
        big_a = float(log_discrepancy(poly, a))
        return cls(
            a=tuple(float(x) for x in a),
            support_min=-big_a,
            log_discrepancy=big_a,
            s_g=s_g(poly, weight, a),
        )

    @property
    def ratio(self) -> float:
        """A(a) / S_g(a)."""
        return self.log_discrepancy / self.s_g

    @property
    def ding(self) -> float:
        """A(a) - S_g(a)."""
        return self.log_discrepancy - self.s_g


@dataclass(frozen=True)
class PLConvexFunction:
    """f(x) = max_j (<a_j, x> + c_j) on P, shifted so that min_P f = 0.

    Build instances with `PLConvexFunction.normalized`.
    """

    poly: LabelledPolytope
    pieces: tuple[Piece, ...]

    @classmethod
    def normalized(
        cls, poly: LabelledPolytope, pieces: Sequence[tuple[Sequence[Any], Any]]
    ) -> "PLConvexFunction":
        """Deduplicate the pieces and shift the intercepts so min_P f = 0.

        f is affine on each cell where one piece is maximal, so its minimum over P
        is attained at a cell vertex.
        """
        exact: list[Piece] = []
        for slope, intercept in pieces:
            vec = rq.to_vector(slope)
            if len(vec) != poly.dim:
                raise PolytopeError(
                    "WrongDimension", PolytopeErr.wrong_dimension(poly.dim, len(vec))
                )
            piece = (vec, rq.to_fraction(intercept))
            if piece not in exact:
                exact.append(piece)
        if not exact:
            exact.append(((Fraction(0),) * poly.dim, Fraction(0)))
        raw = cls(poly, tuple(exact))
        low = min(raw.exact_value(v) for _, cell in raw.cells() for v in cell.vertices)
        return cls(poly, tuple((s, c - low) for s, c in exact))

    def exact_value(self, x: Sequence[Fraction]) -> Fraction:
        """f at a rational point."""
        return max(rq.dot(s, x) + c for s, c in self.pieces)

    def __call__(self, x: Any) -> FloatArray:
        """f at points of shape (k, n)."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        slopes = np.array([[float(v) for v in s] for s, _ in self.pieces])
        intercepts = np.array([float(c) for _, c in self.pieces])
        return np.max(pts @ slopes.T + intercepts, axis=1)

    def cells(self) -> list[tuple[int, Cell]]:
        """The full-dimensional cells {f = <a_j, x> + c_j} of P."""
        out = []
        for j, (slope, intercept) in enumerate(self.pieces):
            normals = [rq.sub(other, slope) for other, _ in self.pieces]
            offsets = [intercept - c for _, c in self.pieces]
            kept = [(nu, b) for nu, b in zip(normals, offsets) if any(x != 0 for x in nu)]
            if any(b < 0 for nu, b in zip(normals, offsets) if all(x == 0 for x in nu)):
                continue
            cell = clip(self.poly, [nu for nu, _ in kept], [b for _, b in kept])
            if cell is not None:
                out.append((j, cell))
        return out

    def to_dict(self) -> dict[str, Any]:
        """Serialized pieces, rationals as "p/q" strings."""
        return {
            "pieces": [
                {"a": [rq.format_fraction(x) for x in s], "c": rq.format_fraction(c)}
                for s, c in self.pieces
            ]
        }


def valuation_function(poly: LabelledPolytope, a: Sequence[Any]) -> PLConvexFunction:
    """f_a(x) = <a, x> - min_P <a, .>, the PL function of the valuation wt_a."""
    vec = rq.to_vector(_direction(poly, a))
    return PLConvexFunction.normalized(poly, [(vec, 0)])


class FiltrationSample(NamedTuple):
    """Weighted successive minima of a toric filtration at level m.

    Attributes:
        m: the level
        dim: dimension n
        points: lattice points u of mP, one per row
        values: filtration values lambda_u = m f(u/m)
        weights: g(u/m)
    """

    m: int
    dim: int
    points: IntArray
    values: FloatArray
    weights: FloatArray

    @property
    def atoms(self) -> FloatArray:
        """Atom positions lambda_u / m of nu_m."""
        return self.values / self.m

    @property
    def masses(self) -> FloatArray:
        """Atom masses (n! / m^n) g(u/m)."""
        return factorial(self.dim) / self.m**self.dim * self.weights

    @property
    def total_mass(self) -> float:
        """Total mass of nu_m, an estimate of V_g."""
        return float(np.sum(self.masses))

    @property
    def barycenter(self) -> float:
        """Mean of nu_m / total mass, the finite-m value of E_g^NA."""
        return float(np.dot(self.masses, self.atoms) / self.total_mass)

    def f_m(self, lam: float) -> float:
        """(n! / m^n) sum over lambda_u >= m lam of g(u/m)."""
        return float(np.sum(self.masses[self.values >= self.m * lam]))

    def columns(self) -> dict[str, list[float]]:
        """Distinct atoms with aggregated masses, for plotting."""
        atoms, inverse = np.unique(self.atoms, return_inverse=True)
        masses = np.zeros(atoms.shape[0])
        np.add.at(masses, inverse, self.masses)
        return {"atom": atoms.tolist(), "mass": masses.tolist()}


def dh_g_filtration(
    poly: LabelledPolytope,
    weight: WeightFunction,
    f: PLConvexFunction,
    m: int,
    *,
    cap: int = LATTICE_POINT_CAP,
) -> FiltrationSample:
    """Filtration values lambda_u = m f(u/m) on the lattice points of mP."""
    pts = lattice_points(poly, m, cap=cap)
    scaled = pts / m
    return FiltrationSample(
        m=m,
        dim=poly.dim,
        points=pts,
        values=m * f(scaled),
        weights=weight(scaled),
    )


def e_g_na(poly: LabelledPolytope, weight: WeightFunction, f: PLConvexFunction) -> float:
    """E_g^NA(f) = int_P f g dx / int_P g dx, integrated cell by cell."""
    n = poly.dim
    total = 0.0
    for j, cell in f.cells():
        slope, intercept = f.pieces[j]
        total += float(intercept) * integrate(cell, weight).value
        for i in range(n):
            if slope[i] != 0:
                total += float(slope[i]) * integrate(cell, weight, unit(n, i)).value
    return total / integrate(poly, weight).value


def lambda_na(f: PLConvexFunction) -> float:
    """Lambda^NA(f) = max_P f, attained at a vertex of P."""
    return float(max(f.exact_value(v) for v in f.poly.vertices))


def j_g_na(poly: LabelledPolytope, weight: WeightFunction, f: PLConvexFunction) -> float:
    """J_g^NA(f) = Lambda^NA(f) - E_g^NA(f) >= 0."""
    return lambda_na(f) - e_g_na(poly, weight, f)


def twist(f: PLConvexFunction, xi: Sequence[Any]) -> PLConvexFunction:
    """The xi-twisted function: every slope a_j becomes a_j + xi."""
    vec = rq.to_vector(xi)
    return PLConvexFunction.normalized(
        f.poly, [(tuple(x + y for x, y in zip(s, vec)), c) for s, c in f.pieces]
    )


def ding_na_valuation(
    poly: LabelledPolytope, weight: WeightFunction, a: Sequence[Any]
) -> float:
    """D^NA of the valuation wt_a, i.e. A(a) - S_g(a)."""
    return float(log_discrepancy(poly, a)) - s_g(poly, weight, a)


def delta_from_barycenter(poly: LabelledPolytope, bary: Sequence[float]) -> tuple[float, int]:
    """Closed form toric delta 1 / (1 + max_i <nu_i, -b_g>).

    A(a) / S_g(a) = A(a) / (A(a) + <a, b_g>) and {A <= 1} = -conv(nu_i), so the
    infimum is attained at one of the directions -nu_i.

    Returns:
        the value and the index of the minimizing facet
    """
    b = np.asarray(bary, dtype=float)
    scores = -poly.normal_array @ b
    best = int(np.argmax(scores))
    return 1.0 / (1.0 + float(scores[best])), best


class DeltaResult(NamedTuple):
    """Toric delta invariant found by optimization, with its closed form oracle."""

    value: float
    direction: tuple[float, ...]
    oracle: float
    converged: bool


def _ratio(poly: LabelledPolytope, bary: FloatArray, a: FloatArray) -> float:
    norm = float(np.linalg.norm(a))
    if norm < 1e-12:
        return np.inf
    direction = a / norm
    big_a = -float(np.min(poly.vertex_array @ direction))
    return big_a / (big_a + float(np.dot(direction, bary)))


def delta_toric(
    poly: LabelledPolytope,
    weight: WeightFunction,
    *,
    starts: int = DELTA_STARTS,
    seed: int = DEFAULT_SEED,
    tol: float = DELTA_TOL,
) -> DeltaResult:
    """inf over unit directions a of A(a) / S_g(a).

    Multi-start Nelder-Mead over directions. The starts are the directions -nu_i
    and `starts` seeded random points of the sphere. The closed form from the
    weighted barycenter is reported as the oracle.
    """
    bary = weighted_barycenter(poly, weight)
    oracle, _ = delta_from_barycenter(poly, bary)
    candidates = [-nu / np.linalg.norm(nu) for nu in poly.normal_array]
    if poly.dim > 1:
        rng = np.random.default_rng(seed)
        for _ in range(starts):
            v = rng.standard_normal(poly.dim)
            candidates.append(v / np.linalg.norm(v))
    best_value, best_dir = np.inf, candidates[0]
    for start in candidates:
        if poly.dim == 1:
            value, direction = _ratio(poly, bary, start), start
        else:
            res = minimize(
                lambda a: _ratio(poly, bary, a),
                start,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-12},
            )
            value, direction = float(res.fun), res.x / np.linalg.norm(res.x)
        if value < best_value:
            best_value, best_dir = value, direction
    converged = best_value >= oracle - tol
    if not converged:
        logger.warning(SolverErr.delta_not_converged(best_value, oracle))
    return DeltaResult(
        value=float(best_value),
        direction=tuple(float(x) for x in best_dir),
        oracle=oracle,
        converged=converged,
    )


class UniformCheck(NamedTuple):
    """Stability modulo the torus, decided by the weighted barycenter."""

    stable_modulo_torus: bool
    barycenter_norm: float


def g_uniform_check(
    poly: LabelledPolytope, weight: WeightFunction, tol: float = BARYCENTER_TOL
) -> UniformCheck:
    """g-uniform stability with the full torus is equivalent to b_g = 0."""
    norm = float(np.linalg.norm(weighted_barycenter(poly, weight)))
    return UniformCheck(stable_modulo_torus=norm < tol, barycenter_norm=norm)


def sphere_grid(dim: int, step: float) -> FloatArray:
    """Unit directions for grid oracles: +-1 in 1D, angles at `step` in 2D."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = np.arange(0.0, 2 * np.pi, step)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    raise ValueError(f"sphere grids are only built for dim <= 2, got {dim}")
