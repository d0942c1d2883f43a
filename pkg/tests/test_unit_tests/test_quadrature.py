"""Test weight functions and integration over polytopes."""

from fractions import Fraction
from math import e

import numpy as np
import pytest

from toric_gs import quadrature as qd
from toric_gs.core import QuadratureError, WeightError
from toric_gs.polytope import builtin, clip
from toric_gs.quadrature import WeightFunction

F = Fraction


@pytest.mark.parametrize(
    "name, weight, powers, expected",
    [
        ("p1", WeightFunction.constant(1, 1), (0,), F(2)),
        ("p1", WeightFunction.constant(1, 1), (2,), F(2, 3)),
        ("p1", WeightFunction.affine(2, [1]), (1,), F(2, 3)),
        ("p1", WeightFunction.polynomial([((0,), 1), ((2,), 1)], 1), (0,), F(8, 3)),
        ("p2", WeightFunction.constant(1, 2), (0, 0), F(9, 2)),
        ("p2", WeightFunction.constant(1, 2), (1, 0), F(0)),
        ("p1xp1", WeightFunction.constant(3, 2), (2, 2), F(4, 3)),
        ("bl1p2", WeightFunction.constant(1, 2), (1, 0), F(1, 3)),
    ],
)
def test_integrate_exact(
    name: str, weight: WeightFunction, powers: tuple[int, ...], expected: Fraction
) -> None:
    """Polynomial integrals are exact rationals."""
    assert qd.integrate_exact(builtin(name), weight, powers) == expected
    est = qd.integrate(builtin(name), weight, powers)
    assert est.value == pytest.approx(float(expected), abs=1e-15)
    assert est.error == 0.0


@pytest.mark.parametrize(
    "powers, expected",
    [
        ((0,), e - 1 / e),
        ((1,), 2 / e),
        ((2,), e - 5 / e),
    ],
)
def test_integrate_exp_interval(powers: tuple[int, ...], expected: float) -> None:
    """Moments of e^x on [-1, 1]."""
    est = qd.integrate(builtin("p1"), WeightFunction.exp_affine(0, [1]), powers)
    assert est.value == pytest.approx(expected, rel=1e-13)
    assert est.error < 1e-12


@pytest.mark.parametrize("name", ["p2", "p1xp1", "bl2p2"])
@pytest.mark.parametrize("powers", [(0, 0), (1, 0), (1, 1), (0, 2)])
def test_exact_matches_quadrature(name: str, powers: tuple[int, int]) -> None:
    """The divided difference path agrees with adaptive Grundmann-Moller."""
    weight = WeightFunction.exp_affine(F(1, 5), [F(1, 2), F(-1, 3)])
    exact = qd.integrate(builtin(name), weight, powers, method="exact")
    quad = qd.integrate(builtin(name), weight, powers, method="quadrature")
    assert exact.value == pytest.approx(quad.value, rel=1e-9, abs=1e-10)


def test_degenerate_exponents() -> None:
    """A weight constant along an edge needs no special casing."""
    poly = builtin("p1xp1")
    weight = WeightFunction.exp_affine(0, [0, 1])
    # int e^y over the square is 2 (e - 1/e)
    assert qd.integrate(poly, weight).value == pytest.approx(2 * (e - 1 / e), rel=1e-13)
    flat = WeightFunction.exp_affine(0, [0, 0])
    assert qd.integrate(poly, flat).value == pytest.approx(4.0, rel=1e-14)


@pytest.mark.parametrize(
    "nodes, expected",
    [
        ([0.0], 1.0),
        ([0.0, 1.0], e - 1),
        ([0.0, 0.0], 1.0),
        ([0.0, 0.0, 0.0], 0.5),
        ([1.0, 1.0], e),
        ([-30.0, -30.0 + 1e-9], np.exp(-30.0)),
    ],
)
def test_divided_difference_exp(nodes: list[float], expected: float) -> None:
    """exp[t_1, ..., t_m], with repeated nodes giving derivatives."""
    assert qd.divided_difference_exp(nodes) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("degree", [1, 3, 7])
def test_grundmann_moller_weights(n: int, degree: int) -> None:
    """Weights sum to the volume of the standard simplex."""
    points, weights = qd.grundmann_moller(n, degree)
    assert points.shape[1] == n + 1
    assert np.allclose(points.sum(axis=1), 1.0)
    assert float(np.sum(weights)) == pytest.approx(1 / np.prod(range(1, n + 1)), rel=1e-12)


def test_grundmann_moller_bad_degree() -> None:
    """Even degrees are rejected."""
    with pytest.raises(QuadratureError):
        qd.grundmann_moller(2, 4)


def test_adaptive_not_converged() -> None:
    """A kink that the rule cannot resolve exhausts the depth."""
    verts = np.array([[-1.0], [1.0]])
    with pytest.raises(QuadratureError) as err:
        qd.adaptive_simplex(lambda x: np.abs(x[:, 0] - 1 / 3), verts, tol=1e-16, max_depth=2)
    assert err.value.kind == "QuadratureNotConverged"


def test_integrate_over_cell() -> None:
    """Cells integrate like polytopes."""
    cell = clip(builtin("p1"), [[-1]], [0])
    assert cell is not None
    one = WeightFunction.constant(1, 1)
    assert qd.integrate_exact(cell, one, (1,)) == F(1, 2)


def test_moments_upto_two() -> None:
    """Mass, first moments and second moments of the square."""
    mass, first, second = qd.moments_upto_two(builtin("p1xp1"), WeightFunction.constant(1, 2))
    assert mass == pytest.approx(4.0)
    assert np.allclose(first, 0.0)
    assert np.allclose(second, [[4 / 3, 0.0], [0.0, 4 / 3]])


def test_weight_evaluation() -> None:
    """g, its gradient and the gradient of log g."""
    weight = WeightFunction.affine(2, [1, -1])
    pts = np.array([[0.0, 0.0], [1.0, 0.5]])
    assert np.allclose(weight(pts), [2.0, 2.5])
    assert np.allclose(weight.gradient(pts), [[1.0, -1.0], [1.0, -1.0]])
    assert np.allclose(weight.log_gradient(pts), [[0.5, -0.5], [0.4, -0.4]])
    exp_w = WeightFunction.exp_affine(0, [1, 2])
    assert np.allclose(exp_w.log_gradient(pts), [[1.0, 2.0], [1.0, 2.0]])
    poly_w = WeightFunction.polynomial([((2, 0), 1), ((0, 1), 3)], 2)
    assert np.allclose(poly_w(pts), [0.0, 2.5])
    assert np.allclose(poly_w.gradient(pts), [[0.0, 3.0], [2.0, 3.0]])


def test_weight_one_dimensional_samples() -> None:
    """A flat array of samples is read as points of an interval."""
    weight = WeightFunction.exp_affine(0, [1])
    assert weight(np.array([0.0, 1.0, 2.0])).shape == (3,)
    assert weight(0.0).shape == (1,)


@pytest.mark.parametrize(
    "weight, bounds",
    [
        (WeightFunction.constant(2, 1), (2.0, 2.0)),
        (WeightFunction.affine(2, [1]), (1.0, 3.0)),
        (WeightFunction.exp_affine(0, [1]), (1 / e, e)),
        (WeightFunction.polynomial([((0,), 1), ((2,), 1)], 1), (1.0, 2.0)),
    ],
)
def test_check_positive(weight: WeightFunction, bounds: tuple[float, float]) -> None:
    """Positive weights report their range on P."""
    low, high = weight.check_positive(builtin("p1"))
    assert low == pytest.approx(bounds[0])
    assert high == pytest.approx(bounds[1])


@pytest.mark.parametrize(
    "weight",
    [
        WeightFunction.constant(0, 1),
        WeightFunction.affine(1, [1]),
        WeightFunction.affine(F(1, 2), [1]),
        WeightFunction.polynomial([((2,), 1)], 1),
    ],
)
def test_check_positive_violated(weight: WeightFunction) -> None:
    """Weights vanishing somewhere on P are rejected."""
    with pytest.raises(WeightError) as err:
        weight.check_positive(builtin("p1"))
    assert err.value.kind == "PositivityViolated"


def test_polynomial_bad_powers() -> None:
    """Powers must match the dimension."""
    with pytest.raises(WeightError):
        WeightFunction.polynomial([((1, 0), 1)], 1)


def test_interval_increment() -> None:
    """int_lo^hi g for each kind of 1D weight."""
    lo = np.array([-1.0, 0.0])
    hi = np.array([1.0, 1.0])
    assert np.allclose(WeightFunction.constant(3, 1).interval_increment(lo, hi), [6.0, 3.0])
    assert np.allclose(WeightFunction.affine(1, [1]).interval_increment(lo, hi), [2.0, 1.5])
    assert np.allclose(
        WeightFunction.exp_affine(0, [1]).interval_increment(lo, hi), [e - 1 / e, e - 1]
    )
    poly_w = WeightFunction.polynomial([((2,), 3)], 1)
    assert np.allclose(poly_w.interval_increment(lo, hi), [2.0, 1.0])
    # tiny intervals stay accurate
    tiny = WeightFunction.exp_affine(0, [1]).interval_increment(np.array([0.0]), np.array([1e-12]))
    assert tiny[0] == pytest.approx(1e-12, rel=1e-9)


def test_interval_moments() -> None:
    """int_lo^hi y^k g dy."""
    weight = WeightFunction.exp_affine(0, [1])
    assert weight.interval_moments(np.array([-1.0]), np.array([1.0]), 1)[0] == pytest.approx(2 / e)


def test_weight_transform() -> None:
    """Integrals are invariant under a unimodular change of coordinates."""
    matrix = [[1, 1], [0, 1]]
    poly = builtin("bl1p2")
    for weight in [
        WeightFunction.affine(3, [F(1, 2), F(1, 3)]),
        WeightFunction.exp_affine(0, [F(1, 2), F(-1, 4)]),
        WeightFunction.polynomial([((0, 0), 1), ((1, 1), 1), ((2, 0), 1)], 2),
    ]:
        before = qd.integrate(poly, weight).value
        after = qd.integrate(poly.transform(matrix), weight.transform(matrix)).value
        assert after == pytest.approx(before, rel=1e-12)


def test_unit() -> None:
    """Multi-index helper."""
    assert qd.unit(3, 1) == (0, 1, 0)
    assert qd.unit(2, 0, 2) == (2, 0)


def random_polynomial(rng: np.random.Generator, dim: int) -> WeightFunction:
    """A positive polynomial weight of degree at most 4 on the builtins."""
    coeffs: list[tuple[tuple[int, ...], Fraction]] = [((0,) * dim, F(200))]
    for _ in range(6):
        powers = tuple(int(k) for k in rng.integers(0, 3, size=dim))
        if sum(powers) <= 4:
            coeffs.append((powers, F(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))))
    return WeightFunction.polynomial(coeffs, dim)


@pytest.mark.parametrize("name", ["p1", "p2", "bl1p2", "bl3p2"])
def test_random_polynomial_moments(name: str) -> None:
    """Exact moments of random polynomial weights agree with quadrature."""
    poly = builtin(name)
    rng = np.random.default_rng(21)
    for _ in range(4):
        weight = random_polynomial(rng, poly.dim)
        for powers in [(0,) * poly.dim, qd.unit(poly.dim, 0), qd.unit(poly.dim, poly.dim - 1, 2)]:
            exact = qd.integrate_exact(poly, weight, powers)
            quad = qd.integrate(poly, weight, powers, method="quadrature")
            assert quad.value == pytest.approx(float(exact), rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("name", ["p1", "p2", "p1xp1", "bl2p2"])
def test_weighted_volume_between_bounds(name: str) -> None:
    """min_P g vol(P) <= int_P g <= max_P g vol(P)."""
    poly = builtin(name)
    n = poly.dim
    rng = np.random.default_rng(22)
    weights = [
        WeightFunction.exp_affine(F(1, 3), [F(1, 2)] + [F(-1, 5)] * (n - 1)),
        WeightFunction.affine(3, [F(1, 2)] * n),
        random_polynomial(rng, n),
    ]
    volume = float(poly.volume)
    for weight in weights:
        low, high = weight.check_positive(poly)
        total = qd.integrate(poly, weight).value
        assert low * volume <= total + 1e-12
        assert total <= high * volume + 1e-12
