"""Test valuative invariants, filtrations and the toric delta invariant."""

from fractions import Fraction
from math import e, tanh
from typing import Any

import numpy as np
import pytest

from toric_gs import stability as st
from toric_gs.core import PolytopeError
from toric_gs.invariants import solve_kr_soliton, weighted_barycenter, weighted_volume
from toric_gs.polytope import builtin
from toric_gs.quadrature import WeightFunction, integrate, unit

F = Fraction
ONE_1D = WeightFunction.constant(1, 1)
EXP_1D = WeightFunction.exp_affine(0, [1])
COTH_1 = (e**2 + 1) / (e**2 - 1)


@pytest.mark.parametrize(
    "name, a, expected",
    [
        ("p1", [1], F(1)),
        ("p1", [-2], F(2)),
        ("p2", [1, 0], F(1)),
        ("p2", [1, 1], F(2)),
        ("p2", [-1, -1], F(1)),
        ("p1xp1", [1, -1], F(2)),
    ],
)
def test_log_discrepancy(name: str, a: list[int], expected: Fraction) -> None:
    """A(a) = -min_P <a, .>, exact for integer directions."""
    assert st.log_discrepancy(builtin(name), a) == expected


def test_log_discrepancy_on_normals() -> None:
    """A(-nu_i) = max_P <nu_i, .> = 1 for every facet normal nu_i."""
    for name in ["p2", "bl1p2", "bl2p2", "bl3p2"]:
        poly = builtin(name)
        for nu in poly.normals:
            assert st.log_discrepancy(poly, [-x for x in nu]) == 1


@pytest.mark.parametrize(
    "weight, expected",
    [(ONE_1D, 1.0), (EXP_1D, COTH_1)],
)
def test_s_g_closed_forms(weight: WeightFunction, expected: float) -> None:
    """S_1(a = 1) = 1 and S_{e^x}(a = 1) = coth(1) on P^1."""
    assert st.s_g(builtin("p1"), weight, [1]) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize(
    "name, weight, a",
    [
        ("p1", ONE_1D, [1]),
        ("p1", EXP_1D, [1]),
        ("p1", EXP_1D, [-1]),
        ("p2", WeightFunction.constant(1, 2), [1, 0]),
        ("p2", WeightFunction.constant(1, 2), [1, 2]),
    ],
)
@pytest.mark.parametrize("m", [10, 20, 40, 80])
def test_s_g_lattice_converges(
    name: str, weight: WeightFunction, a: list[int], m: int
) -> None:
    """The lattice value is within 5/m of S_g."""
    poly = builtin(name)
    assert abs(st.s_g_lattice(poly, weight, a, m) - st.s_g(poly, weight, a)) <= 5 / m


def test_s_g_identity() -> None:
    """S_g(a) = A(a) + <a, b_g>."""
    poly = builtin("bl2p2")
    weight = WeightFunction.exp_affine(0, [F(1, 3), F(-1, 2)])
    bary = weighted_barycenter(poly, weight)
    for a in ([1, 0], [2, -1], [-1, -3]):
        expected = float(st.log_discrepancy(poly, a)) + float(np.dot(a, bary))
        assert st.s_g(poly, weight, a) == pytest.approx(expected)


def test_zero_direction() -> None:
    """The trivial valuation is rejected."""
    with pytest.raises(PolytopeError) as err:
        st.log_discrepancy(builtin("p2"), [0, 0])
    assert err.value.kind == "ZeroVector"


def test_toric_valuation() -> None:
    """Ratio and Ding invariant of a valuation."""
    val = st.ToricValuation.of(builtin("p1"), EXP_1D, [1])
    assert val.log_discrepancy == 1.0
    assert val.ratio == pytest.approx(1 / COTH_1)
    assert val.ding == pytest.approx(1 - COTH_1)
    assert st.ding_na_valuation(builtin("p1"), EXP_1D, [1]) == pytest.approx(val.ding)


def test_delta_toric_p1() -> None:
    """delta(P^1, 1) = 1 and delta(P^1, e^x) = tanh(1)."""
    poly = builtin("p1")
    plain = st.delta_toric(poly, ONE_1D)
    assert plain.value == pytest.approx(1.0, abs=1e-6)
    assert plain.converged
    twisted = st.delta_toric(poly, EXP_1D)
    assert twisted.value == pytest.approx(tanh(1), abs=1e-4)
    assert twisted.oracle == pytest.approx(tanh(1), abs=1e-12)
    assert twisted.direction == pytest.approx((1.0,))


@pytest.mark.parametrize("name", ["p2", "bl1p2", "bl2p2"])
def test_delta_toric_matches_closed_form(name: str) -> None:
    """Nelder-Mead finds the closed form value."""
    poly = builtin(name)
    res = st.delta_toric(poly, WeightFunction.constant(1, 2), starts=16, seed=3)
    assert res.converged
    assert res.value == pytest.approx(res.oracle, abs=1e-6)
    assert res.value <= 1.0 + 1e-9


def test_delta_from_barycenter() -> None:
    """bl1p2 with g = 1: the minimum is attained on the normal (1, 1)."""
    poly = builtin("bl1p2")
    value, idx = st.delta_from_barycenter(poly, [1 / 12, 1 / 12])
    assert value == pytest.approx(1 / (1 + 1 / 6))
    assert poly.normals[idx] == (F(-1), F(-1))


def test_ding_along_kr_soliton() -> None:
    """With the soliton weight no valuation destabilizes."""
    poly = builtin("bl1p2")
    weight = solve_kr_soliton(poly).weight
    for a in st.sphere_grid(2, 0.05):
        assert st.ding_na_valuation(poly, weight, a) >= -1e-6
    check = st.g_uniform_check(poly, weight)
    assert check.stable_modulo_torus
    assert not st.g_uniform_check(poly, WeightFunction.constant(1, 2)).stable_modulo_torus


def test_sphere_grid() -> None:
    """Unit directions in 1D and 2D."""
    assert st.sphere_grid(1, 0.1).tolist() == [[1.0], [-1.0]]
    grid = st.sphere_grid(2, 1.0)
    assert grid.shape == (7, 2)
    assert np.allclose(np.linalg.norm(grid, axis=1), 1.0)


def abs_function() -> st.PLConvexFunction:
    return st.PLConvexFunction.normalized(builtin("p1"), [([1], 0), ([-1], 0)])


def test_pl_normalization() -> None:
    """Intercepts are shifted so that min_P f = 0, duplicates dropped."""
    f = st.PLConvexFunction.normalized(builtin("p1"), [([0], 5), ([0], 5)])
    assert f.pieces == (((F(0),), F(0)),)
    g = st.PLConvexFunction.normalized(builtin("p2"), [([1, 0], 0), ([0, 1], 0)])
    assert min(g.exact_value(v) for v in builtin("p2").vertices) >= 0
    assert g.exact_value((F(-1), F(-1))) == 0
    assert g.to_dict() == {"pieces": [{"a": ["1", "0"], "c": "1"}, {"a": ["0", "1"], "c": "1"}]}


def test_pl_cells() -> None:
    """|x| has two cells on P^1."""
    cells = abs_function().cells()
    assert len(cells) == 2
    assert sorted(v for _, c in cells for v in c.vertices) == [(-1,), (0,), (0,), (1,)]


def test_pl_evaluation() -> None:
    """Vectorized evaluation."""
    f = abs_function()
    assert np.allclose(f(np.array([[-1.0], [0.5], [0.0]])), [1.0, 0.5, 0.0])


def test_non_archimedean_functionals() -> None:
    """E^NA, Lambda^NA and J^NA of |x| on P^1."""
    f = abs_function()
    poly = builtin("p1")
    assert st.e_g_na(poly, ONE_1D, f) == pytest.approx(0.5, abs=1e-9)
    assert st.lambda_na(f) == 1.0
    assert st.j_g_na(poly, ONE_1D, f) == pytest.approx(0.5, abs=1e-9)
    sample = st.dh_g_filtration(poly, ONE_1D, f, 200)
    assert sample.barycenter == pytest.approx(0.5, abs=0.02)


def test_valuation_function() -> None:
    """f_a has E^NA equal to S_g(a)."""
    poly = builtin("bl1p2")
    weight = WeightFunction.affine(2, [F(1, 4), 0])
    f = st.valuation_function(poly, [1, 1])
    assert st.e_g_na(poly, weight, f) == pytest.approx(st.s_g(poly, weight, [1, 1]))


def test_twist() -> None:
    """Twisting |x| by 1 gives max(2x, 0)."""
    twisted = st.twist(abs_function(), [1])
    assert st.lambda_na(twisted) == 2.0
    assert twisted(np.array([[-1.0]]))[0] == 0.0


def test_filtration_columns() -> None:
    """Atoms of nu_2 for |x| on P^1."""
    sample = st.dh_g_filtration(builtin("p1"), ONE_1D, abs_function(), 2)
    cols = sample.columns()
    assert cols["atom"] == [0.0, 0.5, 1.0]
    assert cols["mass"] == pytest.approx([0.5, 1.0, 1.0])
    assert sample.total_mass == pytest.approx(2.5)
    assert sample.f_m(0.5) == pytest.approx(2.0)
    assert sample.f_m(1.5) == 0.0


@pytest.mark.parametrize("name", ["p1", "p2", "p1xp1", "bl1p2", "bl2p2", "bl3p2"])
@pytest.mark.parametrize("m", [10, 20, 40, 80])
def test_filtration_mass(name: str, m: int) -> None:
    """Total mass of nu_m converges to V_g."""
    poly = builtin(name)
    one = WeightFunction.constant(1, poly.dim)
    zero = st.PLConvexFunction.normalized(poly, [])
    sample = st.dh_g_filtration(poly, one, zero, m)
    volume = weighted_volume(poly, one)
    assert abs(sample.total_mass - volume) / volume < 3 / m


@pytest.mark.parametrize("scale", [F(2), F(1, 3)])
def test_valuation_homogeneous(scale: Fraction) -> None:
    """A and S_g are homogeneous of degree one in a."""
    poly = builtin("bl2p2")
    weight = WeightFunction.exp_affine(0, [F(1, 3), F(-1, 2)])
    for a in ([1, 0], [2, -1], [-1, -3]):
        scaled = [scale * x for x in a]
        assert st.log_discrepancy(poly, scaled) == scale * st.log_discrepancy(poly, a)
        assert st.s_g(poly, weight, scaled) == pytest.approx(float(scale) * st.s_g(poly, weight, a))


@pytest.mark.parametrize("matrix", [[[1, 1], [0, 1]], [[0, -1], [1, 0]]])
def test_delta_toric_unimodular_invariance(matrix: list[list[int]]) -> None:
    """delta(U(P), g o U^{-1}) = delta(P, g)."""
    poly = builtin("bl1p2")
    weight = WeightFunction.exp_affine(0, [F(1, 5), F(-2, 5)])
    before = st.delta_toric(poly, weight, seed=2)
    after = st.delta_toric(poly.transform(matrix), weight.transform(matrix), seed=2)
    assert after.oracle == pytest.approx(before.oracle, abs=1e-10)
    assert after.value == pytest.approx(before.value, abs=1e-6)


def test_delta_toric_against_grid() -> None:
    """A dense scan of A / S_g over the circle brackets the optimized value."""
    poly = builtin("bl2p2")
    weight = WeightFunction.exp_affine(0, [F(1, 3), F(-1, 2)])
    res = st.delta_toric(poly, weight, seed=4)
    mass = integrate(poly, weight, method="quadrature").value
    bary = np.array(
        [integrate(poly, weight, unit(2, i), method="quadrature").value / mass for i in range(2)]
    )
    ratios = []
    for a in st.sphere_grid(2, 5e-4):
        big_a = float(st.log_discrepancy(poly, a))
        ratios.append(big_a / (big_a + float(a @ bary)))
    assert min(ratios) >= res.value - 1e-6
    assert min(ratios) - res.value < 1e-3
    assert res.converged


def random_pl(poly: Any, rng: np.random.Generator) -> st.PLConvexFunction:
    count = int(rng.integers(1, 5))
    pieces = [
        (rng.integers(-3, 4, size=poly.dim).tolist(), F(int(rng.integers(-4, 5)), 2))
        for _ in range(count)
    ]
    return st.PLConvexFunction.normalized(poly, pieces)


@pytest.mark.parametrize("name", ["p1", "p2", "bl1p2"])
def test_random_pl_functionals_bounded(name: str) -> None:
    """0 <= E_g^NA <= Lambda^NA, so J_g^NA >= 0."""
    poly = builtin(name)
    weight = WeightFunction.exp_affine(0, [F(1, 2)] + [F(-1, 4)] * (poly.dim - 1))
    rng = np.random.default_rng(13)
    for _ in range(10):
        f = random_pl(poly, rng)
        e_na = st.e_g_na(poly, weight, f)
        assert -1e-12 <= e_na <= st.lambda_na(f) + 1e-12
        assert st.j_g_na(poly, weight, f) >= -1e-12


def test_s_g_lattice_error_shrinks() -> None:
    """The lattice approximation of S_g improves as m grows."""
    poly = builtin("p2")
    weight = WeightFunction.exp_affine(0, [F(1, 2), F(1, 3)])
    exact = st.s_g(poly, weight, [1, 2])
    errors = [abs(st.s_g_lattice(poly, weight, [1, 2], m) - exact) for m in (5, 10, 20, 40, 80)]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < errors[0] / 8
