"""Test the 1D Monge-Ampere solver and the functional suite."""

from fractions import Fraction

import numpy as np
import pytest

from toric_gs import mafunc as ma
from toric_gs.core import PolytopeError, PotentialError, SchemaError, SolverError
from toric_gs.invariants import weighted_barycenter
from toric_gs.polytope import builtin, from_vertices
from toric_gs.quadrature import WeightFunction, integrate

F = Fraction
P1 = builtin("p1")
ONE = WeightFunction.constant(1, 1)
EXP = WeightFunction.exp_affine(0, [1])
EXP_03 = WeightFunction.exp_affine(0, [F(3, 10)])


@pytest.fixture(scope="module", name="plain_solution")
def fixture_plain_solution() -> ma.MASolution:
    """g = 1 on [-1, 1]."""
    return ma.solve_ma(P1, ONE)


@pytest.fixture(scope="module", name="twisted_solution")
def fixture_twisted_solution() -> ma.MASolution:
    """g = e^{0.3 x} on [-1, 1]."""
    return ma.solve_ma(P1, EXP_03)


def sample_potentials(count: int, seed: int) -> list[ma.DiscretePotential]:
    rng = np.random.default_rng(seed)
    return [ma.random_potential(P1, rng, nodes=801).potential for _ in range(count)]


def test_interval() -> None:
    """Endpoints of a 1D polytope."""
    assert ma.interval(P1) == (-1.0, 1.0)
    assert ma.interval(from_vertices([[-1], [2]])) == (-1.0, 2.0)
    with pytest.raises(PolytopeError):
        ma.interval(builtin("p2"))


def test_reference_potential() -> None:
    """u0 = log(e^{-x} + e^{x}) is convex with slopes in P."""
    u0 = ma.reference_potential(P1, nodes=401)
    u0.validate()
    assert u0.nodes == 401
    assert u0.h == pytest.approx(0.1)
    assert u0.values[200] == pytest.approx(np.log(2.0))
    slopes = u0.slopes()
    assert slopes.shape == (402,)
    assert slopes[0] == -1.0 and slopes[-1] == 1.0


def test_validate_rejects_non_convex() -> None:
    """Concave data and slopes outside P are reported with the node."""
    u0 = ma.reference_potential(P1, nodes=101)
    with pytest.raises(PotentialError) as err:
        u0.with_values(-(u0.grid**2)).validate()
    assert err.value.kind == "NonConvexInput"
    with pytest.raises(PotentialError) as err:
        u0.with_values(2 * u0.values).validate()
    assert err.value.index is not None


def test_random_potential_is_admissible() -> None:
    """Random potentials are convex with slopes inside P."""
    for u in sample_potentials(20, 7):
        u.validate()


def test_translate() -> None:
    """Translation by whole nodes shifts the values."""
    u0 = ma.reference_potential(P1, nodes=401)
    moved = ma.translate(u0, 5 * u0.h)
    assert np.allclose(moved.values[:-5], u0.values[5:])
    assert np.allclose(ma.translate(u0, 0.0).values, u0.values)


def test_g_masses_telescope() -> None:
    """The g-Monge-Ampere masses of any potential add up to V_g."""
    total = integrate(P1, EXP).value
    for u in sample_potentials(5, 1):
        masses = ma.g_masses(u, EXP)
        assert np.all(masses >= -1e-12)
        assert float(np.sum(masses)) == pytest.approx(total, rel=1e-12)


def test_node_masses() -> None:
    """int e^{-u0} dx = pi / 2 for u0 = log(2 cosh x)."""
    u0 = ma.reference_potential(P1, nodes=4001)
    m0, m1, _ = ma.node_masses(u0)
    assert float(np.sum(m0)) == pytest.approx(np.pi / 2, rel=1e-5)
    assert float(np.sum(m1)) == pytest.approx(0.0, abs=1e-12)


def test_solve_plain(plain_solution: ma.MASolution) -> None:
    """g = 1: the residual is tiny, the solution is even and untwisted."""
    sol = plain_solution
    assert sol.residual < 1e-8
    assert sol.futaki_vanishes
    assert abs(sol.futaki_defect) < 1e-10
    values = sol.potential.values
    assert np.max(np.abs(values - values[::-1])) < 1e-8
    assert sol.window_gap < 1e-6
    assert abs(sol.ding_slope) < 1e-6
    assert sol.iterations == len(sol.damping)


def test_solve_twisted(twisted_solution: ma.MASolution) -> None:
    """g = e^{0.3 x}: the twist equals the weighted barycenter."""
    sol = twisted_solution
    assert sol.residual < 1e-8
    bary = float(weighted_barycenter(P1, EXP_03)[0])
    assert sol.barycenter == pytest.approx(bary)
    assert sol.futaki_defect == pytest.approx(bary, abs=1e-3)
    assert not sol.futaki_vanishes
    assert sol.ding_slope == pytest.approx(-bary, abs=1e-3)


@pytest.mark.parametrize("weight", [ONE, EXP_03])
def test_pushforward_moments(weight: WeightFunction) -> None:
    """The pushforward of c e^{theta x - u} dx under u' is g dy on P."""
    sol = ma.solve_ma(P1, weight)
    moments = ma.pushforward_moments(sol, weight, order=3)
    for k in range(4):
        assert moments[k] == pytest.approx(integrate(P1, weight, (k,)).value, abs=1e-5)


def test_solve_window_too_small() -> None:
    """A window held at radius 5 cannot reach the endpoints of P."""
    with pytest.raises(SolverError) as err:
        ma.solve_ma(P1, ONE, radius=5.0, nodes=201, max_radius=5.0)
    assert err.value.kind == "WindowTooSmall"


@pytest.mark.parametrize("beta", [2, 3, 5])
def test_solve_steep_exponential_weights(beta: int) -> None:
    """g = e^{beta x}: Newton converges from the profile and the window grows."""
    weight = WeightFunction.exp_affine(0, [beta])
    sol = ma.solve_ma(P1, weight)
    bary = float(weighted_barycenter(P1, weight)[0])
    assert bary == pytest.approx(1 / np.tanh(beta) - 1 / beta)
    assert sol.residual < 1e-8
    assert sol.futaki_defect == pytest.approx(bary, abs=1e-3)
    assert sol.window_gap < 1e-6
    assert sol.potential.radius > 20


def test_window_grows_at_constant_spacing() -> None:
    """Doubling the window keeps the grid spacing."""
    sol = ma.solve_ma(P1, WeightFunction.exp_affine(0, [2]), nodes=801)
    assert sol.potential.radius == 40
    assert sol.potential.nodes == 1601
    assert sol.potential.h == pytest.approx(0.05)


def test_legendre_seed_plain() -> None:
    """For g = 1 the profile is log cosh shaped with slope tanh(x / 2)."""
    seed = ma.legendre_seed(P1, ONE, radius=20.0, nodes=2001)
    assert seed.theta == pytest.approx(0.0, abs=1e-10)
    u = seed.potential
    mid = u.grid[:-1] + u.h / 2
    assert u.slopes()[1:-1] == pytest.approx(np.tanh(mid / 2), abs=1e-5)
    assert u.values[u.nodes // 2] == pytest.approx(np.log(2.0))
    assert seed.gap < 1e-6
    u.validate()


def test_legendre_seed_twisted() -> None:
    """The profile twist is the weighted barycenter."""
    seed = ma.legendre_seed(P1, EXP_03, radius=20.0, nodes=801)
    assert seed.theta == pytest.approx(float(weighted_barycenter(P1, EXP_03)[0]), abs=1e-8)
    seed.potential.validate()


@pytest.mark.parametrize("radius, nodes", [(0.0, 101), (-1.0, 101), (10.0, 2)])
def test_solve_rejects_bad_grid(radius: float, nodes: int) -> None:
    """The window needs a positive radius and at least three nodes."""
    with pytest.raises(SchemaError) as err:
        ma.solve_ma(P1, ONE, radius=radius, nodes=nodes)
    assert err.value.kind == "SchemaViolation"


def test_solve_max_iterations() -> None:
    """Zero iterations are not enough."""
    with pytest.raises(SolverError) as err:
        ma.solve_ma(P1, EXP_03, nodes=401, max_iter=0)
    assert err.value.kind == "MaxIterations"


def test_solve_rejects_higher_dimensions() -> None:
    """The solver only handles intervals."""
    with pytest.raises(PolytopeError):
        ma.solve_ma(builtin("p2"), WeightFunction.constant(1, 2))


def test_functionals_at_reference() -> None:
    """Every relative functional vanishes at u0 except the entropy."""
    u0 = ma.reference_potential(P1, nodes=801)
    values = ma.functionals(u0, EXP, P1)
    for key in ("E_g", "Lambda_g", "I_g", "J_g", "L", "D"):
        assert values.to_dict()[key] == pytest.approx(0.0, abs=1e-12)
    assert values.m == pytest.approx(values.h_g)
    assert values.h_g >= 0


@pytest.mark.parametrize("weight", [ONE, EXP])
def test_ding_constant_invariance(weight: WeightFunction) -> None:
    """D(u + kappa) = D(u)."""
    for u in sample_potentials(5, 2):
        before = ma.functionals(u, weight, P1)
        after = ma.functionals(u.with_values(u.values + 0.7), weight, P1)
        assert after.d == pytest.approx(before.d, abs=1e-10)
        assert after.e_g == pytest.approx(before.e_g + 0.7, abs=1e-10)


@pytest.mark.parametrize("weight", [ONE, EXP])
def test_energy_cocycle(weight: WeightFunction) -> None:
    """E(u1, u0) = E(u1, u2) + E(u2, u0)."""
    u0 = ma.reference_potential(P1, nodes=801)
    u1, u2 = sample_potentials(2, 5)
    e10 = ma.functionals(u1, weight, P1, reference=u0).e_g
    e12 = ma.functionals(u1, weight, P1, reference=u2).e_g
    e20 = ma.functionals(u2, weight, P1, reference=u0).e_g
    assert e10 == pytest.approx(e12 + e20, abs=1e-8)


def test_incompatible_grids() -> None:
    """Potentials on different grids cannot be compared."""
    u = ma.reference_potential(P1, nodes=401)
    with pytest.raises(PotentialError):
        ma.functionals(u, ONE, P1, reference=ma.reference_potential(P1, nodes=801))


def test_mabuchi_equals_ding_at_solution(plain_solution: ma.MASolution) -> None:
    """M - D vanishes at the solution of the plain equation."""
    values = ma.functionals(plain_solution.potential, ONE, P1)
    assert values.m - values.d == pytest.approx(0.0, abs=1e-6)
    assert values.clamped == 0


@pytest.mark.parametrize("weight", [ONE, EXP])
def test_inequality_suite(weight: WeightFunction) -> None:
    """No inequality fails on 100 seeded potentials."""
    report = ma.inequality_suite(P1, weight, 100, seed=42)
    assert report.passed
    assert report.violations == {"a": 0, "b": 0, "c": 0, "d": 0}
    assert report.failures == []
    assert report.to_dict()["samples"] == 100


def test_inequality_suite_thread_independent() -> None:
    """Results do not depend on the number of worker threads."""
    serial = ma.inequality_suite(P1, EXP, 12, seed=3, threads=1)
    parallel = ma.inequality_suite(P1, EXP, 12, seed=3, threads=4)
    assert serial.to_dict() == parallel.to_dict()


def test_potential_to_dict() -> None:
    """Serialized grid potentials."""
    u0 = ma.reference_potential(P1, radius=2.0, nodes=5)
    doc = u0.to_dict()
    assert doc["grid"] == {"R": 2.0, "N": 5}
    assert len(doc["values"]) == 5


def test_ding_minimized_at_solution(plain_solution: ma.MASolution) -> None:
    """D(u*) <= D(u* + eps (v - u*)) for 50 seeded potentials v."""
    star = plain_solution.potential
    base = ma.functionals(star, ONE, P1).d
    rng = np.random.default_rng(11)
    for _ in range(50):
        v = ma.random_potential(P1, rng, radius=star.radius, nodes=star.nodes).potential
        for eps in (0.05, 0.2):
            moved = star.with_values(star.values + eps * (v.values - star.values))
            assert ma.functionals(moved, ONE, P1).d >= base - 1e-9


@pytest.mark.parametrize("weight", [ONE, EXP])
def test_energy_concave_along_affine_paths(weight: WeightFunction) -> None:
    """E_g((1 - t) u + t v) >= (1 - t) E_g(u) + t E_g(v)."""
    pairs = sample_potentials(10, 17)
    for u, v in zip(pairs[::2], pairs[1::2]):
        e_u = ma.functionals(u, weight, P1).e_g
        e_v = ma.functionals(v, weight, P1).e_g
        for t in (0.25, 0.5, 0.75):
            mixed = u.with_values((1 - t) * u.values + t * v.values)
            e_t = ma.functionals(mixed, weight, P1).e_g
            assert e_t >= (1 - t) * e_u + t * e_v - 1e-10


def test_inequality_suite_respects_thread_cap(monkeypatch: pytest.MonkeyPatch) -> None:
    """Requesting more threads than TORIC_GS_THREADS allows uses the cap."""
    seen: list[int] = []

    class Recording(ma.ThreadPoolExecutor):
        def __init__(self, max_workers: int) -> None:
            seen.append(max_workers)
            super().__init__(max_workers=max_workers)

    monkeypatch.setenv("TORIC_GS_THREADS", "2")
    monkeypatch.setattr(ma, "ThreadPoolExecutor", Recording)
    ma.inequality_suite(P1, ONE, 4, seed=1, threads=16)
    ma.inequality_suite(P1, ONE, 4, seed=1, threads=1)
    ma.inequality_suite(P1, ONE, 4, seed=1)
    assert seen == [2, 1, 2]


@pytest.mark.parametrize(
    "kwargs, pointer",
    [({"samples": 0}, "/samples"), ({"samples": -1}, "/samples"), ({"samples": 3, "threads": 0}, "/threads")],
)
def test_inequality_suite_rejects_bad_counts(kwargs: dict[str, int], pointer: str) -> None:
    """Non-positive sample or thread counts are schema errors."""
    with pytest.raises(SchemaError) as err:
        ma.inequality_suite(P1, ONE, **kwargs)
    assert err.value.kind == "SchemaViolation"
    assert err.value.pointer == pointer
