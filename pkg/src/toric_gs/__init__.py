"""Weighted soliton invariants of toric Fano manifolds."""

from ._version import __version__ as gen_version
from .core import (
    Estimate,
    PolytopeError,
    PotentialError,
    QuadratureError,
    SchemaError,
    SolverError,
    ToricGSError,
    WeightError,
    version_info,
)
from .invariants import (
    SolitonSolution,
    dh_marginal,
    futaki,
    solve_kr_soliton,
    solve_mabuchi_soliton,
    weighted_barycenter,
    weighted_volume,
)
from .mafunc import (
    DiscretePotential,
    FunctionalValues,
    InequalityReport,
    MASolution,
    functionals,
    inequality_suite,
    solve_ma,
)
from .polytope import LabelledPolytope, builtin, from_facets, from_vertices, lattice_points
from .quadrature import WeightFunction, integrate, integrate_exact, moment
from .stability import (
    DeltaResult,
    FiltrationSample,
    PLConvexFunction,
    ToricValuation,
    delta_toric,
    dh_g_filtration,
    ding_na_valuation,
    e_g_na,
    log_discrepancy,
    s_g,
    s_g_lattice,
)

__version__ = gen_version


__all__ = [
    "__version__",
    "version_info",
    "ToricGSError",
    "PolytopeError",
    "WeightError",
    "SchemaError",
    "PotentialError",
    "QuadratureError",
    "SolverError",
    "Estimate",
    "LabelledPolytope",
    "builtin",
    "from_facets",
    "from_vertices",
    "lattice_points",
    "WeightFunction",
    "integrate",
    "integrate_exact",
    "moment",
    "SolitonSolution",
    "weighted_volume",
    "weighted_barycenter",
    "futaki",
    "dh_marginal",
    "solve_kr_soliton",
    "solve_mabuchi_soliton",
    "ToricValuation",
    "PLConvexFunction",
    "FiltrationSample",
    "DeltaResult",
    "log_discrepancy",
    "s_g",
    "s_g_lattice",
    "dh_g_filtration",
    "e_g_na",
    "ding_na_valuation",
    "delta_toric",
    "DiscretePotential",
    "MASolution",
    "FunctionalValues",
    "InequalityReport",
    "solve_ma",
    "functionals",
    "inequality_suite",
]
