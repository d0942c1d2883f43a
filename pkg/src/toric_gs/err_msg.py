"""Error messages for the polytope, weight, solver and CLI layers"""

# pylint: disable=C0116

from typing import Any


class PolytopeErr:
    """Errors related to polytope construction and enumeration"""

    @staticmethod
    def dimension_out_of_range(dim: int) -> str:
        return f"Polytope dimension must be between 1 and 4, got {dim}"

    @staticmethod
    def ragged_input(expected: int, actual: int, idx: int) -> str:
        return f"Entry {idx} has length {actual}, expected {expected}"

    @staticmethod
    def non_positive_label(idx: int, label: Any) -> str:
        return f"Facet {idx} has non-positive label {label}"

    @staticmethod
    def zero_normal(idx: int) -> str:
        return f"Facet {idx} has a zero normal"

    @staticmethod
    def unbounded() -> str:
        return "Facet normals do not positively span R^n, the polytope is unbounded"

    @staticmethod
    def empty() -> str:
        return "The facet system has fewer than n+1 affinely independent vertices"

    @staticmethod
    def origin_not_interior() -> str:
        return "The origin is not in the interior of the polytope"

    @staticmethod
    def loose_facet(idx: int) -> str:
        return f"Facet {idx} is redundant: it does not support a facet of the polytope"

    @staticmethod
    def lower_dimensional(rank: int, dim: int) -> str:
        return f"Points span an affine space of dimension {rank}, expected {dim}"

    @staticmethod
    def too_many_lattice_points(cap: int) -> str:
        return f"Lattice point enumeration exceeds the cap of {cap} points"

    @staticmethod
    def not_reflexive(name: str) -> str:
        return f"Builtin polytope '{name}' failed the reflexivity check"

    @staticmethod
    def unknown_builtin(name: str, known: list[str]) -> str:
        return f"Unknown builtin polytope '{name}', expected one of {known}"

    @staticmethod
    def not_unimodular() -> str:
        return "Coordinate change must be an integer matrix with determinant +-1"

    @staticmethod
    def zero_vector() -> str:
        return "Direction vector must be non-zero"

    @staticmethod
    def wrong_dimension(expected: int, actual: int) -> str:
        return f"Vector has dimension {actual}, polytope has dimension {expected}"


class WeightErr:
    """Errors related to weight functions"""

    @staticmethod
    def unknown_kind(kind: str) -> str:
        return (
            f"Unknown weight kind '{kind}', "
            + "expected constant, affine, exp_affine or polynomial"
        )

    @staticmethod
    def not_positive(value: float, where: str) -> str:
        return f"Weight is not positive on the polytope: {value!r} at {where}"

    @staticmethod
    def missing_param(kind: str, param: str) -> str:
        return f"Weight kind '{kind}' requires parameter '{param}'"


class QuadratureErr:
    """Errors related to numerical integration"""

    @staticmethod
    def not_converged(error: float, tol: float) -> str:
        return f"Quadrature error estimate {error:.3e} exceeds tolerance {tol:.3e}"

    @staticmethod
    def bad_degree(degree: int) -> str:
        return f"Grundmann-Moller degree must be odd and positive, got {degree}"


class SolverErr:
    """Errors related to iterative solvers"""

    @staticmethod
    def max_iterations(max_iter: int, residual: float) -> str:
        return f"No convergence after {max_iter} iterations (residual {residual:.3e})"

    @staticmethod
    def singular_moment_matrix() -> str:
        return "Second moment matrix of the polytope is singular"

    @staticmethod
    def newton_diverged(step: float) -> str:
        return f"Damped Newton could not decrease the residual (last damping {step:.3e})"

    @staticmethod
    def window_too_small(gap: float, radius: float) -> str:
        return (
            f"Boundary slopes are {gap:.3e} away from the polytope endpoints "
            + f"on the window [-{radius}, {radius}]"
        )

    @staticmethod
    def bad_grid(radius: float, nodes: int) -> str:
        return f"A grid needs a positive radius and at least 3 nodes, got R={radius!r}, N={nodes!r}"

    @staticmethod
    def non_convex(idx: int, value: float) -> str:
        return f"Potential is not convex at node {idx} (second difference {value:.3e})"

    @staticmethod
    def gradient_outside(idx: int, slope: float) -> str:
        return f"Potential slope {slope!r} at cell {idx} leaves the polytope"

    @staticmethod
    def incompatible_grids() -> str:
        return "Potential and reference potential live on different grids"

    @staticmethod
    def not_one_dimensional(dim: int) -> str:
        return f"The Monge-Ampere solver works on 1D polytopes, got dimension {dim}"

    @staticmethod
    def delta_not_converged(best: float, oracle: float) -> str:
        return f"Toric delta search found {best!r}, closed form gives {oracle!r}"


class SchemaErr:
    """Errors related to input documents and the command line"""

    @staticmethod
    def missing_key(key: str) -> str:
        return f"Missing required key '{key}'"

    @staticmethod
    def wrong_type(expected: str, actual: Any) -> str:
        return f"Expected {expected}, got {type(actual).__name__}"

    @staticmethod
    def bad_rational(value: Any) -> str:
        return f"Cannot parse {value!r} as a rational number"

    @staticmethod
    def bad_vector(value: str) -> str:
        return f"Cannot parse {value!r} as a comma separated vector"

    @staticmethod
    def bad_weight_spec(value: str) -> str:
        return f"Cannot parse weight spec {value!r}, expected kind:params or a file"

    @staticmethod
    def unknown_command(name: str) -> str:
        return f"Unknown command '{name}'"

    @staticmethod
    def unreadable_file(path: str) -> str:
        return f"Input file {path} does not exist or cannot be read"

    @staticmethod
    def bad_document(detail: str) -> str:
        return f"Input is not a valid JSON5 document: {detail}"

    @staticmethod
    def bad_argument(detail: str) -> str:
        return f"Invalid command line: {detail}"

    @staticmethod
    def not_positive(name: str, value: Any) -> str:
        return f"{name} must be positive, got {value!r}"
