"""Core types and exceptions shared by every toric_gs module."""

from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt

from ._version import __version__


def version_info() -> str:
    """Return complete version information for toric_gs and its dependencies."""
    import platform  # pylint: disable=C0415
    import sys  # pylint: disable=C0415

    import scipy  # pylint: disable=C0415
    import ujson5  # pylint: disable=C0415

    info = {
        "toric_gs version": __version__,
        "python version": sys.version,
        "numpy version": np.__version__,
        "scipy version": scipy.__version__,
        "ujson5 version": ujson5.__version__,
        "platform": platform.platform(),
    }
    info = {k: str(v).replace("\n", " ") for k, v in info.items()}
    return "\n".join(f"{k}: {v}" for k, v in info.items())


Rational = Fraction
"""Exact scalars used for polytope data."""
RationalVector = tuple[Fraction, ...]
"""Exact point or normal in R^n."""
FloatArray = npt.NDArray[np.float64]
"""Floating point array used downstream of the exact layer."""
IntArray = npt.NDArray[np.int64]
"""Integer lattice points, one per row."""


class ToricGSError(Exception):
    """Base class of every error raised by toric_gs.

    Attributes:
        kind: machine readable error kind, e.g. `"OriginNotInterior"`
        msg: the unformatted error message
        index: offending facet / vertex index when there is one
        pointer: JSON pointer into the input document when there is one
    """

    def __init__(
        self,
        kind: str,
        msg: str,
        *,
        index: int | None = None,
        pointer: str | None = None,
    ) -> None:
        super().__init__(f"{kind}: {msg}")
        self.kind = kind
        self.msg = msg
        self.index = index
        self.pointer = pointer

    def to_dict(self) -> dict[str, Any]:
        """Structured form written by the CLI on stderr."""
        out: dict[str, Any] = {"kind": self.kind, "message": self.msg}
        if self.index is not None:
            out["index"] = self.index
        if self.pointer is not None:
            out["pointer"] = self.pointer
        return out


class PolytopeError(ToricGSError, ValueError):
    """Invalid polytope data (unbounded, empty, origin not interior, ...)."""


class WeightError(ToricGSError, ValueError):
    """Weight function that is not positive on the polytope or is malformed."""


class SchemaError(ToricGSError, ValueError):
    """Input document that does not match the expected schema."""


class PotentialError(ToricGSError, ValueError):
    """Grid potential that is not convex, leaves the polytope or mismatches its grid."""


class QuadratureError(ToricGSError, ArithmeticError):
    """Numerical integration that did not reach its tolerance."""


class SolverError(ToricGSError, ArithmeticError):
    """Iterative solver failure.

    Attributes:
        history: damping factors / residuals recorded before the failure
    """

    def __init__(
        self,
        kind: str,
        msg: str,
        *,
        history: list[float] | None = None,
        index: int | None = None,
    ) -> None:
        super().__init__(kind, msg, index=index)
        self.history = history or []

    def to_dict(self) -> dict[str, Any]:
        out = super().to_dict()
        if self.history:
            out["history"] = self.history
        return out


class Estimate(NamedTuple):
    """A floating result together with its error estimate."""

    value: float
    error: float
