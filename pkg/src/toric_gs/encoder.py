"""Canonical serialization of run reports.

Rationals are written as "p/q" strings and floats as their shortest round trip
decimal, with keys sorted, so identical runs produce byte-identical output.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

import numpy as np

from . import rational as rq
from ._version import __version__
from .polytope import LabelledPolytope
from .quadrature import WeightFunction

ReportFormat = Literal["json", "md"]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays, Fractions and tuples."""
    if isinstance(obj, Fraction):
        return rq.format_fraction(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def polytope_to_dict(poly: LabelledPolytope) -> dict[str, Any]:
    """Facet form with unit labels, the canonical polytope input."""
    return {
        "dim": poly.dim,
        "facets": [
            {"normal": [rq.format_fraction(x) for x in f.normal], "label": rq.format_fraction(f.label)}
            for f in poly.facets
        ],
    }


def weight_to_dict(weight: WeightFunction) -> dict[str, Any]:
    """The weight document that parses back to `weight`."""
    out: dict[str, Any] = {"kind": weight.kind}
    if weight.kind == "polynomial":
        out["coeffs"] = [
            {"powers": list(powers), "c": rq.format_fraction(c)} for powers, c in weight.coeffs
        ]
        return out
    out["a0"] = rq.format_fraction(weight.a0)
    if weight.kind != "constant":
        out["b"] = [rq.format_fraction(x) for x in weight.b]
    return out


@dataclass
class RunReport:
    """Everything a command writes on stdout.

    Attributes:
        command: the subcommand
        inputs: canonicalized inputs, enough to re-run the command
        results: command specific values
        diagnostics: tolerances, iteration counts and oracle comparisons
        seed: seed of the run when it is random
        version: package version
    """

    command: str
    inputs: dict[str, Any]
    results: dict[str, Any]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__

    def to_dict(self) -> dict[str, Any]:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "diagnostics": self.diagnostics,
            "version": self.version,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return to_jsonable(out)


def dumps_json(report: RunReport) -> str:
    """Deterministic JSON rendering."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=True)


def _flatten(prefix: str, value: Any) -> list[tuple[str, Any]]:
    if isinstance(value, dict):
        rows = []
        for key in sorted(value):
            rows.extend(_flatten(f"{prefix}.{key}" if prefix else key, value[key]))
        return rows
    return [(prefix, value)]


def _table(data: dict[str, Any]) -> list[str]:
    lines = ["| key | value |", "| --- | --- |"]
    for key, value in _flatten("", data):
        lines.append(f"| `{key}` | `{json.dumps(value, sort_keys=True)}` |")
    return lines


def dumps_markdown(report: RunReport) -> str:
    """Markdown rendering with the same values as the JSON rendering."""
    data = report.to_dict()
    header = f"version `{data['version']}`"
    if "seed" in data:
        header += f", seed `{data['seed']}`"
    lines = [f"# toric-gs {data['command']}", "", header]
    lines += ["", "## Inputs", "", "```json", json.dumps(data["inputs"], indent=2, sort_keys=True), "```"]
    lines += ["", "## Results", ""] + _table(data["results"])
    if data["diagnostics"]:
        lines += ["", "## Diagnostics", ""] + _table(data["diagnostics"])
    return "\n".join(lines) + "\n"


def dumps(report: RunReport, fmt: ReportFormat = "json") -> str:
    """Render a report as `json` or `md`."""
    return dumps_markdown(report) if fmt == "md" else dumps_json(report)
