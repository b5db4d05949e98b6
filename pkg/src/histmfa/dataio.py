"""Reading and writing microdata, histogram tables and model reports."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distributions import DomainError, Histogram, histogram_from_samples
from .mfa import MfaModel, contributions


class ParseError(ValueError):
    """Malformed input text."""


class ValidationError(ValueError):
    """Well-formed input that violates a histogram invariant."""


@dataclass(frozen=True, eq=False)
class DistributionalTable:
    """A complete units x variables grid of histograms."""

    units: tuple[str, ...]
    variables: tuple[str, ...]
    cells: Mapping[tuple[str, str], Histogram]

    def __post_init__(self):
        units, variables = tuple(self.units), tuple(self.variables)
        if len(set(units)) != len(units):
            raise ValidationError("unit ids must be unique")
        if len(set(variables)) != len(variables):
            raise ValidationError("variable ids must be unique")
        missing = [(u, v) for u in units for v in variables if (u, v) not in self.cells]
        if missing:
            u, v = missing[0]
            raise ValidationError(
                f"missing cell for unit {u!r}, variable {v!r} ({len(missing)} missing)"
            )
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cells", dict(self.cells))

    def column(self, variable: str) -> list[Histogram]:
        if variable not in self.variables:
            raise DomainError(f"unknown variable {variable!r}")
        return [self.cells[u, variable] for u in self.units]

    def cell(self, unit: str, variable: str) -> Histogram:
        if unit not in self.units:
            raise DomainError(f"unknown unit {unit!r}")
        if variable not in self.variables:
            raise DomainError(f"unknown variable {variable!r}")
        return self.cells[unit, variable]

    def __eq__(self, other):
        if not isinstance(other, DistributionalTable):
            return NotImplemented
        return (
            self.units == other.units
            and self.variables == other.variables
            and all(self.cells[k] == other.cells[k] for k in self.cells)
        )

    def __len__(self):
        return len(self.cells)


def _finite(text: str, where: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"{where}: non-numeric value {text!r}") from None
    if not math.isfinite(x):
        raise ParseError(f"{where}: non-finite value {text!r}")
    return x


def parse_microdata_csv(
    text: str, quantiles: int = 20, quantiles_for: Mapping[str, int] | None = None
) -> DistributionalTable:
    """Group ``unit,variable,value`` rows and bin each group equi-depth.

    ``quantiles`` is the default bin count; ``quantiles_for`` overrides it
    per variable. Units and variables keep their order of first appearance.
    """
    overrides = dict(quantiles_for or {})
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("line 1: empty input, header required") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise ParseError(f"line 1: duplicate column in header {header}")
    missing = [c for c in ("unit", "variable", "value") if c not in header]
    if missing:
        raise ParseError(f"line 1: missing column(s) {', '.join(missing)}")
    iu, iv, ix = header.index("unit"), header.index("variable"), header.index("value")

    groups: dict[tuple[str, str], list[float]] = {}
    units: dict[str, None] = {}
    variables: dict[str, None] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        unit, var = row[iu].strip(), row[iv].strip()
        if not unit or not var:
            raise ParseError(f"line {line_no}: empty unit or variable id")
        value = _finite(row[ix].strip(), f"line {line_no}")
        units.setdefault(unit)
        variables.setdefault(var)
        groups.setdefault((unit, var), []).append(value)

    if not groups:
        raise DomainError("no data rows")
    cells = {}
    for u in units:
        for v in variables:
            samples = groups.get((u, v))
            if not samples:
                raise DomainError(f"empty group for unit {u!r}, variable {v!r}")
            K = overrides.get(v, quantiles)
            cells[u, v] = histogram_from_samples(samples, K).to_histogram()
    return DistributionalTable(tuple(units), tuple(variables), cells)


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} not allowed")


def parse_histogram_json(text: str) -> DistributionalTable:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("units"), list):
        raise ParseError("top level must be an object with a 'units' list")
    units, variables, cells = [], {}, {}
    for entry in doc["units"]:
        if not isinstance(entry, dict) or "id" not in entry or not isinstance(entry.get("cells"), dict):
            raise ParseError("each unit needs an 'id' and a 'cells' object")
        uid = str(entry["id"])
        units.append(uid)
        for var, cell in entry["cells"].items():
            variables.setdefault(var)
            where = f"unit {uid!r}, variable {var!r}"
            if not isinstance(cell, dict) or "bounds" not in cell or "weights" not in cell:
                raise ParseError(f"{where}: cell needs 'bounds' and 'weights'")
            bounds, weights = cell["bounds"], cell["weights"]
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in [*bounds, *weights]):
                raise ParseError(f"{where}: bounds and weights must be numbers")
            if len(bounds) != len(weights) + 1 or not weights:
                raise ValidationError(
                    f"{where}: ragged cell with {len(bounds)} bounds and {len(weights)} weights"
                )
            total = math.fsum(weights)
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(f"{where}: weights sum to {total!r}, expected 1")
            try:
                cells[uid, var] = Histogram(np.array(bounds, float), np.array(weights, float))
            except DomainError as exc:
                raise ValidationError(f"{where}: {exc}") from None
    return DistributionalTable(tuple(units), tuple(variables), cells)


def emit_histogram_json(table: DistributionalTable) -> str:
    """Canonical json text; floats use the shortest round-tripping decimal."""
    doc = {
        "units": [
            {
                "id": u,
                "cells": {
                    v: {
                        "bounds": [float(x) for x in table.cells[u, v].bounds],
                        "weights": [float(x) for x in table.cells[u, v].weights],
                    }
                    for v in table.variables
                },
            }
            for u in table.units
        ]
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


REPORT_FILES = (
    "eigenvalues.csv",
    "variable_scores.csv",
    "individual_scores.csv",
    "contributions.csv",
    "rv_matrix.csv",
)


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def eigenvalue_rows(model: MfaModel):
    return [
        (f"comp {a + 1}", f"{ev:.6f}", f"{pc:.2f}", f"{cum:.2f}")
        for a, (ev, pc, cum) in enumerate(
            zip(model.eigenvalues, model.percent, model.cumulative_percent)
        )
    ]


def model_to_dict(model: MfaModel, units) -> dict:
    contrib = contributions(model)
    axes = list(range(model.rank))
    labels = list(model.matrix.labels)
    return {
        "variables": model.variables,
        "units": list(units),
        "block_weights": dict(zip(model.variables, model.block_weights.tolist())),
        "eigenvalues": model.eigenvalues.tolist(),
        "percent": model.percent.tolist(),
        "cumulative_percent": model.cumulative_percent.tolist(),
        "individual_coordinates": model.row_coordinates.tolist(),
        "partial_individual_coordinates": {
            v: model.partial_row_coordinates[j].tolist() for j, v in enumerate(model.variables)
        },
        "columns": labels,
        "column_active": (model.column_metric > 0).tolist(),
        "variable_scores": np.column_stack(
            [
                np.concatenate([model.variable_scores(j, a) for j in range(model.p)])
                for a in axes
            ]
        ).tolist()
        if axes
        else [],
        "column_correlations": np.nan_to_num(model.column_correlations(), nan=0.0).tolist(),
        "contributions": {
            "individual_cr": contrib.row_cr.tolist(),
            "individual_ca": contrib.row_ca.tolist(),
            "column_cr": contrib.column_cr.tolist(),
            "column_ca": contrib.column_ca.tolist(),
        },
        "rv_matrix": model.rv.tolist(),
    }


def emit_model_report(model: MfaModel, units, out_dir: str, formats=("csv", "json")) -> list[str]:
    """Write report files under ``out_dir`` and return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    axes = range(model.rank)
    axis_cols = [f"axis{a + 1}" for a in axes]
    if "csv" in formats:
        path = os.path.join(out_dir, "eigenvalues.csv")
        _write_csv(path, ("component", "eigenvalue", "percent", "cumulative_percent"),
                   eigenvalue_rows(model))
        written.append(path)

        rows = []
        for j, var in enumerate(model.variables):
            scores = np.column_stack([model.variable_scores(j, a) for a in axes])
            corr = model.column_correlations()[model.matrix.block_slice(j)]
            active = model.column_metric[model.matrix.block_slice(j)] > 0
            for l in range(scores.shape[0]):
                rows.append(
                    (var, f"q{l}", "active" if active[l] else "supplementary",
                     *map(repr, scores[l].tolist()),
                     *(repr(float(x)) if np.isfinite(x) else "" for x in corr[l]))
                )
        path = os.path.join(out_dir, "variable_scores.csv")
        _write_csv(path, ("variable", "column", "role", *axis_cols,
                          *(f"corr_{c}" for c in axis_cols)), rows)
        written.append(path)

        rows = []
        for i, u in enumerate(units):
            rows.append((u, "global", *map(repr, model.row_coordinates[i].tolist())))
        for j, var in enumerate(model.variables):
            for i, u in enumerate(units):
                rows.append((u, var, *map(repr, model.partial_row_coordinates[j][i].tolist())))
        path = os.path.join(out_dir, "individual_scores.csv")
        _write_csv(path, ("unit", "block", *axis_cols), rows)
        written.append(path)

        contrib = contributions(model)
        rows = []
        for i, u in enumerate(units):
            rows.append(("individual", u, "cr", *map(repr, contrib.row_cr[i].tolist())))
            rows.append(("individual", u, "ca", *map(repr, contrib.row_ca[i].tolist())))
        for k, lab in enumerate(model.matrix.labels):
            rows.append(("column", lab, "cr", *map(repr, contrib.column_cr[k].tolist())))
            rows.append(("column", lab, "ca", *map(repr, contrib.column_ca[k].tolist())))
        path = os.path.join(out_dir, "contributions.csv")
        _write_csv(path, ("kind", "id", "measure", *axis_cols), rows)
        written.append(path)

        path = os.path.join(out_dir, "rv_matrix.csv")
        _write_csv(path, ("variable", *model.variables),
                   [(v, *map(repr, model.rv[j].tolist())) for j, v in enumerate(model.variables)])
        written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "model.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model_to_dict(model, units), fh, indent=1, allow_nan=False)
            fh.write("\n")
        written.append(path)
    return written
