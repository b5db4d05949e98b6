import csv
import io
import json

import numpy as np
import pytest

from histmfa.analysis import fit_table
from histmfa.dataio import (
    DistributionalTable,
    ParseError,
    ValidationError,
    eigenvalue_rows,
    emit_histogram_json,
    emit_model_report,
    parse_histogram_json,
    parse_microdata_csv,
)
from histmfa.distributions import DomainError, Histogram, histogram_from_samples
from histmfa.mfa import global_mfa

from conftest import random_blockset


def test_microdata_single_bin():
    t = parse_microdata_csv("unit,variable,value\na,x,3\na,x,1\na,x,2\n", quantiles=1)
    h = t.cell("a", "x")
    np.testing.assert_array_equal(h.bounds, [1, 3])
    np.testing.assert_array_equal(h.weights, [1])


def test_microdata_column_order_free():
    t = parse_microdata_csv("value,unit,variable\n1,a,x\n2,a,x\n", quantiles=1)
    np.testing.assert_array_equal(t.cell("a", "x").bounds, [1, 2])


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("unit,unit,value\na,a,1\n", "line 1: duplicate"),
        ("unit,value\na,1\n", "line 1: missing column.*variable"),
        ("", "line 1"),
        ("unit,variable,value\na,x,1\na,x,abc\n", "line 3: non-numeric"),
        ("unit,variable,value\na,x,nan\n", "line 2: non-finite"),
        ("unit,variable,value\na,x,inf\n", "line 2: non-finite"),
        ("unit,variable,value\na,x,1,2\n", "line 2"),
    ],
)
def test_microdata_parse_errors(text, pattern):
    with pytest.raises(ParseError, match=pattern):
        parse_microdata_csv(text)


def test_microdata_empty_group():
    # unit b never reports variable y
    text = "unit,variable,value\na,x,1\na,y,2\nb,x,3\n"
    with pytest.raises(DomainError, match="'b'.*'y'"):
        parse_microdata_csv(text, quantiles=1)


def test_microdata_seeded_grid():
    rng = np.random.default_rng(7)
    lines = ["unit,variable,value"]
    for u in ("u1", "u2"):
        for v in ("A", "B"):
            lines += [f"{u},{v},{x!r}" for x in rng.gamma(3, size=1000).tolist()]
    text = "\n".join(lines) + "\n"
    t = parse_microdata_csv(text, quantiles=10, quantiles_for={"B": 5})
    assert t.units == ("u1", "u2") and t.variables == ("A", "B")
    assert len(t) == 4
    assert t.cell("u1", "A").n_bins == 10 and t.cell("u2", "B").n_bins == 5
    for h in t.cells.values():
        assert np.all(np.diff(h.bounds) >= 0)
        assert h.weights.sum() == pytest.approx(1.0)
    assert parse_microdata_csv(text, quantiles=10, quantiles_for={"B": 5}) == t


def _table(rng, n_units, n_vars, bins=4):
    units = tuple(f"unit{i}" for i in range(n_units))
    variables = tuple(f"var{j}" for j in range(n_vars))
    cells = {}
    for u in units:
        for v in variables:
            w = rng.uniform(0.1, 1, bins)
            w /= w.sum()
            cells[u, v] = Histogram(np.sort(rng.normal(100, 20, bins + 1)), w)
    return DistributionalTable(units, variables, cells)


def test_json_single_cell_roundtrip():
    t = DistributionalTable(("a",), ("x",), {("a", "x"): Histogram([0.1, 0.7], [1.0])})
    text = emit_histogram_json(t)
    assert parse_histogram_json(text) == t
    assert emit_histogram_json(parse_histogram_json(text)) == text


def test_json_blood_shaped_roundtrip(rng):
    t = _table(rng, 14, 3)
    back = parse_histogram_json(emit_histogram_json(t))
    assert len(back) == 42
    assert back == t
    for key, h in t.cells.items():
        assert np.array_equal(back.cells[key].bounds, h.bounds)


def test_json_weight_violation():
    doc = {"units": [{"id": "a", "cells": {"x": {"bounds": [0, 1, 2], "weights": [0.45, 0.45]}}}]}
    with pytest.raises(ValidationError, match="'a'.*'x'|a.*x"):
        parse_histogram_json(json.dumps(doc))


def test_json_ragged():
    doc = {"units": [{"id": "a", "cells": {"x": {"bounds": [0, 1, 2], "weights": [1.0]}}}]}
    with pytest.raises(ValidationError):
        parse_histogram_json(json.dumps(doc))


def test_json_rejects_nonfinite():
    text = '{"units": [{"id": "a", "cells": {"x": {"bounds": [0, NaN], "weights": [1]}}}]}'
    with pytest.raises(ParseError):
        parse_histogram_json(text)
    text = '{"units": [{"id": "a", "cells": {"x": {"bounds": [0, Infinity], "weights": [1]}}}]}'
    with pytest.raises(ParseError):
        parse_histogram_json(text)


def test_json_incomplete_grid():
    doc = {"units": [{"id": "a", "cells": {"x": {"bounds": [0, 1], "weights": [1]}}},
                     {"id": "b", "cells": {"y": {"bounds": [0, 1], "weights": [1]}}}]}
    with pytest.raises(ValidationError):
        parse_histogram_json(json.dumps(doc))


def test_json_malformed():
    with pytest.raises(ParseError, match="line"):
        parse_histogram_json("{\n  oops")
    with pytest.raises(ParseError):
        parse_histogram_json("[]")


def test_eigenvalue_csv_single_block(rng, tmp_path):
    m = global_mfa(random_blockset(rng, 6, [4]))
    emit_model_report(m, [f"u{i}" for i in range(6)], str(tmp_path))
    with open(tmp_path / "eigenvalues.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["component", "eigenvalue", "percent", "cumulative_percent"]
    assert len(rows) - 1 == m.rank
    assert rows[1][0] == "comp 1" and rows[1][1] == "1.000000"
    assert rows[-1][3] == "100.00"


def test_eigenvalue_row_format():
    class Fake:
        eigenvalues = np.array([2.28, 0.6686])
        percent = np.array([71.5512, 20.9812])
        cumulative_percent = np.array([71.5512, 92.5324])

    assert eigenvalue_rows(Fake)[0] == ("comp 1", "2.280000", "71.55", "71.55")


def test_report_csv_json_agree(rng, tmp_path):
    units = [f"u{i}" for i in range(7)]
    m = global_mfa(random_blockset(rng, 7, [3, 5]))
    paths = emit_model_report(m, units, str(tmp_path))
    names = sorted(p.rsplit("/", 1)[-1] for p in paths)
    assert names == sorted(["eigenvalues.csv", "variable_scores.csv", "individual_scores.csv",
                            "contributions.csv", "rv_matrix.csv", "model.json"])
    doc = json.loads((tmp_path / "model.json").read_text())
    with open(tmp_path / "eigenvalues.csv") as fh:
        rows = list(csv.DictReader(fh))
    for r, ev, pc in zip(rows, doc["eigenvalues"], doc["percent"]):
        assert float(r["eigenvalue"]) == pytest.approx(ev, abs=5e-7)
        assert float(r["percent"]) == pytest.approx(pc, abs=5e-3)
    with open(tmp_path / "individual_scores.csv") as fh:
        rows = [r for r in csv.DictReader(fh) if r["block"] == "global"]
    got = np.array([[float(r[f"axis{a + 1}"]) for a in range(m.rank)] for r in rows])
    np.testing.assert_array_equal(got, np.array(doc["individual_coordinates"]))
    with open(tmp_path / "rv_matrix.csv") as fh:
        text = fh.read()
    assert "V0" in text and "V1" in text


def test_csv_reparse_of_table_samples():
    # csv parse is total on emitted simulation csv
    from histmfa.simulate import SimulationDesign, simulate

    data = simulate(3, SimulationDesign(n_units=3, n_draws=50))
    t = parse_microdata_csv(data.to_csv(), quantiles=5)
    assert t.variables == ("Gauss", "Beta") and len(t.units) == 3
    expect = histogram_from_samples(data.gauss[0], 5).to_histogram()
    assert t.cell("u1", "Gauss") == expect


def test_fit_table_end_to_end(rng):
    t = _table(rng, 8, 2, bins=6)
    m = fit_table(t, quantiles=10)
    assert m.p == 2 and m.rank >= 1
    assert m.matrix.values.shape == (8, 22)
    with pytest.raises(DomainError):
        fit_table(t, quantiles_for={"nope": 3})
