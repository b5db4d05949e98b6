import hashlib
import os

import numpy as np
import pytest

from histmfa.cli import main, read_config
from histmfa.dataio import DistributionalTable, emit_histogram_json, parse_histogram_json, parse_microdata_csv
from histmfa.distributions import Histogram

from conftest import normal_qf

DATA = os.path.join(os.path.dirname(__file__), "data")


def _digest(directory):
    out = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as fh:
            out[name] = hashlib.sha256(fh.read()).hexdigest()
    return out


def _write_table(path, table):
    path.write_text(emit_histogram_json(table))
    return str(path)


# ---------- ingest ----------

def test_ingest_golden(tmp_path):
    out = tmp_path / "t.json"
    assert main(["ingest", "--input", os.path.join(DATA, "microdata.csv"), "--quantiles", "4",
                 "--out", str(out)]) == 0
    with open(os.path.join(DATA, "microdata_k4.json")) as fh:
        assert out.read_text() == fh.read()


def test_ingest_json_idempotent(tmp_path):
    once = tmp_path / "once.json"
    twice = tmp_path / "twice.json"
    assert main(["ingest", "--input", os.path.join(DATA, "microdata_k4.json"), "--out", str(once)]) == 0
    assert main(["ingest", "--input", str(once), "--out", str(twice)]) == 0
    assert once.read_bytes() == twice.read_bytes()


def test_ingest_bad_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("unit,variable,value\na,x,oops\n")
    assert main(["ingest", "--input", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_ingest_missing_file_and_option(tmp_path):
    assert main(["ingest", "--input", str(tmp_path / "nope.csv")]) == 2
    assert main(["ingest"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["ingest", "--quantiles", "0", "--input", "x"])
    assert exc.value.code == 2


def test_quantiles_for(tmp_path):
    out = tmp_path / "t.json"
    args = ["ingest", "--input", os.path.join(DATA, "microdata.csv"), "--quantiles", "4",
            "--quantiles-for", "weight=2", "--out", str(out)]
    assert main(args) == 0
    t = parse_histogram_json(out.read_text())
    assert t.cell("east", "height").n_bins == 4 and t.cell("east", "weight").n_bins == 2
    assert main(args[:-2] + ["--quantiles-for", "weight"]) == 2


# ---------- simulate ----------

def test_simulate_deterministic(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert main(["simulate", "--seed", "4", "--out", str(a)]) == 0
    assert main(["simulate", "--seed", "4", "--out", str(b)]) == 0
    assert main(["simulate", "--seed", "5", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_simulate_design(tmp_path):
    path = tmp_path / "s.csv"
    assert main(["simulate", "--seed", "1", "--out", str(path)]) == 0
    text = path.read_text()
    rows = text.splitlines()[1:]
    assert len(rows) == 10 * 2 * 1000
    values = {}
    for r in rows:
        u, v, x = r.split(",")
        values.setdefault((u, v), []).append(float(x))
    assert len({u for u, _ in values}) == 10
    for (u, v), xs in values.items():
        xs = np.array(xs)
        if v == "Gauss":
            assert abs(xs.mean() - 10.0) <= 0.1
        else:
            # shift in [0, 10], scale in [4, 10]
            assert xs.min() >= 0.0 and xs.max() <= 20.0
    table = parse_microdata_csv(text, quantiles=18)
    assert table.variables == ("Gauss", "Beta")


# ---------- distance ----------

def _distance(capsys, path, units, variable="x"):
    assert main(["distance", "--input", path, "--units", units, "--variable", variable]) == 0
    out = capsys.readouterr().out
    return {k: float(v) for k, v in (line.split("=") for line in out.split())}


def test_distance_self_and_translation(tmp_path, capsys):
    h = Histogram([0.0, 1.0, 3.0, 4.0], [0.2, 0.5, 0.3])
    cells = {("a", "x"): h, ("b", "x"): h.shifted(2.5)}
    path = _write_table(tmp_path / "t.json", DistributionalTable(("a", "b"), ("x",), cells))
    r = _distance(capsys, path, "a,a")
    assert r == {"d2": 0.0, "location": 0.0, "scale": 0.0, "shape": 0.0, "rho": 1.0}
    r = _distance(capsys, path, "a,b")
    assert r["d2"] == pytest.approx(6.25)
    assert r["location"] == pytest.approx(6.25)
    assert r["scale"] == pytest.approx(0.0, abs=1e-12)
    assert r["shape"] == pytest.approx(0.0, abs=1e-12)


def test_distance_gaussian_pair(tmp_path, capsys):
    K = 1000
    f, g = normal_qf(0, 1, K), normal_qf(2, 2, K)
    w = np.full(K, 1.0 / K)
    cells = {("a", "x"): Histogram(f.values, w), ("b", "x"): Histogram(g.values, w)}
    path = _write_table(tmp_path / "g.json", DistributionalTable(("a", "b"), ("x",), cells))
    r = _distance(capsys, path, "a,b")
    assert 3.9 <= r["location"] <= 4.1
    assert 0.95 <= r["scale"] <= 1.05
    assert r["shape"] <= 0.01
    assert r["location"] + r["scale"] + r["shape"] == pytest.approx(r["d2"], abs=1e-9)


def test_distance_unknown_ids(tmp_path):
    path = os.path.join(DATA, "microdata_k4.json")
    assert main(["distance", "--input", path, "--units", "north,west", "--variable", "height"]) == 1
    assert main(["distance", "--input", path, "--units", "north,east", "--variable", "age"]) == 1
    assert main(["distance", "--input", path, "--units", "north", "--variable", "height"]) == 2


# ---------- mfa ----------

def test_mfa_blood_like(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["mfa", "--input", os.path.join(DATA, "blood_like.json"), "--quantiles", "20",
               "--out", str(out), "--plots", "fan,circle,plane,scree"])
    assert rc == 0
    files = set(os.listdir(out))
    for name in ("eigenvalues.csv", "variable_scores.csv", "individual_scores.csv", "contributions.csv",
                 "rv_matrix.csv", "model.json", "moments.csv", "moment_axes.csv",
                 "fan_1_2.svg", "circle_1_2.svg", "scree_1_2.svg", "plane-Cholesterol_1_2.svg"):
        assert name in files
    with open(out / "variable_scores.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 3 * 21
    assert "first plane explains" in capsys.readouterr().out


def test_mfa_single_variable(tmp_path):
    src = tmp_path / "one.csv"
    lines = [l for l in open(os.path.join(DATA, "microdata.csv")) if ",weight," not in l]
    src.write_text("".join(lines))
    out = tmp_path / "out"
    assert main(["mfa", "--input", str(src), "--quantiles", "3", "--out", str(out),
                 "--plots", "fan,scree,plane"]) == 0
    assert "plane-height_1_2.svg" in os.listdir(out)


def test_mfa_rerun_byte_identical(tmp_path):
    args = ["--input", os.path.join(DATA, "blood_like.json"), "--plots", "fan,circle,plane,scree",
            "--extremes", "weight:0.5", "--mean-shading"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["mfa", *args, "--out", str(a)]) == 0
    assert main(["mfa", *args, "--out", str(b)]) == 0
    assert _digest(a) == _digest(b)


def test_mfa_degenerate_block(tmp_path, capsys):
    cells = {}
    for i, u in enumerate("abcd"):
        cells[u, "flat"] = Histogram([0.0, 1.0], [1.0])
        cells[u, "ok"] = Histogram([i, i + 1.0 + i], [1.0])
    path = _write_table(tmp_path / "t.json", DistributionalTable(tuple("abcd"), ("flat", "ok"), cells))
    assert main(["mfa", "--input", path, "--out", str(tmp_path / "o")]) == 1
    assert "flat" in capsys.readouterr().err


def test_mfa_bad_plane_and_plots(tmp_path):
    base = ["mfa", "--input", os.path.join(DATA, "blood_like.json"), "--out", str(tmp_path / "o")]
    assert main(base + ["--plane", "1,1"]) == 2
    assert main(base + ["--plots", "pie"]) == 2
    assert main(base + ["--extremes", "weight:2"]) == 1
    assert main(base + ["--plots", "fan", "--plane", "1,99"]) == 1


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# run settings\ninput={os.path.join(DATA, 'microdata.csv')}\nquantiles=2\n"
                   "quantiles-for=weight=3\n")
    assert read_config(str(cfg))["quantiles_for"] == "weight=3"
    out = tmp_path / "t.json"
    assert main(["ingest", "--config", str(cfg), "--out", str(out)]) == 0
    t = parse_histogram_json(out.read_text())
    assert t.cell("north", "height").n_bins == 2 and t.cell("north", "weight").n_bins == 3
    assert main(["ingest", "--config", str(cfg), "--quantiles", "5", "--out", str(out)]) == 0
    assert parse_histogram_json(out.read_text()).cell("north", "height").n_bins == 5

    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=red\n")
    assert main(["ingest", "--config", str(bad)]) == 2


def test_config_mfa_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("quantiles=6\nplots=scree\nmean-shading=true\n")
    out = tmp_path / "o"
    assert main(["mfa", "--config", str(cfg), "--input", os.path.join(DATA, "blood_like.json"),
                 "--out", str(out)]) == 0
    assert "scree_1_2.svg" in os.listdir(out)
