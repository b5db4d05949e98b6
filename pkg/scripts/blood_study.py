"""Fit the BLOOD table (exported to histogram json) and print its eigenvalue and kurtosis tables.

    python3 scripts/blood_study.py blood.json --out blood_out
"""
import argparse
import os

from histmfa.analysis import build_blocks, kurtosis_table
from histmfa.dataio import eigenvalue_rows, emit_model_report, parse_histogram_json
from histmfa.mfa import global_mfa
from histmfa.plots import PlotSpec, render


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--quantiles", type=int, default=20)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    with open(args.path, encoding="utf-8") as fh:
        table = parse_histogram_json(fh.read())
    model = global_mfa(build_blocks(table, args.quantiles))
    for row in eigenvalue_rows(model)[:6]:
        print(" & ".join(row))
    print()
    print("unit".ljust(10) + "".join(v.rjust(13) for v in table.variables))
    for u, row in zip(table.units, kurtosis_table(table)):
        print(u.ljust(10) + "".join(f"{k:13.2f}" for k in row))

    if args.out:
        emit_model_report(model, table.units, args.out)
        specs = [PlotSpec("fan"), PlotSpec("circle"), PlotSpec("scree")]
        specs += [PlotSpec("plane", variables=(v,), labels="means", mean_shading=True)
                  for v in table.variables]
        for spec in specs:
            with open(os.path.join(args.out, spec.filename), "w", encoding="utf-8") as fh:
                fh.write(render(spec, model, table))


if __name__ == "__main__":
    main()
