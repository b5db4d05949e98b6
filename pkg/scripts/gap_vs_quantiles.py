"""Tabulate how the trace/variance gap of one quantile block shrinks as K grows.

    python3 scripts/gap_vs_quantiles.py --seed 3 --units 12 --draws 5000
"""
import argparse

import numpy as np

from histmfa.distributions import histogram_from_samples
from histmfa.quantiles import build_quantile_table, center_columns, trace_variance_gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--units", type=int, default=12)
    ap.add_argument("--draws", type=int, default=5000)
    ap.add_argument("--ks", default="5,10,20,40,80,160")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    samples = [rng.normal(rng.uniform(0, 3), rng.uniform(0.5, 2), args.draws) for _ in range(args.units)]
    print(f"{'K':>5} {'Tr/K':>10} {'Var':>10} {'gap':>10} {'K*gap':>8}")
    for K in (int(k) for k in args.ks.split(",")):
        hs = [histogram_from_samples(x, K) for x in samples]
        rep = trace_variance_gap(center_columns(build_quantile_table("x", hs, K)), hs)
        print(f"{K:>5} {rep.trace_per_bin:>10.5f} {rep.variance:>10.5f} {rep.gap:>10.5f} {K * rep.gap:>8.4f}")


if __name__ == "__main__":
    main()
