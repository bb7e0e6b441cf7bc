#!/usr/bin/env python3
"""Kolmogorov-Smirnov distance of normalized Birkhoff sums as n grows.

Example:
    python scripts/clt_sweep.py --map '{"kind":"monomial","d":2}' --samples 20000
"""

import argparse

from innerdyn.cli import build_circle_map, fmt, load_map_config
from innerdyn.observables import get_observable
from innerdyn.stochastic import birkhoff_samples, clt_diagnostics, green_kubo_variance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", required=True)
    ap.add_argument("--obs", default="cos")
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--n", type=int, nargs="+",
                    default=[64, 256, 1024, 4096])
    args = ap.parse_args()

    F = build_circle_map(load_map_config(args.map))
    h = get_observable(args.obs)
    sigma2 = green_kubo_variance(F, h)
    print(f"# map {F.label()}  sigma2_gk {fmt(sigma2)}")
    print("n,ks,var_ratio,exact_angles")
    for n in args.n:
        sample = birkhoff_samples(F, h, n, args.samples, args.seed)
        ks, ratio = clt_diagnostics(sample, sigma2)
        print(",".join(fmt(v) for v in (n, ks, ratio, sample.exact_angles)))


if __name__ == "__main__":
    main()
