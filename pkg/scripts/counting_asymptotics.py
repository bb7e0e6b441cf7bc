#!/usr/bin/env python3
"""Sweep the counting horizon T and tabulate N(T) e^{-T} against m(B)/Lyapunov.

Example:
    python scripts/counting_asymptotics.py --map '{"kind":"blaschke","zeros":[[0,0],[0.5,0]],"rotation":0}' --Tmax 12
    python scripts/counting_asymptotics.py --map '{"kind":"monomial","d":2}' --Tmax 30 --arc 0,3.14159265
"""

import argparse

import numpy as np

from innerdyn.blaschke import lyapunov_exponent
from innerdyn.circle import Arc
from innerdyn.cli import build_circle_map, fmt, load_map_config
from innerdyn.counting import asymptotic_report, enumerate_orbit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", required=True)
    ap.add_argument("--Tmax", type=float, default=12.0)
    ap.add_argument("--x", type=float, default=0.0)
    ap.add_argument("--steps", type=int, default=24)
    ap.add_argument("--arc", action="append", help="restrict to arc 'a,b'")
    args = ap.parse_args()

    F = build_circle_map(load_map_config(args.map))
    lam = lyapunov_exponent(F)
    led = enumerate_orbit(F, args.x, args.Tmax)
    arcs = [Arc.from_endpoints(*(float(t) for t in s.split(",")))
            for s in (args.arc or [])]
    mB = sum(a.measure for a in arcs) if arcs else 1.0
    sub = led.restricted(arcs) if arcs else led

    print(f"# map {F.label()}  Lyapunov {fmt(lam)}  m(B) {fmt(mB)}")
    print("T,N,N_exp,prediction,ratio,cesaro")
    grid = np.linspace(args.Tmax / args.steps, args.Tmax, args.steps)
    for row in asymptotic_report(sub, lam, mB, grid):
        ces = sub.cesaro_average(row.T)
        print(",".join(fmt(v) for v in
                       (row.T, row.N, row.scaled, row.predicted, row.ratio,
                        ces * lam / mB)))


if __name__ == "__main__":
    main()
