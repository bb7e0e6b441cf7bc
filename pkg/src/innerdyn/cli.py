"""Command-line experiment runner.

Every subcommand validates its configuration, runs a deterministic
computation, and emits a CSV or JSON artifact embedding the full effective
configuration and a content hash, so any artifact can be reproduced and
checked byte for byte. Exit codes: 0 success, 2 configuration error,
3 budget or convergence failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import blaschke, coding, counting, observables, parabolic, shift, stochastic, transfer
from .circle import Arc, arcs_measure
from .errors import (BudgetExceeded, ConfigError, DivergentSeries, GapLost,
                     InnerdynError, NoConvergence, NoReturnWithinCap,
                     TailBoundExceeded)

_BUDGET_ERRORS = (BudgetExceeded, NoConvergence, GapLost, DivergentSeries,
                  NoReturnWithinCap, TailBoundExceeded)


def fmt(x) -> str:
    """17 significant digits: exact round trip for 64-bit floats."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _content_hash(config: dict, payload: str) -> str:
    h = hashlib.sha256()
    h.update(_canonical(config).encode())
    h.update(payload.encode())
    return h.hexdigest()


def write_csv(path, config: dict, header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    digest = _content_hash(config, payload)
    text = (f"# config: {_canonical(config)}\n"
            f"# hash: {digest}\n") + payload
    _write(path, text)
    return digest


def write_json(path, config: dict, data: dict) -> str:
    payload = _canonical(data)
    digest = _content_hash(config, payload)
    text = json.dumps({"config": config, "data": data, "hash": digest},
                      sort_keys=True, indent=1) + "\n"
    _write(path, text)
    return digest


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------

def load_map_config(spec: str) -> dict:
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            cfg = json.load(fh)
    else:
        try:
            cfg = json.loads(spec)
        except json.JSONDecodeError as e:
            raise ConfigError(f"map config is not valid JSON: {e}") from None
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("map config must be an object with a 'kind' field")
    return cfg


def build_circle_map(cfg: dict) -> blaschke.BlaschkeMap:
    kind = cfg.get("kind")
    if kind == "monomial":
        allowed = {"kind", "d", "rotation"}
        _reject_unknown(cfg, allowed)
        return blaschke.BlaschkeMap.monomial(int(cfg["d"]),
                                             float(cfg.get("rotation", 0.0)))
    if kind == "blaschke":
        allowed = {"kind", "zeros", "rotation"}
        _reject_unknown(cfg, allowed)
        zeros = [complex(re, im) for re, im in cfg["zeros"]]
        if zeros[0] != 0:
            raise ConfigError("zeros[0] must be [0,0]")
        return blaschke.BlaschkeMap(tuple(zeros), float(cfg.get("rotation", 0.0)))
    raise ConfigError(f"not a circle map kind: {kind!r}")


def build_parabolic_map(cfg: dict) -> parabolic.ParabolicMap:
    if cfg.get("kind") != "parabolic":
        raise ConfigError(f"not a parabolic map kind: {cfg.get('kind')!r}")
    _reject_unknown(cfg, {"kind", "poles", "translation"})
    return parabolic.build_parabolic([(float(b), float(t)) for b, t in cfg["poles"]],
                                     float(cfg.get("translation", 0.0)))


def build_symbolic_system(cfg: dict):
    _reject_unknown(cfg, {"alphabet", "incidence", "potential"})
    m = int(cfg["alphabet"])
    inc = cfg.get("incidence", "full")
    if inc == "full":
        S = shift.SymbolicSystem.full_shift(m)
    else:
        S = shift.SymbolicSystem(np.array(inc, dtype=np.uint8))
    pot = cfg.get("potential")
    psi = None
    if pot is not None:
        _reject_unknown(pot, {"depth", "values", "alpha", "v_alpha"})
        values = {coding.word_from_str(k): float(v) for k, v in pot["values"].items()}
        psi = shift.PotentialSpec(int(pot.get("depth", 1)), values,
                                  alpha=float(pot.get("alpha", 1.0)),
                                  v_alpha=float(pot.get("v_alpha", 0.0)))
    return S, psi


def _reject_unknown(cfg: dict, allowed: set):
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")


def _parse_arcs(arc_args) -> list[Arc]:
    arcs = []
    for spec in arc_args or []:
        try:
            a, b = (float(tok) for tok in spec.split(","))
        except ValueError:
            raise ConfigError(f"bad arc spec {spec!r}; expected 'a,b'") from None
        arcs.append(Arc.from_endpoints(a, b))
    return arcs


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("THERMO_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("THERMO_THREADS must be an integer") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    svals = [complex(s) for s in (args.s or ["1.0"])]
    rows = []
    for s in svals:
        M = transfer.assemble_operator(F, s, None, args.modes)
        data = transfer.leading_eigen(M)
        rows.append((s.real, s.imag, data.lam.real, data.lam.imag,
                     data.gap, data.residual))
    config = {"command": "spectrum", "map": cfg, "modes": args.modes,
              "s": [[s.real, s.imag] for s in svals]}
    write_csv(args.out, config,
              ["s_re", "s_im", "lambda_re", "lambda_im", "gap", "residual"], rows)
    return 0


def cmd_pressure(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    g = observables.get_observable(args.obs)
    rep = transfer.pressure_and_derivs(F, g, h=args.step, N=args.modes)
    config = {"command": "pressure", "map": cfg, "obs": args.obs,
              "step": args.step, "modes": args.modes}
    write_json(args.out, config, {
        "p0": rep.p0, "dp": rep.dp, "ddp": rep.ddp,
        "mean_prediction": rep.mean_prediction,
        "variance_prediction": rep.variance_prediction,
        "min_gap": rep.min_gap})
    return 0


def cmd_count(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    lam = blaschke.lyapunov_exponent(F)
    arcs = _parse_arcs(args.arc)
    strict = not args.closed
    led = counting.enumerate_orbit(F, args.x, args.T)
    sub = led.restricted(arcs) if arcs else led
    mB = arcs_measure(arcs) if arcs else 1.0
    grid = np.linspace(max(args.T / args.grid, 1e-6), args.T, args.grid)
    rows = []
    for t in grid:
        N = sub.count(t, strict=strict)
        rows.append((t, N, N * np.exp(-t) * lam / mB,
                     sub.cesaro_average(t)))
    config = {"command": "count", "map": cfg, "T": args.T, "x": args.x,
              "arcs": [[a.start, a.end] for a in arcs],
              "strict": strict, "grid": args.grid}
    write_csv(args.out, config, ["T", "N", "N_exp_ratio", "cesaro"], rows)
    return 0


def cmd_cesaro(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    lam = blaschke.lyapunov_exponent(F)
    arcs = _parse_arcs(args.arc)
    led = counting.enumerate_orbit(F, args.x, args.T)
    sub = led.restricted(arcs) if arcs else led
    mB = arcs_measure(arcs) if arcs else 1.0
    value = sub.cesaro_average(args.T)
    config = {"command": "cesaro", "map": cfg, "T": args.T, "x": args.x,
              "arcs": [[a.start, a.end] for a in arcs]}
    write_json(args.out, config, {"T": args.T, "cesaro": value,
                                  "prediction": mB / lam})
    return 0


def cmd_clt(args):
    if args.seed is None:
        raise ConfigError("--seed is mandatory for stochastic commands")
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    h = observables.get_observable(args.obs)
    sigma2_gk = stochastic.green_kubo_variance(F, h)
    sample = stochastic.birkhoff_samples(F, h, args.n, args.samples, args.seed)
    ks, ratio = stochastic.clt_diagnostics(sample, sigma2_gk)
    config = {"command": "clt", "map": cfg, "obs": args.obs, "n": args.n,
              "samples": args.samples, "seed": args.seed}
    write_json(args.out, config, {
        "n": args.n, "samples": args.samples, "seed": args.seed,
        "sigma2_gk": sigma2_gk,
        "sigma2_mc": ratio * sigma2_gk,
        "ks_stat": ks,
        "exact_angles": sample.exact_angles})
    return 0


def cmd_clark(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    cm = blaschke.clark_measure(F, args.alpha)
    config = {"command": "clark", "map": cfg, "alpha": args.alpha}
    write_json(args.out, config, {
        "atoms": [[float(t), float(m)] for t, m in zip(cm.locations, cm.masses)],
        "total_mass": cm.total_mass})
    return 0


def cmd_nevanlinna(args):
    cfg = load_map_config(args.map)
    F = build_circle_map(cfg)
    ws = []
    for spec in args.w or []:
        re_, im_ = (float(t) for t in spec.split(","))
        ws.append(complex(re_, im_))
    if args.random_w:
        if args.seed is None:
            raise ConfigError("--seed required with --random-w")
        from .rng import uniform_stream
        u = uniform_stream(args.seed, 2 * args.random_w)
        radii = 0.05 + 0.9 * u[::2]
        angles = 2 * np.pi * u[1::2]
        ws.extend(complex(r * np.cos(t), r * np.sin(t))
                  for r, t in zip(radii, angles))
    if not ws:
        raise ConfigError("give at least one --w or --random-w")
    rows = []
    worst = 0.0
    for w in ws:
        val = blaschke.nevanlinna(F, w)
        resid = abs(val - np.log(1.0 / abs(w)))
        worst = max(worst, resid)
        rows.append((w.real, w.imag, val, resid))
    config = {"command": "nevanlinna", "map": cfg,
              "w": [[w.real, w.imag] for w in ws], "seed": args.seed}
    write_json(args.out, config, {
        "points": [[a, b, c, d] for a, b, c, d in rows],
        "max_residual": worst})
    return 0


def cmd_shift_count(args):
    with open(args.system) as fh:
        cfg = json.load(fh)
    S, psi = build_symbolic_system(cfg)
    if psi is None:
        raise ConfigError("system config needs a potential for counting")
    xi = coding.word_from_str(args.xi)
    B = [coding.word_from_str(tok) for tok in (args.cylinder or [])] or None
    led = shift.count_words(S, psi, xi, args.T, B=B)
    grid = np.linspace(max(args.T / args.grid, 1e-6), args.T, args.grid)
    rows = [(t, led.count(t, strict=False)) for t in grid]
    config = {"command": "shift-count", "system": cfg, "T": args.T,
              "xi": args.xi, "cylinders": args.cylinder or []}
    write_csv(args.out, config, ["T", "N"], rows)
    return 0


def cmd_d_generic(args):
    with open(args.system) as fh:
        cfg = json.load(fh)
    S, psi = build_symbolic_system(cfg)
    if psi is None:
        raise ConfigError("system config needs a potential")
    verdict = shift.d_genericity(S, psi, args.max_period, tol=args.tol)
    config = {"command": "d-generic", "system": cfg,
              "max_period": args.max_period, "tol": args.tol}
    write_json(args.out, config, {
        "kind": verdict.kind,
        "generator": verdict.generator,
        "periods_scanned": verdict.periods_scanned,
        "n_values": verdict.n_values})
    return 0


def cmd_eta(args):
    with open(args.system) as fh:
        cfg = json.load(fh)
    S, psi = build_symbolic_system(cfg)
    if psi is None:
        raise ConfigError("system config needs a potential")
    xi = coding.word_from_str(args.xi)
    s = complex(args.s_re, args.s_im)
    res = shift.poincare_eta(S, psi, None, s, xi)
    config = {"command": "eta", "system": cfg, "s": [s.real, s.imag],
              "xi": args.xi}
    write_json(args.out, config, {
        "s_re": s.real, "s_im": s.imag,
        "eta_re": res.series.real, "eta_im": res.series.imag,
        "resolvent_re": res.resolvent.real, "resolvent_im": res.resolvent.imag,
        "agreement": res.agreement, "terms": res.terms})
    return 0


def cmd_kac(args):
    cfg = load_map_config(args.map)
    P = build_parabolic_map(cfg)
    rep = parabolic.kac_check(P, args.level, quad_points=args.quad_points)
    config = {"command": "kac", "map": cfg, "level": args.level,
              "quad_points": args.quad_points}
    write_json(args.out, config, {
        "lhs": rep.lhs, "rhs": rep.rhs, "ratio": rep.ratio,
        "cap": rep.cap, "tail_estimate": rep.tail_estimate,
        "tail_fraction": rep.tail_fraction})
    return 0


def cmd_parabolic_count(args):
    cfg = load_map_config(args.map)
    P = build_parabolic_map(cfg)
    B = []
    for spec in args.interval or []:
        lo, hi = (float(t) for t in spec.split(","))
        B.append((lo, hi))
    if not B:
        raise ConfigError("give at least one --interval lo,hi")
    led = parabolic.parabolic_count(P, args.x, args.T, B, N=args.level)
    rhs = parabolic.lyapunov_integral(P)
    mB = sum(hi - lo for lo, hi in B)
    grid = np.linspace(max(args.T / args.grid, 1e-6), args.T, args.grid)
    rows = []
    for t in grid:
        N = led.count(t, strict=False)
        rows.append((t, N, N * np.exp(-t) * rhs / mB, led.cesaro_average(t)))
    config = {"command": "parabolic-count", "map": cfg, "T": args.T,
              "x": args.x, "intervals": B, "level": args.level}
    write_csv(args.out, config, ["T", "N", "N_exp_ratio", "cesaro"], rows)
    return 0


def cmd_holder_mod(args):
    with open(args.system) as fh:
        cfg = json.load(fh)
    S, psi = build_symbolic_system(cfg)
    if psi is None:
        raise ConfigError("system config needs a potential")
    C, eps = shift.holder_modulus_in_s(S, psi, args.q, complex(args.s0),
                                       radius=args.radius, seed=args.seed or 0)
    config = {"command": "holder-mod", "system": cfg, "q": args.q,
              "s0": args.s0, "radius": args.radius, "seed": args.seed or 0}
    write_json(args.out, config, {"C_fit": C, "eps_fit": eps})
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="innerdyn",
        description="Transfer-operator spectra, orbit counting and stochastic "
                    "diagnostics for expanding circle maps, symbolic shifts "
                    "and parabolic interval maps.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (defaults to THERMO_THREADS or machine "
                        "parallelism); results are identical for any value")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        q = sub.add_parser(name, help=help_)
        q.add_argument("--out", default="-", help="output path ('-' = stdout)")
        q.set_defaults(fn=fn)
        return q

    q = add("spectrum", cmd_spectrum,
            "leading transfer-operator eigenvalue, gap and residual per s")
    q.add_argument("--map", required=True)
    q.add_argument("--s", action="append")
    q.add_argument("--modes", type=int, default=256)

    q = add("pressure", cmd_pressure,
            "pressure curve: P'(0) vs the observable mean, P''(0) vs the "
            "Green-Kubo variance")
    q.add_argument("--map", required=True)
    q.add_argument("--obs", default="cos")
    q.add_argument("--step", type=float, default=1e-2)
    q.add_argument("--modes", type=int, default=256)

    q = add("count", cmd_count,
            "backward-orbit counting: N(T), the e^T growth law and its "
            "Cesaro average")
    q.add_argument("--map", required=True)
    q.add_argument("--T", type=float, required=True)
    q.add_argument("--x", type=float, default=0.0)
    q.add_argument("--arc", action="append",
                   help="restrict to arc 'a,b' (repeatable)")
    q.add_argument("--closed", action="store_true",
                   help="count events with value <= T instead of < T")
    q.add_argument("--strict", dest="closed", action="store_false")
    q.add_argument("--grid", type=int, default=48)
    q.add_argument("--cesaro", action="store_true",
                   help="kept for compatibility; cesaro column is always emitted")

    q = add("cesaro", cmd_cesaro, "exponentially weighted Cesaro counting average")
    q.add_argument("--map", required=True)
    q.add_argument("--T", type=float, required=True)
    q.add_argument("--x", type=float, default=0.0)
    q.add_argument("--arc", action="append")

    q = add("clt", cmd_clt,
            "Monte-Carlo central-limit diagnostics against the Green-Kubo "
            "variance")
    q.add_argument("--map", required=True)
    q.add_argument("--obs", default="cos")
    q.add_argument("--n", type=int, default=4096)
    q.add_argument("--samples", type=int, default=100000)
    q.add_argument("--seed", type=int, default=None)

    q = add("clark", cmd_clark, "atoms and masses of a Clark measure")
    q.add_argument("--map", required=True)
    q.add_argument("--alpha", type=float, default=0.0)

    q = add("nevanlinna", cmd_nevanlinna,
            "counting-function identity sum log 1/|preimage| = log 1/|w|")
    q.add_argument("--map", required=True)
    q.add_argument("--w", action="append", help="point 're,im' (repeatable)")
    q.add_argument("--random-w", type=int, default=0)
    q.add_argument("--seed", type=int, default=None)

    q = add("shift-count", cmd_shift_count,
            "exact word counting on a symbolic system (ledger CSV)")
    q.add_argument("--system", required=True)
    q.add_argument("--T", type=float, required=True)
    q.add_argument("--xi", default="1,1,1,1")
    q.add_argument("--cylinder", action="append")
    q.add_argument("--grid", type=int, default=48)

    q = add("d-generic", cmd_d_generic,
            "lattice-or-generic verdict from periodic Birkhoff values")
    q.add_argument("--system", required=True)
    q.add_argument("--max-period", type=int, default=8)
    q.add_argument("--tol", type=float, default=1e-9)

    q = add("eta", cmd_eta,
            "Poincare series at s by operator partial sums and resolvent")
    q.add_argument("--system", required=True)
    q.add_argument("--s-re", type=float, default=2.0)
    q.add_argument("--s-im", type=float, default=0.0)
    q.add_argument("--xi", default="1,1,1,1")

    q = add("kac", cmd_kac,
            "first-return Lyapunov identity on the core interval")
    q.add_argument("--map", required=True)
    q.add_argument("--level", type=int, default=5)
    q.add_argument("--quad-points", type=int, default=12)

    q = add("parabolic-count", cmd_parabolic_count,
            "orbit counting for the induced first-return system")
    q.add_argument("--map", required=True)
    q.add_argument("--T", type=float, required=True)
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--interval", action="append", help="target 'lo,hi' (repeatable)")
    q.add_argument("--level", type=int, default=None)
    q.add_argument("--grid", type=int, default=48)

    q = add("holder-mod", cmd_holder_mod,
            "empirical continuity modulus of s -> L_{s,q} on the critical line")
    q.add_argument("--system", required=True)
    q.add_argument("--q", type=float, default=0.0)
    q.add_argument("--s0", type=float, default=1.0)
    q.add_argument("--radius", type=float, default=0.5)
    q.add_argument("--seed", type=int, default=0)

    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        _threads(args)  # validated; computations are deterministic regardless
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except _BUDGET_ERRORS as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3
    except InnerdynError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
