"""Doubly-parabolic self-maps of the upper half-plane and first-return data.

Maps F(x) = x - sum_i t_i / (x - b_i) with all t_i > 0 fix infinity with
F(z) = z - a/z + O(1/z^2), a = sum t_i, and satisfy F'(x) > 1 on the real
line. The poles cut the line into branches mapped monotonically onto the
line; inverse orbits of the extreme poles build the partition whose core
interval X carries the first return map, an expanding system with countably
many branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .counting import CountingLedger
from .errors import (BisectionFail, BudgetExceeded, NoReturnWithinCap,
                     NotDoublyParabolic, TailBoundExceeded)

_POLE_TOL = 1e-14


@dataclass(frozen=True)
class ParabolicMap:
    """F(x) = x - sum t_i/(x - b_i); poles sorted by location."""

    poles: tuple

    def __post_init__(self):
        poles = tuple(sorted((float(b), float(t)) for b, t in self.poles))
        if len(poles) == 0:
            raise ValueError("need at least one pole")
        if any(t <= 0 for _, t in poles):
            raise ValueError("pole masses must be positive")
        bs = [b for b, _ in poles]
        if len(set(bs)) != len(bs):
            raise ValueError("pole locations must be distinct")
        object.__setattr__(self, "poles", poles)

    @property
    def mass(self) -> float:
        """The coefficient a in F(z) = z - a/z + ... at infinity."""
        return float(sum(t for _, t in self.poles))

    @property
    def pole_locations(self) -> np.ndarray:
        return np.array([b for b, _ in self.poles])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        for b, t in self.poles:
            out = out - t / (x - b)
        return out if out.ndim else float(out)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for b, t in self.poles:
            out = out + t / (x - b) ** 2
        return out if out.ndim else float(out)

    def log_deriv(self, x):
        return np.log(self.deriv(x))

    def label(self) -> str:
        ps = ";".join(f"{b:g},{t:g}" for b, t in self.poles)
        return f"parabolic[{ps}]"


def build_parabolic(poles, translation: float = 0.0) -> ParabolicMap:
    """Validated doubly-parabolic map; a nonzero translation is rejected.

    A translation term would make the fixed point at infinity singly
    parabolic (F(z) = z + T - a/z), which has no invariant Lebesgue class on
    the line in this normalization.
    """
    if translation != 0.0:
        raise NotDoublyParabolic(f"translation term {translation} given; "
                                 "the doubly-parabolic form has none")
    return ParabolicMap(tuple((float(b), float(t)) for b, t in poles))


# ---------------------------------------------------------------------------
# branch inverses and boundary orbits
# ---------------------------------------------------------------------------

def _f_df(poles, x: float) -> tuple[float, float]:
    """F(x) and F'(x) as plain floats (hot path for scalar solvers)."""
    f = x
    d = 1.0
    for b, t in poles:
        diff = x - b
        f -= t / diff
        d += t / (diff * diff)
    return f, d


def _branch_inverse_scalar(P: ParabolicMap, lo: float, hi: float, y: float,
                           tol: float = 1e-14) -> float:
    """Solve F(x) = y on the branch (lo, hi) where F increases onto its image.

    Safeguarded Newton in plain float arithmetic with a finite starting
    bracket obtained by marching toward the unbounded or pole end as needed.
    """
    poles = P.poles
    span = max(abs(lo) if math.isfinite(lo) else 1.0,
               abs(hi) if math.isfinite(hi) else 1.0, 1.0)
    if math.isfinite(lo):
        step = span * 1e-9
        xa = lo + step
        while _f_df(poles, xa)[0] > y:
            step *= 0.25
            xa = lo + step
            if step < 1e-300:
                raise BisectionFail("cannot approach the lower branch end")
    else:
        xa = min(hi, 0.0) - 1.0 if math.isfinite(hi) else -1.0
        while _f_df(poles, xa)[0] > y:
            xa = 2 * xa - abs(hi if math.isfinite(hi) else 0.0) - 1.0
    if math.isfinite(hi):
        step = span * 1e-9
        xb = hi - step
        while _f_df(poles, xb)[0] < y:
            step *= 0.25
            xb = hi - step
            if step < 1e-300:
                raise BisectionFail("cannot approach the upper branch end")
    else:
        xb = max(lo, 0.0) + 1.0 if math.isfinite(lo) else 1.0
        while _f_df(poles, xb)[0] < y:
            xb = 2 * xb + abs(lo if math.isfinite(lo) else 0.0) + 1.0
    x = 0.5 * (xa + xb)
    for _ in range(200):
        fx, dfx = _f_df(poles, x)
        if fx > y:
            xb = x
        else:
            xa = x
        xn = x - (fx - y) / dfx
        if not xa < xn < xb:
            xn = 0.5 * (xa + xb)
        if abs(xn - x) < tol * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def _branch_inverse_array(P: ParabolicMap, lo, hi, y: np.ndarray,
                          iters: int = 100) -> np.ndarray:
    """Solve F(x) = y on a common branch (lo, hi) for an array of targets.

    Bracketed bisection seeded by the scalar solves of the extreme targets;
    monotonicity of F on the branch makes the bracket valid for every target.
    """
    y = np.asarray(y, dtype=float)
    xa = np.full(y.shape, _branch_inverse_scalar(P, lo, hi, float(np.min(y))))
    xb = np.full(y.shape, _branch_inverse_scalar(P, lo, hi, float(np.max(y))))
    xa = np.nextafter(xa, -np.inf)
    xb = np.nextafter(xb, np.inf)
    for _ in range(iters):
        xm = 0.5 * (xa + xb)
        below = P(xm) < y
        xa = np.where(below, xm, xa)
        xb = np.where(below, xb, xm)
        # Newton polish interleaved once the bracket is tight
    x = 0.5 * (xa + xb)
    for _ in range(3):
        x = np.clip(x - (P(x) - y) / P.deriv(x), xa, xb)
    return x


class _OrbitCache:
    """Inverse orbits p_1, p_2, ... of the extreme poles, grown on demand."""

    def __init__(self):
        self.store: dict = {}

    def get(self, P: ParabolicMap, side: str, count: int) -> np.ndarray:
        key = (P.poles, side)
        arr = self.store.get(key)
        if arr is None or len(arr) < count:
            arr = self._extend(P, side, arr, count)
            self.store[key] = arr
        return arr[:count]

    @staticmethod
    def _extend(P, side, arr, count):
        bs = P.pole_locations
        if side == "+":
            start = float(bs[-1])
            lo, hi = start, np.inf
        else:
            start = float(bs[0])
            lo, hi = -np.inf, start
        vals = list(arr) if arr is not None else [start]
        a = P.mass
        poles = P.poles
        while len(vals) < count:
            target = vals[-1]
            # Newton from the asymptotic step p + a/p, polished to 1e-14
            x = target + a / max(abs(target), 1.0) if side == "+" else \
                target - a / max(abs(target), 1.0)
            ok = False
            for _ in range(60):
                fx, dfx = _f_df(poles, x)
                dx = (fx - target) / dfx
                x -= dx
                if (side == "+" and not x > lo) or (side == "-" and not x < hi):
                    break
                if abs(dx) < 1e-14 * max(1.0, abs(x)):
                    ok = True
                    break
            if not ok or not (lo < x if side == "+" else x < hi):
                x = _branch_inverse_scalar(P, lo, hi, target)
            vals.append(float(x))
        return np.array(vals)


_ORBITS = _OrbitCache()


def boundary_orbit(P: ParabolicMap, side: str, count: int) -> np.ndarray:
    """p_1 .. p_count on the given side ('+' grows to +inf, '-' to -inf)."""
    if count > 2 * 10**6:
        raise BudgetExceeded("boundary orbit request too long")
    return _ORBITS.get(P, side, count)


@dataclass
class RealPartition:
    """Boundary orbit points and the core interval X = [p_{N+1}^-, p_{N+1}^+]."""

    map: ParabolicMap
    level: int
    p_plus: np.ndarray     # p_1^+ .. p_{N+1}^+
    p_minus: np.ndarray

    @property
    def core(self) -> tuple[float, float]:
        return float(self.p_minus[-1]), float(self.p_plus[-1])

    def interval_plus(self, n: int) -> tuple[float, float]:
        """J_n^+ = [p_n^+, p_{n+1}^+] (1-based n <= level)."""
        return float(self.p_plus[n - 1]), float(self.p_plus[n])

    def interval_minus(self, n: int) -> tuple[float, float]:
        return float(self.p_minus[n]), float(self.p_minus[n - 1])


def real_markov_partition(P: ParabolicMap, N: int) -> RealPartition:
    """Inverse orbits to depth N+1 and the interval structure they cut.

    For N >= 64 the last decade of gaps is checked against the parabolic
    n^{-1/2} law (gap ratio at doubled index near 1/sqrt(2)).
    """
    if not 1 <= N <= 10**4:
        raise ValueError("level must satisfy 1 <= N <= 1e4")
    pp = boundary_orbit(P, "+", N + 1)
    pm = boundary_orbit(P, "-", N + 1)
    if N >= 64:
        gaps = np.diff(pp)
        n0 = len(gaps) // 2
        ratio = gaps[-1] / gaps[n0 - 1]
        expected = math.sqrt(n0 / len(gaps))
        if not 0.5 * expected < ratio < 2.0 * expected:
            raise BisectionFail("boundary-orbit gaps violate the n^(-1/2) law")
    return RealPartition(map=P, level=N, p_plus=pp, p_minus=pm)


# ---------------------------------------------------------------------------
# first return map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReturnEvent:
    start: float
    return_point: float
    return_time: int
    log_deriv: float


def first_return(P: ParabolicMap, X: tuple[float, float], x: float,
                 cap: int = 10**6) -> ReturnEvent:
    """Iterate F until the orbit re-enters X, accumulating log|F'|."""
    lo, hi = X
    if not lo <= x <= hi:
        raise ValueError("start point must lie in the core interval")
    bs = P.pole_locations
    acc = 0.0
    y = float(x)
    for n in range(1, cap + 1):
        if np.min(np.abs(y - bs)) < _POLE_TOL * max(1.0, abs(y)):
            raise NoReturnWithinCap("orbit hit a pole preimage")
        acc += float(P.log_deriv(y))
        y = float(P(y))
        if lo <= y <= hi:
            return ReturnEvent(start=float(x), return_point=y, return_time=n,
                               log_deriv=acc)
    raise NoReturnWithinCap(f"no return within {cap} iterations")


# ---------------------------------------------------------------------------
# Kac identity check
# ---------------------------------------------------------------------------

def lyapunov_integral(P: ParabolicMap, epsabs: float = 1e-11) -> float:
    """int_R log F'(x) dx by adaptive quadrature split at the poles.

    log F' has integrable log singularities at the poles and decays like
    a/x^2 at infinity.
    """
    bs = list(P.pole_locations)
    pieces = []
    f = lambda x: float(np.log(P.deriv(x)))
    pieces.append(quad(f, -np.inf, bs[0], epsabs=epsabs, limit=400))
    for i in range(len(bs) - 1):
        pieces.append(quad(f, bs[i], bs[i + 1], epsabs=epsabs, limit=400))
    pieces.append(quad(f, bs[-1], np.inf, epsabs=epsabs, limit=400))
    return float(sum(v for v, _ in pieces))


def _gauss_nodes(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


@dataclass
class KacReport:
    lhs: float
    rhs: float
    cap: int
    computed_mass: float       # total stratum length integrated directly
    tail_estimate: float       # extrapolated contribution beyond the cap
    tail_fraction: float       # tail_estimate / rhs

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def _full_branches(P: ParabolicMap, part: RealPartition):
    """Branches of F inside X that map onto a half-line or the whole line.

    Each is (lo, hi, covers_left, covers_right): J_1^+ covers the left tail,
    J_1^- the right tail, and every bounded basic interval covers both.
    """
    bs = list(P.pole_locations)
    out = []
    out.append((bs[-1], float(part.p_plus[1]), True, False))    # J_1^+
    out.append((float(part.p_minus[1]), bs[0], False, True))    # J_1^-
    for i in range(len(bs) - 1):
        out.append((bs[i], bs[i + 1], True, True))
    return out


def _excursion_chain(P: ParabolicMap, part, side: str, n_fine: int, q: int):
    """Gauss-point chains for excursions exiting to J_n^(side), N < n <= n_fine.

    Returns (nodes, sums): nodes[n-N-1] holds q points of J_n (pullbacks of
    Gauss points of J_N under the descent diffeomorphism) and sums[n-N-1]
    the exact accumulated log F' of the descent from those points into X.
    """
    N = part.level
    p = boundary_orbit(P, side, n_fine + 2)
    gl_x, _ = _gauss_nodes(q)
    if side == "-":
        jlo, jhi = float(p[N]), float(p[N - 1])   # J_N^-
    else:
        jlo, jhi = float(p[N - 1]), float(p[N])   # J_N^+
    pts = 0.5 * (jlo + jhi) + 0.5 * (jhi - jlo) * gl_x
    nodes = np.empty((n_fine - N, q))
    sums = np.empty((n_fine - N, q))
    cur = pts
    acc = np.zeros(q)
    prev_lo, prev_hi = jlo, jhi
    for n in range(N + 1, n_fine + 1):
        if side == "-":
            blo, bhi = float(p[n]), float(p[n - 1])
        else:
            blo, bhi = float(p[n - 1]), float(p[n])
        # affine transplant of the previous nodes seeds a short Newton solve
        guess = blo + (cur - prev_lo) * (bhi - blo) / (prev_hi - prev_lo)
        c = _newton_on_interval(P, blo, bhi, cur, guess)
        acc = acc + np.log(P.deriv(c))
        nodes[n - N - 1] = c
        sums[n - N - 1] = acc
        cur = c
        prev_lo, prev_hi = blo, bhi
    return nodes, sums


def _excursion_scalar_chain(P: ParabolicMap, part, side: str, cap: int) -> np.ndarray:
    """Accumulated descent log F' at one tracked point per level, N < n <= cap.

    A cheap scalar companion to the Gauss chain: beyond the finely resolved
    region the excursion weight varies across a stratum by at most
    sum_m var(log F' | J_m) = O(1/n), so one point per level suffices there.
    """
    N = part.level
    p = boundary_orbit(P, side, cap + 2)
    poles = [(float(b), float(t)) for b, t in P.poles]
    cur = 0.5 * (float(p[N]) + float(p[N - 1]))
    acc = 0.0
    out = np.empty(cap - N)
    for n in range(N + 1, cap + 1):
        blo, bhi = (float(p[n]), float(p[n - 1])) if side == "-" else \
            (float(p[n - 1]), float(p[n]))
        c = 0.5 * (blo + bhi)
        for _ in range(8):
            fx = c
            dv = 1.0
            for b, t in poles:
                diff = c - b
                fx -= t / diff
                dv += t / (diff * diff)
            step = (fx - cur) / dv
            c -= step
            if c <= blo or c >= bhi:
                c = 0.5 * (blo + bhi)
            if abs(step) < 1e-13 * max(1.0, abs(c)):
                break
        dv = 1.0
        for b, t in poles:
            dv += t / ((c - b) * (c - b))
        acc += math.log(dv)
        out[n - N - 1] = acc
        cur = c
    return out


def _newton_on_interval(P: ParabolicMap, lo: float, hi: float,
                        targets: np.ndarray, guess: np.ndarray) -> np.ndarray:
    """Solve F(c) = target on [lo, hi] (F increasing), vectorized Newton."""
    c = np.clip(guess, lo, hi)
    tol = 1e-14 * max(1.0, abs(lo), abs(hi))
    for _ in range(12):
        step = (P(c) - targets) / P.deriv(c)
        c = np.clip(c - step, lo, hi)
        if np.max(np.abs(step)) < tol:
            return c
    # fall back to safeguarded bisection for any stragglers
    resid = np.abs(P(c) - targets)
    bad = resid > 1e-10 * np.maximum(1.0, np.abs(targets))
    if np.any(bad):
        clo = np.full(int(np.sum(bad)), lo)
        chi = np.full(int(np.sum(bad)), hi)
        tg = targets[bad] if np.ndim(targets) else np.full(int(np.sum(bad)), targets)
        for _ in range(90):
            cm = 0.5 * (clo + chi)
            below = P(cm) < tg
            clo = np.where(below, cm, clo)
            chi = np.where(below, chi, cm)
        c[bad] = 0.5 * (clo + chi)
    return c


def _barycentric_weights(xs: np.ndarray) -> np.ndarray:
    """Barycentric weights per row of node matrix xs (m, q)."""
    w = np.ones_like(xs)
    for j in range(xs.shape[1]):
        diff = xs - xs[:, j][:, None]
        diff[:, j] = 1.0
        w[:, j] = 1.0 / np.prod(diff, axis=1)
    return w


def _interp_barycentric(xs: np.ndarray, ys: np.ndarray, x: np.ndarray,
                        w: np.ndarray | None = None) -> np.ndarray:
    """Barycentric interpolation row-wise: xs, ys (m, q); x (m,) -> (m,)."""
    if w is None:
        w = _barycentric_weights(xs)
    d = x[:, None] - xs
    exact = np.abs(d) < 1e-300
    d = np.where(exact, 1.0, d)
    num = np.sum(w / d * ys, axis=1)
    den = np.sum(w / d, axis=1)
    out = num / den
    hit = np.any(exact, axis=1)
    if np.any(hit):
        idx = np.argmax(exact[hit], axis=1)
        out[hit] = ys[hit, idx]
    return out


def kac_check(P: ParabolicMap, N: int, quad_points: int = 12,
              tail_frac: float = 0.01, cap0: int = 10**4,
              cap_max: int = 2**20) -> KacReport:
    """Compare int_X log|Fhat'| dl against int_R log|F'| dl.

    The return-time strata of X are integrated by Gauss quadrature; the
    infinite families exiting through the tails are truncated at an adaptive
    cap, grown until the extrapolated tail contribution drops below
    tail_frac of the right-hand side, and the estimate is then added to the
    left-hand side. TailBoundExceeded is raised if no admissible cap exists.
    """
    rhs = lyapunov_integral(P)
    cap = cap0
    while True:
        lhs, tail, mass = _kac_lhs(P, N, quad_points, cap)
        if tail <= tail_frac * rhs:
            return KacReport(lhs=lhs, rhs=rhs, cap=cap, computed_mass=mass,
                             tail_estimate=tail, tail_fraction=tail / rhs)
        if cap >= cap_max:
            raise TailBoundExceeded(
                f"estimated stratum tail {tail:.3e} above {tail_frac:.0%} of "
                f"rhs even at cap {cap}")
        # tail ~ cap^{-1/2} log cap: jump close to the admissible cap at once
        factor = (tail / (tail_frac * rhs)) ** 2
        cap = min(cap_max, int(cap * min(max(2.0, 1.5 * factor), 64.0)))


def _kac_lhs(P: ParabolicMap, N: int, q: int, cap: int):
    part = real_markov_partition(P, N)
    gl_x, gl_w = _gauss_nodes(q)
    core_lo, core_hi = part.core

    def gauss_log_deriv(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid + half * gl_x
        return float(np.sum(gl_w * np.log(P.deriv(pts))) * half)

    total = 0.0
    mass_total = 0.0
    # single-stratum intervals J_m^{+-}, 2 <= m <= N (one F-step back into X)
    for m in range(2, N + 1):
        for lo, hi in (part.interval_plus(m), part.interval_minus(m)):
            total += gauss_log_deriv(lo, hi)
            mass_total += hi - lo
    # time-1 strata of the full branches (image clipped to X on covered sides)
    for blo, bhi, cl, cr in _full_branches(P, part):
        x_left = _branch_inverse_scalar(P, blo, bhi, core_lo) if cl else blo
        x_right = _branch_inverse_scalar(P, blo, bhi, core_hi) if cr else bhi
        total += gauss_log_deriv(x_left, x_right)
        mass_total += x_right - x_left

    tail_total = 0.0
    n_fine = min(cap, 1 << 14)
    for side in ("-", "+"):
        p = boundary_orbit(P, side, cap + 2)
        nodes, sums = _excursion_chain(P, part, side, n_fine, q)
        bw = _barycentric_weights(nodes)
        scalar_e = _excursion_scalar_chain(P, part, side, cap) if cap > n_fine else None
        branches = [b for b in _full_branches(P, part)
                    if (b[2] if side == "-" else b[3])]
        for (blo, bhi, _cl, _cr) in branches:
            # stratum boundaries: preimages of p_{N+1}, p_{N+2}, ... cut the
            # branch into the intervals exiting to J_{N+1}, J_{N+2}, ...
            xb = _branch_inverse_array(P, blo, bhi, p[N: cap + 1])
            lo_arr = np.minimum(xb[1:], xb[:-1])
            hi_arr = np.maximum(xb[1:], xb[:-1])
            lengths = hi_arr - lo_arr
            mids = 0.5 * (lo_arr + hi_arr)[:, None] + \
                0.5 * lengths[:, None] * gl_x[None, :]
            base = np.sum(gl_w[None, :] * np.log(P.deriv(mids)), axis=1) * 0.5 * lengths
            nf = n_fine - N
            exc_fine = np.empty((nf, q))
            for j in range(q):
                exc_fine[:, j] = _interp_barycentric(nodes, sums,
                                                     P(mids[:nf, j]), bw)
            contrib = base.copy()
            contrib[:nf] += np.sum(gl_w[None, :] * exc_fine, axis=1) * 0.5 * lengths[:nf]
            if scalar_e is not None:
                contrib[nf:] += scalar_e[nf:] * lengths[nf:]
            total += float(np.sum(contrib))
            mass_total += float(np.sum(lengths))
            # tail beyond the cap: exact remaining mass times a fitted weight
            pole_end = blo if side == "-" else bhi
            rem = abs(xb[-1] - pole_end)
            mass_total += rem
            w_n = contrib / lengths
            ns = np.arange(N + 1, cap + 1, dtype=float)
            sel = ns > cap / 8
            A = np.vstack([np.ones(int(np.sum(sel))), np.log(ns[sel])]).T
            coef, *_ = np.linalg.lstsq(A, w_n[sel], rcond=None)
            mean_ln = math.log(cap) + 2.0   # mean of ln n under the n^{-3/2} tail law
            tail_total += rem * float(coef[0] + coef[1] * mean_ln)
    return total + tail_total, tail_total, mass_total


# ---------------------------------------------------------------------------
# orbit counting for the induced system
# ---------------------------------------------------------------------------

def _auto_level(P: ParabolicMap, points, N_min: int = 1, N_max: int = 64) -> int:
    """Smallest level N with X_N containing all the given points."""
    lo = min(points)
    hi = max(points)
    for N in range(N_min, N_max + 1):
        pp = boundary_orbit(P, "+", N + 1)
        pm = boundary_orbit(P, "-", N + 1)
        if pm[-1] <= lo and hi <= pp[-1]:
            return N
    raise ValueError("points do not fit any core interval up to N_max")


def parabolic_count(P: ParabolicMap, x: float, T: float, B,
                    N: int | None = None,
                    node_budget: int = 10**7) -> CountingLedger:
    """Ledger of backward orbits of the first-return map with Birkhoff sums <= T.

    Events are pairs (S_k log|Fhat'|(z), z) over k-step Fhat-preimages z of
    x; B is a union of half-open intervals [lo, hi) inside the core X. The
    tree is pruned at T, which is valid because every return adds at least
    log(inf_X F') > 0; excursion branches are pruned once their minimal
    increment exceeds the remaining budget.
    """
    B = [(float(lo), float(hi)) for lo, hi in B]
    pts = [x] + [e for ab in B for e in ab]
    if N is None:
        N = _auto_level(P, pts)
    part = real_markov_partition(P, N)
    core_lo, core_hi = part.core
    if not core_lo <= x <= core_hi:
        raise ValueError("seed must lie in the core interval")
    est = 4.0 * math.exp(T) * (core_hi - core_lo) / lyapunov_integral(P)
    if est > node_budget:
        raise BudgetExceeded("predicted event count exceeds the node budget")
    branches = _full_branches(P, part)
    pp, pm = part.p_plus, part.p_minus
    b_lo, b_hi = float(P.pole_locations[0]), float(P.pole_locations[-1])

    poles = P.poles

    def children(y, remaining):
        out = []
        # one-step moves down the ladders: z in J_{m+1} needs y in J_m, m < N
        if N >= 2 and pp[0] <= y < pp[N - 1]:
            m = int(np.searchsorted(pp, y, side="right"))  # y in J_m^+
            lo, hi = part.interval_plus(m + 1)
            z = _branch_inverse_scalar(P, lo, hi, y)
            out.append((z, math.log(_f_df(poles, z)[1])))
        if N >= 2 and pm[N - 1] < y <= pm[0]:
            m = int(np.searchsorted(-pm, -y, side="right"))  # y in J_m^-
            lo, hi = part.interval_minus(m + 1)
            z = _branch_inverse_scalar(P, lo, hi, y)
            out.append((z, math.log(_f_df(poles, z)[1])))
        # time-1 strata of the full branches: y must lie in the branch image,
        # which misses the right tail above the top pole for J_1^+ and the
        # left tail below the bottom pole for J_1^-
        for blo, bhi, cl, cr in branches:
            if (cl or y > b_lo) and (cr or y < b_hi):
                z = _branch_inverse_scalar(P, blo, bhi, y)
                out.append((z, math.log(_f_df(poles, z)[1])))
        # excursion families land exactly in J_N^{+-}
        for side in ("-", "+"):
            jlo, jhi = part.interval_minus(N) if side == "-" else part.interval_plus(N)
            if not jlo <= y < jhi:
                continue
            fam = [b for b in branches if (b[2] if side == "-" else b[3])]
            p = boundary_orbit(P, side, N + 16)
            w = y
            acc = 0.0
            n = N
            while True:
                n += 1
                if n + 2 > len(p):
                    p = boundary_orbit(P, side, 2 * len(p))
                lo, hi = (float(p[n]), float(p[n - 1])) if side == "-" else \
                    (float(p[n - 1]), float(p[n]))
                w = _branch_inverse_scalar(P, lo, hi, w)
                acc += math.log(_f_df(poles, w)[1])
                # entry increments grow monotonically with n: once every
                # covering branch exceeds the remaining budget, all deeper
                # excursions do too
                min_inc = math.inf
                for blo, bhi, _cl, _cr in fam:
                    z = _branch_inverse_scalar(P, blo, bhi, w)
                    inc = acc + math.log(_f_df(poles, z)[1])
                    min_inc = min(min_inc, inc)
                    if inc <= remaining:
                        out.append((z, inc))
                if min_inc > remaining:
                    break
        return out

    values = [0.0] if T >= 0 else []
    locations = [float(x)] if T >= 0 else []
    stack = list(zip(locations, values))
    nodes = 0
    while stack:
        y, acc = stack.pop()
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded("node budget exhausted during enumeration")
        for z, inc in children(y, T - acc):
            v = acc + inc
            if v <= T:
                values.append(v)
                locations.append(z)
                stack.append((z, v))
    values = np.array(values)
    locations = np.array(locations)
    member = np.zeros(len(values), dtype=bool)
    for lo, hi in B:
        member |= (locations >= lo) & (locations < hi)
    if not B:
        member[:] = True
    return CountingLedger.from_events(values, locations=locations,
                                      member_mask=member, T_max=float(T),
                                      space="line",
                                      meta={"map": P.label(), "seed": float(x),
                                            "level": N, "B": B})


def induced_cycle_multipliers(P: ParabolicMap, n_values) -> np.ndarray:
    """log-multipliers L_n of the periodic orbits with itinerary
    J_n^+ -> J_{n-1}^+ -> ... -> J_1^+ -> J_1^- -> J_n^+ (period n + 1).

    The orbit point is the fixed point of the contracting inverse-branch
    cycle; L_{n+1} - L_n -> 0 while L_n -> infinity, which is the signature
    that the induced potential is not lattice.
    """
    out = []
    for n in n_values:
        n = int(n)
        if n < 2:
            raise ValueError("need n >= 2")
        pp = boundary_orbit(P, "+", n + 2)
        pm = boundary_orbit(P, "-", n + 2)
        bs = P.pole_locations
        # inverse-branch cycle, innermost first: J_1^-, J_1^+, J_2^+, ..., J_n^+
        chain = [(float(pm[1]), float(bs[0]))]
        chain.append((float(bs[-1]), float(pp[1])))
        for m in range(2, n + 1):
            chain.append((float(pp[m - 1]), float(pp[m])))
        z = 0.5 * (pp[n - 1] + pp[n])
        for _ in range(200):
            w = z
            for lo, hi in chain:
                w = _branch_inverse_scalar(P, lo, hi, w)
            if abs(w - z) < 1e-14 * max(1.0, abs(z)):
                z = w
                break
            z = w
        orbit = [z]
        for _ in range(n):
            orbit.append(float(P(orbit[-1])))
        L = float(np.sum(np.log(P.deriv(np.array(orbit)))))
        out.append(L)
    return np.array(out)
