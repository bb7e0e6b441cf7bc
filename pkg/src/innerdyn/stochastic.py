"""Monte-Carlo central-limit diagnostics and the Green-Kubo variance.

Orbit statistics of Birkhoff sums S_n h / sqrt(n) over Lebesgue-random seeds,
a Kolmogorov-Smirnov comparison with the Gaussian, and the asymptotic
variance from the correlation series. For monomial maps the angle doubling
is iterated in 128-bit fixed point, so the sampled orbits are exact and no
floating-point shadowing caveat applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .blaschke import BlaschkeMap, circle_grid
from .circle import TWO_PI
from .errors import DegenerateVariance, NonDecaying
from .rng import splitmix64, uniform_stream


@dataclass
class BirkhoffSample:
    """Values of S_n h / sqrt(n) over random seeds, with full provenance."""

    n: int
    values: np.ndarray
    seed: int
    observable: str
    map_label: str
    exact_angles: bool

    @property
    def samples(self) -> int:
        return len(self.values)


def _exact_monomial_angles(d: int, n: int, samples: int, seed: int):
    """Generator of exact orbit angles for theta -> d*theta (mod 2*pi).

    The orbit of a base-d fraction is the sequence of suffix windows of its
    digit string, so a pool of n + O(1) random digits per sample IS the exact
    fixed-point orbit; step k reads the window starting at digit k. For
    powers of two the windows are extracted directly from packed 64-bit
    words, otherwise a short Horner sum over base-d digits is used.
    """
    if d & (d - 1) == 0:
        m = d.bit_length() - 1  # d = 2^m
        total_bits = n * m + 64
        nwords = total_bits // 64 + 2
        idx = np.arange(samples, dtype=np.uint64)
        pool = np.empty((nwords, samples), dtype=np.uint64)
        for w in range(nwords):
            pool[w] = splitmix64(seed, idx * np.uint64(nwords) + np.uint64(w))
        for k in range(n):
            off = k * m
            q, r = divmod(off, 64)
            if r == 0:
                win = pool[q]
            else:
                win = (pool[q] << np.uint64(r)) | (pool[q + 1] >> np.uint64(64 - r))
            yield TWO_PI * (win >> np.uint64(11)).astype(np.float64) * 2.0**-53
    else:
        horizon = int(np.ceil(54 / np.log2(d))) + 1
        ndig = n + horizon
        idx = np.arange(samples, dtype=np.uint64)
        digits = np.empty((ndig, samples), dtype=np.float64)
        for j in range(ndig):
            w = splitmix64(seed, idx * np.uint64(ndig) + np.uint64(j))
            digits[j] = (w % np.uint64(d)).astype(np.float64)
        for k in range(n):
            frac = np.zeros(samples)
            for j in range(k + horizon - 1, k - 1, -1):
                frac = (frac + digits[j]) / d
            yield TWO_PI * frac


def birkhoff_samples(F: BlaschkeMap, h, n: int, samples: int, seed: int,
                     center: bool = True) -> BirkhoffSample:
    """S_n h / sqrt(n) over `samples` Lebesgue-random starting angles.

    h is mean-adjusted by subtracting its 4096-point quadrature mean. Sample
    i draws its randomness from stream position i, so results do not depend
    on batching. Monomial maps without rotation run on the exact digit-window
    iterator; other maps iterate on the circle in double precision, which
    loses pointwise shadowing but not distributional statistics.
    """
    if n * samples > 10**9:
        raise ValueError("n * samples exceeds the 1e9 step budget")
    mean = float(np.mean(np.asarray(h(circle_grid(4096)), dtype=float))) if center else 0.0
    acc = np.zeros(samples)
    if F.is_monomial and F.rotation == 0.0:
        for theta in _exact_monomial_angles(F.degree, n, samples, seed):
            acc += np.asarray(h(theta), dtype=float)
        exact = True
    else:
        theta0 = TWO_PI * uniform_stream(seed, samples)
        z = np.exp(1j * theta0)
        rot = np.exp(1j * F.rotation)
        hz = getattr(h, "on_circle", None)
        for _ in range(n):
            acc += np.asarray(hz(z) if hz is not None else h(np.angle(z)), dtype=float)
            w = np.full(samples, rot, dtype=complex)
            for a in F.zeros:
                w *= (z - a) / (1.0 - np.conj(a) * z)
            # the circle is radially repelling, so renormalize every step
            z = w / np.abs(w)
        exact = False
    values = (acc - n * mean) / np.sqrt(n)
    return BirkhoffSample(n=n, values=values, seed=seed,
                          observable=getattr(h, "name", "h"),
                          map_label=F.label(), exact_angles=exact)


def clt_diagnostics(sample: BirkhoffSample, sigma2: float) -> tuple[float, float]:
    """(KS distance to N(0, sigma2), sample variance / sigma2)."""
    if sigma2 < 1e-12:
        raise DegenerateVariance("variance is numerically zero (coboundary case)")
    x = np.sort(sample.values / np.sqrt(sigma2))
    m = len(x)
    cdf = ndtr(x)
    i = np.arange(1, m + 1)
    ks = float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))
    var_ratio = float(np.var(sample.values, ddof=1) / sigma2)
    return ks, var_ratio


def correlation_sequence(F: BlaschkeMap, h, k_max: int, N: int = 512) -> np.ndarray:
    """c_k = int h (h o F^k) dm for k = 0..k_max, h mean-adjusted.

    Computed through the adjoint identity c_k = int (L^k h) h dm with the
    weightless collocation operator; L smooths, so no frequency blow-up
    occurs. The duality tests validate the identity independently.
    """
    from .transfer import assemble_operator  # local import, avoids a cycle
    grid = circle_grid(N)
    hv = np.asarray(h(grid), dtype=float)
    hv = hv - np.mean(hv)
    M = assemble_operator(F, 1.0, None, N)
    out = np.empty(k_max + 1)
    u = hv.astype(complex)
    out[0] = float(np.mean(hv * hv))
    for k in range(1, k_max + 1):
        u = M.apply(u)
        out[k] = float(np.mean((u * hv).real))
    return out


def green_kubo_variance(F: BlaschkeMap, h, k_max: int = 48, N: int = 512,
                        decay_check: bool = True) -> float:
    """Asymptotic variance c_0 + 2 sum_{k>=1} c_k of the correlation series.

    Terms must decay geometrically (spectral gap); NonDecaying is raised when
    a term exceeds its predecessors' envelope while still above noise level.
    """
    if k_max > 64:
        raise ValueError("k_max must be <= 64")
    c = correlation_sequence(F, h, k_max, N)
    env = np.abs(c[0])
    floor = 1e-13 * max(1.0, env)
    for k in range(1, len(c)):
        mag = abs(c[k])
        if decay_check and mag > max(2.0 * env, 10 * floor) and mag > 1e-8:
            raise NonDecaying(f"correlation term {k} = {c[k]:.3e} fails to decay")
        env = max(mag, 0.5 * env)
    total = c[0] + 2.0 * np.sum(c[1:])
    return float(total)
