"""Dominant-eigenvalue machinery shared by the circle and shift operators.

Power iteration with Rayleigh quotients for the leading pair, transpose
iteration for the dual (conformal) weights, and rank-one deflation for the
subleading modulus. The deflated projection realizes the spectral projection
of a simple isolated eigenvalue, so no contour integrals are needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence
from .rng import uniform_stream

_MAX_ITER = 100_000


@dataclass
class SpectralData:
    """Leading eigendata of a positive transfer operator discretization.

    lam: leading eigenvalue; rho: eigenfunction with integral 1 against the
    conformal weights; weights: dual eigenvector normalized to total mass 1;
    gap: |lambda_2| / |lambda|; residual: sup-norm eigen-equation defect.
    """

    lam: complex
    rho: np.ndarray
    weights: np.ndarray
    gap: float
    residual: float
    peripheral: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def subleading(self) -> float:
        return self.gap * abs(self.lam)


def _start_vector(n: int, seed: int = 0) -> np.ndarray:
    """Constant vector plus a small seeded perturbation.

    The perturbation guards against starting exactly orthogonal to the
    dominant eigenvector; the fixed seed keeps every run reproducible.
    """
    return 1.0 + 1e-3 * (uniform_stream(seed, n) - 0.5)


def power_leading(mat: np.ndarray, tol: float = 1e-13, seed: int = 0,
                  max_iter: int = _MAX_ITER, res_target: float = 1e-10):
    """Power iteration; returns (lam, vector, residual, iterations).

    Runs until both the Rayleigh quotient stabilizes below tol and the
    eigen-equation residual drops below res_target (the vector converges
    more slowly than the value for non-normal operators).
    """
    if tol < 1e-16:
        raise ValueError("tol too small")
    v = _start_vector(mat.shape[0], seed).astype(complex)
    v /= np.linalg.norm(v)
    lam_prev = None
    hits = 0
    for it in range(1, max_iter + 1):
        w = mat @ v
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            return 0.0 + 0j, v, 0.0, it
        lam = complex(np.vdot(v, w))  # Rayleigh quotient, ||v|| = 1
        v = w / nw
        if lam_prev is not None and abs(lam - lam_prev) < tol * max(1.0, abs(lam)):
            hits += 1
            if hits >= 3:
                res = float(np.max(np.abs(mat @ v - lam * v)) / max(np.max(np.abs(v)), 1e-300))
                if res < res_target * max(1.0, abs(lam)) or it > max_iter - 2:
                    return lam, v, res, it
                hits = 0
        else:
            hits = 0
        lam_prev = lam
    raise NoConvergence(f"power iteration stalled after {max_iter} iterations")


def deflated_subleading(mat: np.ndarray, lam: complex, rho: np.ndarray,
                        dual: np.ndarray, tol: float = 1e-10, seed: int = 1,
                        max_iter: int = _MAX_ITER, mode: str = "accurate") -> float:
    """|lambda_2| by power iteration on M - lam * rho (x) dual.

    dual must be scaled so that dual . rho = 1; the rank-one removal then
    annihilates the leading eigenspace. Returns 0.0 when the deflated
    iterates collapse to numerical zero (nilpotent remainder).

    mode="accurate" raises NoConvergence when the norm ratios never settle;
    mode="estimate" instead returns a geometric-mean proxy over a trailing
    window after a fixed budget, which is what gap monitors need when the
    remainder spectrum drives transient oscillations.
    """
    scale = np.dot(dual, rho)
    if abs(scale) < 1e-300:
        raise NoConvergence("dual vector is orthogonal to the eigenfunction")
    dual = dual / scale

    def apply(u):
        return mat @ u - lam * rho * np.dot(dual, u)

    budget = max_iter if mode == "accurate" else 512
    collapse = 1e-8 * max(1.0, abs(lam))
    v = _start_vector(mat.shape[0], seed).astype(complex)
    v = apply(v)  # kill the leading component before measuring
    nv = np.linalg.norm(v)
    if nv < collapse:
        return 0.0
    v /= nv
    prev = None
    hits = 0
    history = []
    for _ in range(budget):
        w = apply(v)
        nw = np.linalg.norm(w)
        if nw < collapse:
            # the remainder acts nilpotently at this resolution: iterates
            # contract to rounding noise and then regenerate, so no modulus
            # above noise level exists
            return 0.0
        cur = nw  # norm ratio; converges even for an equal-modulus pair
        history.append(cur)
        v = w / nw
        if prev is not None and abs(cur - prev) < tol * max(1.0, cur):
            hits += 1
            if hits >= 5:
                return float(cur)
        else:
            hits = 0
        prev = cur
    if mode == "estimate":
        window = np.array(history[-64:])
        return float(np.exp(np.mean(np.log(window))))
    raise NoConvergence("deflated iteration stalled; spectrum may be gapless")


def leading_spectral_data(mat: np.ndarray, tol: float = 1e-13, seed: int = 0,
                          want_gap: bool = True, gap_tol: float = 1e-8,
                          gap_mode: str = "estimate") -> SpectralData:
    """Leading pair, dual weights and subleading ratio for a dense operator.

    For a real positive operator the outputs are real with rho > 0 and
    nonnegative weights summing to 1; complex inputs are returned as-is with
    the same normalizations applied.
    """
    lam, rho, res, _ = power_leading(mat, tol=tol, seed=seed)
    lam_d, dual, _, _ = power_leading(mat.T, tol=tol, seed=seed + 7)
    # clean up phase/sign for the real nonnegative case
    for vec in (rho, dual):
        j = int(np.argmax(np.abs(vec)))
        vec *= np.exp(-1j * np.angle(vec[j]))
    real_case = abs(lam.imag) < 1e-9 * max(1.0, abs(lam)) and \
        np.max(np.abs(rho.imag)) < 1e-6 * np.max(np.abs(rho.real)) and \
        np.max(np.abs(dual.imag)) < 1e-6 * np.max(np.abs(dual.real))
    if real_case:
        rho = rho.real.astype(float)
        dual = dual.real.astype(float)
        if np.sum(rho) < 0:
            rho = -rho
        if np.sum(dual) < 0:
            dual = -dual
    mass = np.sum(dual)
    if abs(mass) < 1e-300:
        raise NoConvergence("dual weights have zero total mass")
    weights = dual / mass
    pairing = np.dot(weights, rho)
    if abs(pairing) < 1e-300:
        raise NoConvergence("eigenfunction orthogonal to the conformal weights")
    rho = rho / pairing
    gap = 0.0
    if want_gap:
        sub = deflated_subleading(mat, lam, rho, weights, tol=gap_tol,
                                  seed=seed + 13, mode=gap_mode)
        gap = float(sub / abs(lam)) if abs(lam) > 0 else 0.0
    return SpectralData(lam=lam, rho=rho, weights=weights, gap=gap, residual=res)
