"""Fourier-collocation transfer operators on the circle and their spectra.

The weighted operator with parameter s and observable g sends
u(x) -> sum_{F(y)=x} |F'(y)|^{-s} e^{s g(y)} u(y). Functions are represented
by their values at N equispaced collocation angles; u is evaluated at the
preimages through its trigonometric interpolant, which is spectrally accurate
because everything in sight is analytic for finite Blaschke products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blaschke import BlaschkeMap, boundary_preimages_batch, circle_abs_deriv, circle_grid
from .errors import GapLost
from .spectral import SpectralData, deflated_subleading, leading_spectral_data

_GAP_CEILING = 0.95


@dataclass
class OperatorMatrix:
    """Dense collocation matrix of a weighted transfer operator."""

    matrix: np.ndarray
    grid: np.ndarray
    preimages: np.ndarray   # shape (N, d), angles
    weights: np.ndarray     # shape (N, d), |F'|^{-s} e^{s g}
    s: complex
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.grid)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    def unit_mass_defect(self) -> float:
        """sup-norm of M*1 - 1; zero for s = 1 with no observable."""
        one = np.ones(self.dimension)
        return float(np.max(np.abs(self.matrix @ one - 1.0)))


def assemble_operator(F: BlaschkeMap, s: complex = 1.0, g=None, N: int = 256) -> OperatorMatrix:
    """Collocation matrix for the weight |F'|^{-s} e^{s g} on N grid values."""
    if N < 32 or N > 4096 or N & (N - 1):
        raise ValueError("N must be a power of two in [32, 4096]")
    grid = circle_grid(N)
    Y = boundary_preimages_batch(F, grid)
    W = circle_abs_deriv(F, Y) ** (-s)
    if g is not None:
        W = W * np.exp(s * np.asarray(g(Y), dtype=complex))
    dft = np.fft.fft(np.eye(N), axis=0) / N  # values -> Fourier coefficients
    freqs = np.fft.fftfreq(N, d=1.0 / N)
    mat = np.zeros((N, N), dtype=complex)
    for l in range(F.degree):
        E = np.exp(1j * np.outer(Y[:, l], freqs))
        mat += W[:, l][:, None] * (E @ dft)
    meta = {"map": F.label(), "s": complex(s),
            "observable": getattr(g, "name", None) if g is not None else None}
    return OperatorMatrix(matrix=mat, grid=grid, preimages=Y, weights=W, s=complex(s), meta=meta)


def leading_eigen(M: OperatorMatrix, tol: float = 1e-13) -> SpectralData:
    """Leading eigenvalue, eigenfunction and conformal weights of M.

    The eigenfunction is normalized to integral 1 against the conformal
    weights, which themselves sum to 1; the gap field holds |lambda_2/lambda|
    from deflated iteration.
    """
    if tol < 1e-16:
        raise ValueError("tol too small")
    data = leading_spectral_data(M.matrix, tol=tol)
    data.meta.update(M.meta)
    return data


def subleading_modulus(M: OperatorMatrix, S: SpectralData) -> float:
    """|lambda_2| of M given its leading spectral data."""
    return float(deflated_subleading(M.matrix, S.lam, S.rho, S.weights))


def integrate(weights: np.ndarray, values: np.ndarray) -> complex:
    """Integral of grid values against a discrete measure on the grid."""
    return complex(np.dot(weights, values))


@dataclass
class PressureReport:
    """Pressure curve data at 0 and its first two derivatives.

    mean_prediction and variance_prediction are the independent checks:
    the observable's Lebesgue mean and its Green-Kubo asymptotic variance.
    """

    p0: float
    dp: float
    ddp: float
    mean_prediction: float
    variance_prediction: float
    min_gap: float
    nodes: dict


def pressure_and_derivs(F: BlaschkeMap, g, h: float = 1e-2, N: int = 256,
                        tol: float = 1e-14) -> PressureReport:
    """log lambda of the perturbed operator and central-difference derivatives.

    P(t) = log lambda(|F'|^{-1} e^{t g}) is evaluated on the five-point
    stencil {0, +-h, +-2h}; fourth-order (Richardson-refined) differences give
    P'(0) and P''(0). A gap monitor guards the perturbation smallness.
    """
    if not 1e-4 <= h <= 1e-2:
        raise ValueError("step h must lie in [1e-4, 1e-2]")
    tvals = (-2 * h, -h, 0.0, h, 2 * h)
    pvals = {}
    min_gap = 1.0
    for t in tvals:
        def gt(theta, _t=t):
            return _t * np.asarray(g(theta), dtype=float)
        M = assemble_operator(F, 1.0, gt if t != 0.0 else None, N)
        data = leading_eigen(M, tol=tol)
        if data.gap > _GAP_CEILING:
            raise GapLost(f"subleading ratio {data.gap:.3f} at node t = {t}")
        min_gap = min(min_gap, 1.0 - data.gap)
        pvals[t] = float(np.log(data.lam.real))
    p_m2, p_m1, p_0, p_1, p_2 = (pvals[t] for t in tvals)
    dp = (-p_2 + 8 * p_1 - 8 * p_m1 + p_m2) / (12 * h)
    ddp = (-p_2 + 16 * p_1 - 30 * p_0 + 16 * p_m1 - p_m2) / (12 * h * h)
    grid = circle_grid(4096)
    mean_pred = float(np.mean(np.asarray(g(grid), dtype=float)))
    from .stochastic import green_kubo_variance  # local import, avoids a cycle
    var_pred = green_kubo_variance(F, g)
    return PressureReport(p0=p_0, dp=dp, ddp=ddp, mean_prediction=mean_pred,
                          variance_prediction=var_pred, min_gap=min_gap, nodes=pvals)


def conformal_equilibrium(F: BlaschkeMap, g, N: int = 256, tol: float = 1e-13) -> SpectralData:
    """Spectral data for the weight e^{g} |F'|^{-1}.

    The returned weights are the conformal measure on the grid; the product
    rho * weights is the invariant equilibrium measure, checked by the tests
    via the invariance of trigonometric moments.
    """
    M = assemble_operator(F, 1.0, g, N)
    data = leading_eigen(M, tol=tol)
    if data.gap > _GAP_CEILING:
        raise GapLost(f"subleading ratio {data.gap:.3f} for the weighted operator")
    return data


def equilibrium_invariance_defect(F: BlaschkeMap, data: SpectralData,
                                  grid: np.ndarray, n_max: int = 8) -> float:
    """max over |n| <= n_max of |int e_n o F dmu - int e_n dmu| for mu = rho m."""
    from .blaschke import angle_map
    mu = data.weights * data.rho
    fg = angle_map(F, grid)
    worst = 0.0
    for n in range(-n_max, n_max + 1):
        if n == 0:
            continue
        lhs = np.sum(mu * np.exp(1j * n * fg))
        rhs = np.sum(mu * np.exp(1j * n * grid))
        worst = max(worst, abs(lhs - rhs))
    return float(worst)
