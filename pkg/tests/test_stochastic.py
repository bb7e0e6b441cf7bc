"""Monte-Carlo CLT diagnostics and the Green-Kubo variance."""

import numpy as np
import pytest

from innerdyn.blaschke import BlaschkeMap, angle_map
from innerdyn.circle import circle_grid
from innerdyn.errors import DegenerateVariance
from innerdyn.observables import COS, Observable, constant
from innerdyn.rng import splitmix64, uniform_stream
from innerdyn.stochastic import (BirkhoffSample, birkhoff_samples,
                                 clt_diagnostics, correlation_sequence,
                                 green_kubo_variance)

F2 = BlaschkeMap.monomial(2)
FH = BlaschkeMap((0j, 0.5 + 0j))
GK_FH_COS = 1.0 / 6.0


def test_rng_streams_reproducible_and_uniform():
    a = uniform_stream(7, 1000)
    b = uniform_stream(7, 1000)
    assert np.array_equal(a, b)
    # stream position is the counter: batching cannot change sample i
    assert np.array_equal(uniform_stream(7, 10, offset=5), a[5:15] * 0 + uniform_stream(7, 15)[5:15])
    assert abs(a.mean() - 0.5) < 0.05
    assert not np.array_equal(splitmix64(1, [0, 1]), splitmix64(2, [0, 1]))


def test_sample_mean_within_monte_carlo_error():
    # mean of S_n h / sqrt(n) is 0; the sample mean fluctuates at
    # sigma / sqrt(samples)
    s = birkhoff_samples(F2, COS, 4096, 20000, seed=7)
    assert s.exact_angles
    assert abs(np.mean(s.values)) < 3 * np.sqrt(0.5 / 20000)


def test_constant_observable_centered_to_zero():
    s = birkhoff_samples(F2, constant(1.0), 256, 100, seed=3)
    assert np.max(np.abs(s.values)) < 1e-10


def test_exact_iterator_matches_float_doubling_start():
    # the digit-window orbit is the doubling orbit of its own seed angle
    s = birkhoff_samples(F2, COS, 20, 50, seed=11)
    from innerdyn.stochastic import _exact_monomial_angles
    gen = _exact_monomial_angles(2, 20, 50, 11)
    theta0 = next(iter(gen))
    acc = np.cos(theta0)
    th = theta0.copy()
    for _ in range(19):
        th = np.mod(2 * th, 2 * np.pi)
        acc += np.cos(th)
    # float doubling drifts a little; distributional agreement is loose
    assert np.max(np.abs(acc / np.sqrt(20) - s.values)) < 1e-6


def test_ks_self_consistency_on_injected_normals():
    rng = np.random.default_rng(0)
    vals = rng.normal(0.0, 1.0, 40000)
    sample = BirkhoffSample(n=1, values=vals, seed=0, observable="h",
                            map_label="none", exact_angles=True)
    ks, ratio = clt_diagnostics(sample, 1.0)
    assert ks < 3.0 / np.sqrt(40000) * 1.63
    assert ratio == pytest.approx(1.0, abs=0.05)


def test_degenerate_variance_rejected():
    sample = BirkhoffSample(n=1, values=np.zeros(10), seed=0, observable="h",
                            map_label="none", exact_angles=True)
    with pytest.raises(DegenerateVariance):
        clt_diagnostics(sample, 0.0)


def test_coboundary_telescopes():
    # h = cos(2t) - cos(t) = z o F - z under doubling: S_n h stays bounded
    cob = Observable("cob", lambda t: np.cos(2 * np.asarray(t)) - np.cos(np.asarray(t)))
    s = birkhoff_samples(F2, cob, 1024, 3000, seed=5)
    assert np.var(s.values) < 0.01


def test_green_kubo_monomial_exact():
    # orthogonality oracle: every composed correlation of cos vanishes
    assert green_kubo_variance(F2, COS) == pytest.approx(0.5, abs=1e-12)
    assert green_kubo_variance(F2, constant(0.0)) == pytest.approx(0.0, abs=1e-14)


def test_green_kubo_fh_closed_form():
    # c_k = (1/2) (F'(0))^k because the k-step correlation of e_1 picks the
    # first Taylor coefficient of F^k; the series sums to 1/6
    c = correlation_sequence(FH, COS, 12)
    want = 0.5 * (-0.5) ** np.arange(13)
    assert c == pytest.approx(want, abs=1e-12)
    assert green_kubo_variance(FH, COS) == pytest.approx(GK_FH_COS, abs=1e-12)


def test_correlations_match_direct_composition_quadrature():
    # independent route: iterate the grid angles and integrate the product
    N = 1 << 18
    grid = circle_grid(N)
    hv = np.cos(grid)
    cur = grid.copy()
    c = correlation_sequence(FH, COS, 6)
    for k in range(1, 7):
        cur = angle_map(FH, cur)
        direct = float(np.mean(hv * np.cos(cur)))
        assert direct == pytest.approx(c[k], abs=1e-8)


def test_variance_triangle():
    # Green-Kubo, pressure curvature, and Monte-Carlo agree pairwise
    from innerdyn.transfer import pressure_and_derivs
    gk = green_kubo_variance(FH, COS)
    rep = pressure_and_derivs(FH, COS, h=1e-2)
    s = birkhoff_samples(FH, COS, 2048, 20000, seed=13)
    mc = np.var(s.values, ddof=1)
    assert abs(rep.ddp / gk - 1) < 0.05
    assert abs(mc / gk - 1) < 0.05
    assert abs(mc / rep.ddp - 1) < 0.05
    assert gk > 0


def test_clt_improves_with_orbit_length():
    # distributional distance shrinks from n=64 to n=4096 for three seeds
    for seed in (1, 2, 3):
        s64 = birkhoff_samples(F2, COS, 64, 20000, seed=seed)
        s4096 = birkhoff_samples(F2, COS, 4096, 20000, seed=seed)
        ks64, _ = clt_diagnostics(s64, 0.5)
        ks4096, _ = clt_diagnostics(s4096, 0.5)
        assert ks4096 < ks64


def test_general_degree_exact_iterator():
    s = birkhoff_samples(BlaschkeMap.monomial(3), COS, 256, 4000, seed=3)
    assert s.exact_angles
    ks, ratio = clt_diagnostics(s, 0.5)
    assert ks < 0.03
    assert ratio == pytest.approx(1.0, abs=0.1)
