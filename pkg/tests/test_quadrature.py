import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaylab import spectral_density
from decaylab.quadrature import (
    InfeasibleError,
    NonConvergenceError,
    QuadConfig,
    QuadResult,
    integrate_adaptive,
    integrate_oscillatory,
    integrate_pv,
    integrate_semiinfinite_exp,
    oscillation_panels,
)
from decaylab.amplitude import spectral_points, tail_cutoff

CFG = QuadConfig(abs_tol=1e-13, rel_tol=1e-12)


def test_config_invariants():
    with pytest.raises(ValueError):
        QuadConfig(abs_tol=0.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadConfig(max_panels=8)
    assert QuadConfig(abs_tol=1e-3, rel_tol=1e-6).tolerance(10.0) == 1e-3


def test_result_check_raises():
    r = QuadResult(1.0, 1.0, 10, False)
    with pytest.raises(NonConvergenceError) as e:
        r.check()
    assert e.value.result is r
    assert QuadResult(2.0, 0.0, 1, True).check() == 2.0


def test_linear_and_gaussian():
    assert integrate_adaptive(lambda x: x, 0.0, 1.0, CFG).value == pytest.approx(0.5, abs=1e-14)
    r = integrate_adaptive(lambda x: np.exp(-x * x), -6.0, 6.0, CFG)
    assert r.converged and r.value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert r.error_estimate <= CFG.tolerance(r.value)


def test_reports_nonconvergence():
    r = integrate_adaptive(lambda x: 1.0 / np.sqrt(np.abs(x - 0.3)), 0.0, 1.0,
                           QuadConfig(rel_tol=1e-14, max_panels=64))
    assert not r.converged and r.panels_used <= 64


def test_bad_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(lambda x: x, 1.0, 0.0)


def test_peak_window_area(params):
    p = params
    r = integrate_adaptive(lambda E: spectral_density(E, p), p.M - 1e4 * p.Gamma, p.M + 1e4 * p.Gamma,
                           QuadConfig(rel_tol=1e-10), points=[p.M])
    # A Lorentzian loses 1/(pi w) outside +-w Gamma.
    assert r.value == pytest.approx(1 - 1 / (math.pi * 1e4), abs=1e-6)


def test_pv_closed_forms():
    one = lambda x: np.ones_like(x)
    assert integrate_pv(one, -1.0, 1.0, 0.0, CFG).value == pytest.approx(0.0, abs=1e-14)
    assert integrate_pv(one, 0.0, 3.0, 1.0, CFG).value == pytest.approx(math.log(2.0), rel=1e-13)
    with pytest.raises(ValueError):
        integrate_pv(one, 0.0, 1.0, 1.0)


def test_oscillatory_basics():
    one = lambda x: np.ones_like(x)
    r = integrate_oscillatory(one, 0.0, 2 * math.pi, 1.0, QuadConfig(abs_tol=1e-12))
    assert abs(r.value) <= 1e-12
    with pytest.raises(InfeasibleError):
        integrate_oscillatory(one, 0.0, 1e6, 1e3, QuadConfig(max_panels=1000))
    with pytest.raises(ValueError):
        integrate_oscillatory(one, 0.0, 1.0, -1.0)
    assert oscillation_panels(0.0, 2 * math.pi, 1.0) == 8


def test_oscillatory_t0_matches_adaptive(params):
    g = lambda x: np.exp(-x) * np.cos(3 * x)
    a = integrate_oscillatory(g, 0.0, 5.0, 0.0, CFG)
    b = integrate_adaptive(g, 0.0, 5.0, CFG)
    assert a.value == b.value


@pytest.mark.parametrize("tg", [0.1, 0.5])
def test_lorentzian_fourier_transform(params, tg):
    G, M = params.Gamma, params.M
    L = lambda E: (G / (2 * math.pi)) / ((E - M) ** 2 + G * G / 4)
    t = tg / G
    r = integrate_oscillatory(L, M - 1e6 * G, M + 1e6 * G, t,
                              QuadConfig(abs_tol=1e-9, rel_tol=1e-8, max_panels=4_000_000), points=[M])
    exact = np.exp(-1j * M * t - G * t / 2)
    assert abs(r.value - exact) <= 1e-4 * abs(exact)


def test_spectral_norm_t0(params):
    p = params
    e_cut = tail_cutoff(p, 0, 1e-10)
    r = integrate_oscillatory(lambda E: spectral_density(E, p), 0.0, e_cut, 0.0, QuadConfig(rel_tol=1e-10),
                              points=[p.M + u for u in spectral_points(p, e_cut)])
    assert r.value == pytest.approx(1.0, abs=1e-6)


def test_semiinfinite():
    one = lambda y: np.ones_like(y)
    assert integrate_semiinfinite_exp(one, 2.0, CFG).value == pytest.approx(0.5, rel=1e-12)
    assert integrate_semiinfinite_exp(lambda y: y, 1.0, CFG).value == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        integrate_semiinfinite_exp(one, 0.0)


def test_semiinfinite_continued_density(params):
    from decaylab import spectral_density_continued
    p = params
    t = 1e10
    r = integrate_semiinfinite_exp(lambda y: spectral_density_continued(-1j * y, p), t, QuadConfig(rel_tol=1e-8),
                                   points=(p.M, p.Lambda))
    assert r.value == pytest.approx(-1j * p.chi / (p.M**2 * t * t), rel=1e-2)


coef = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=1, max_size=6), st.lists(coef, min_size=1, max_size=6), coef, coef)
def test_linearity(pc, qc, al, be):
    f, g = np.polynomial.Polynomial(pc), np.polynomial.Polynomial(qc)
    cfg = QuadConfig(abs_tol=1e-12, rel_tol=1e-12)
    lhs = integrate_adaptive(lambda x: al * f(x) + be * g(x), -1.0, 2.0, cfg)
    rf, rg = integrate_adaptive(f, -1.0, 2.0, cfg), integrate_adaptive(g, -1.0, 2.0, cfg)
    tol = 2 * (cfg.tolerance(lhs.value) + abs(al) * cfg.tolerance(rf.value) + abs(be) * cfg.tolerance(rg.value))
    assert abs(lhs.value - (al * rf.value + be * rg.value)) <= tol + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.5, 20.0))
def test_additivity(frac, k):
    f = lambda x: np.sin(k * x) * np.exp(-x)
    a, b = 0.0, 3.0
    c = a + frac * (b - a)
    cfg = QuadConfig(abs_tol=1e-12, rel_tol=1e-12)
    whole = integrate_adaptive(f, a, b, cfg)
    left, right = integrate_adaptive(f, a, c, cfg), integrate_adaptive(f, c, b, cfg)
    tol = 2 * (whole.error_estimate + left.error_estimate + right.error_estimate) + 1e-15
    assert abs(whole.value - left.value - right.value) <= max(tol, 2 * cfg.tolerance(whole.value))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 5), st.floats(0.1, 3))
def test_pv_antisymmetry(c, h, w):
    g = lambda x: np.exp(-w * (x - c) ** 2)
    r = integrate_pv(g, c - h, c + h, c, CFG)
    assert abs(r.value) <= 1e-11


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 30.0))
def test_converged_implies_tolerance(t):
    cfg = QuadConfig(abs_tol=1e-10, rel_tol=1e-8)
    r = integrate_oscillatory(lambda x: 1.0 / (1.0 + x * x), -5.0, 5.0, t, cfg)
    assert r.converged and r.error_estimate <= cfg.tolerance(r.value)
