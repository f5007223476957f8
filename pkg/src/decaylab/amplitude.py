"""Survival amplitude A(t) by direct Fourier quadrature, by the pole plus
cut (contour) representation and by the closed-form long-time formula.

Direct integrals are taken in the offset variable ``u = E - M`` so the
quadrature nodes resolve the resonance (width ~4e-8 of its position)
exactly; the carrier phase ``exp(-i M t)`` is applied afterwards.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .physics import ModelParams, continued_self_energy
from .quadrature import (
    InfeasibleError,
    QuadConfig,
    QuadResult,
    integrate_adaptive,
    integrate_oscillatory,
    integrate_semiinfinite_exp,
)

AMPLITUDE_CONFIG = QuadConfig(abs_tol=0.0, rel_tol=1e-6)
# Gamma_eff needs the first moment transform to ~1e-12 absolute.
WIDTH_CONFIG = QuadConfig(abs_tol=1e-12, rel_tol=1e-10)
# 1 - P is tiny at short times, so only a relative target makes sense there.
DEFICIT_CONFIG = QuadConfig(abs_tol=0.0, rel_tol=1e-10)

METHODS = ("direct", "contour", "longtime")


class ConsistencyError(RuntimeError):
    """Direct and contour amplitudes disagree inside the overlap window."""


@dataclass(frozen=True)
class PoleData:
    """Resonance pole and its prefactor of ``exp(-i z t)``.

    ``shadow`` lists further second-sheet poles ``(z, coefficient)`` that
    the contour rotation sweeps over; they sit near ``E = -i Lambda`` and
    only matter for ``t`` below ~0.01 eV^-1.
    """

    z_pole: complex
    pole_coefficient: complex
    shadow: tuple = ()

    def __post_init__(self):
        if not self.z_pole.imag < 0:
            raise ValueError("pole must lie in the lower half plane")
        if not 0.9 < abs(self.pole_coefficient) < 1.1:
            raise ValueError("narrow-resonance coefficient must be close to one")

    def term(self, t):
        val = self.pole_coefficient * cmath.exp(-1j * self.z_pole * t)
        for z, c in self.shadow:
            val += c * cmath.exp(-1j * z * t)
        return val

    def term_derivative(self, t):
        val = -1j * self.z_pole * self.pole_coefficient * cmath.exp(-1j * self.z_pole * t)
        for z, c in self.shadow:
            val += -1j * z * c * cmath.exp(-1j * z * t)
        return val

    def resonance_term(self, t):
        """Main pole term only (no shadow poles)."""
        return self.pole_coefficient * cmath.exp(-1j * self.z_pole * t)


@dataclass(frozen=True)
class RegimePolicy:
    t_direct_max: float = 50.0
    t_contour_min: float = 10.0
    overlap_check: bool = True

    def __post_init__(self):
        if self.t_contour_min > self.t_direct_max:
            raise ValueError("need t_contour_min <= t_direct_max")


@dataclass(frozen=True)
class AmplitudeSample:
    t: float
    amplitude: complex
    survival: float
    method: str
    error_estimate: float


# ------------------------------------------------------------------ helpers


def _propagator_denominator(z, p):
    return z - p.M + continued_self_energy(z, p)


def _derivative(fn, z, h):
    return (fn(z + h) - fn(z - h)) / (2.0 * h)


def _newton(fn, z, h, steps=50):
    for _ in range(steps):
        dz = fn(z) / _derivative(fn, z, h)
        z -= dz
        if abs(dz) <= 1e-15 * abs(z):
            break
    return z


def _shadow_poles(p: ModelParams):
    """Zeros of ``z - M + Pi(z)`` near ``z = -i Lambda`` with ``Re z > 0``."""
    fn = lambda z: _propagator_denominator(z, p)  # noqa: E731
    z0 = p.E_th - 1j * p.Lambda
    # Near x = -i the continued self-energy behaves like pi chi Lambda / (8 (x + i)^4).
    rhs = -math.pi * p.chi * p.Lambda / (8.0 * (z0 - p.M))
    out = []
    for k in range(4):
        dx = rhs**0.25 * cmath.exp(0.5j * math.pi * k)
        z = _newton(fn, z0 + p.Lambda * dx, 1e-7 * p.Lambda)
        if z.real > p.E_th and z.imag < 0 and abs(fn(z)) < 1e-9 * abs(z):
            coef = 1.0 / _derivative(fn, z, 1e-7 * p.Lambda)
            out.append((complex(z), complex(coef)))
    out.sort(key=lambda zc: zc[0].real)
    return tuple(out)


@lru_cache(maxsize=32)
def build_pole_data(p: ModelParams, refine: bool = False, shadow: bool = True) -> PoleData:
    """Pole position and prefactor of the exponential term.

    By default the pole is the first-order value ``M - i Gamma/2`` and the
    prefactor is ``-2i I(z) / (z - M + R(z) - i I(z))``. With ``refine`` the
    pole is solved by Newton iteration and the prefactor is the exact
    residue ``1 / (1 + Pi'(z))``.
    """
    z = complex(p.M, -0.5 * p.Gamma)
    if refine:
        fn = lambda w: _propagator_denominator(w, p)  # noqa: E731
        z = _newton(fn, z, 1e-4 * p.M)
        coef = 1.0 / _derivative(fn, z, 1e-4 * p.M)
    else:
        pi = continued_self_energy(z, p)
        R, I = _split(pi, z, p)
        coef = -2j * I / (z - p.M + R - 1j * I)
    return PoleData(complex(z), complex(coef), _shadow_poles(p) if shadow else ())


def _split(pi, z, p):
    """``(R(z), I(z))`` from ``Pi = R + iI``, both analytic in ``z``."""
    x = (z - p.E_th) / p.Lambda
    I = math.pi * p.chi * p.Lambda * x / (1.0 + x * x) ** 4
    return pi - 1j * I, I


def tail_cutoff(p: ModelParams, k: int, tol: float) -> float:
    """Upper energy ``E_cut`` with ``int_{E_cut}^inf E^k d_S dE < tol / 10``.

    Uses ``d_S(E) <= 1.1 chi / (Lambda x^9)`` for ``E >= Lambda``.
    """
    X = (1.1 * p.chi * p.Lambda**k / ((8 - k) * 0.1 * tol)) ** (1.0 / (8 - k))
    return p.E_th + p.Lambda * max(X, 1.0)


def spectral_points(p: ModelParams, e_cut: float, w: float = 1e4, k: float = 10.0):
    """Breakpoints in ``u = E - M`` for integrals of the spectral function.

    A factor-two ladder of offsets starting at ``Gamma/2`` resolves the peak;
    ``+-w Gamma``, ``Lambda`` and ``k Lambda`` are added when in range.
    """
    lo, hi = p.E_th - p.M, e_cut - p.M
    n = int(math.ceil(math.log2(max(hi, -lo) / (0.5 * p.Gamma)))) + 1
    ladder = 0.5 * p.Gamma * 2.0 ** np.arange(n)
    pts = [0.0, w * p.Gamma, -w * p.Gamma, p.E_th + p.Lambda - p.M, p.E_th + k * p.Lambda - p.M]
    pts += list(ladder) + list(-ladder)
    return sorted(u for u in pts if lo < u < hi)


def _magnitude_scale(p, k):
    return (1.0, 0.5 * p.Gamma, p.chi * p.Lambda**2 / 6.0)[k]


def _spectral_integral(p, k, t, cfg, kernel=None, cut_tol=None) -> QuadResult:
    if cut_tol is None:
        cut_tol = max(cfg.abs_tol, cfg.rel_tol * _magnitude_scale(p, k))
    e_cut = tail_cutoff(p, k, cut_tol)
    args = p.args

    def g(u):
        return kernels.spectral_offset(u, *args, k)

    return integrate_oscillatory(g, p.E_th - p.M, e_cut - p.M, t, cfg, spectral_points(p, e_cut),
                                 kernel=kernel)


def spectral_moment(p: ModelParams, k: int, cfg: QuadConfig) -> QuadResult:
    """``int (E - M)^k d_S(E) dE`` over ``[E_th, inf)`` for ``k = 0, 1, 2``."""
    tol = max(cfg.abs_tol, cfg.rel_tol * _magnitude_scale(p, k))
    e_cut = tail_cutoff(p, k, tol)
    args = p.args
    return integrate_adaptive(lambda u: kernels.spectral_offset(u, *args, k),
                              p.E_th - p.M, e_cut - p.M, cfg, spectral_points(p, e_cut))


def spectral_transform(t, p: ModelParams, k: int = 0, cfg: QuadConfig = AMPLITUDE_CONFIG) -> QuadResult:
    """``int (E - M)^k d_S(E) exp(-i (E - M) t) dE`` (carrier phase removed)."""
    return _spectral_integral(p, k, t, cfg)


# -------------------------------------------------------------- amplitudes


def amplitude_direct(t, p: ModelParams, cfg: QuadConfig = AMPLITUDE_CONFIG) -> complex:
    r = spectral_transform(t, p, 0, cfg)
    return complex(cmath.exp(-1j * p.M * t) * r.check("direct amplitude"))


def survival_deficit(t, p: ModelParams, cfg: QuadConfig = DEFICIT_CONFIG) -> float:
    """``1 - P(t)`` from ``D = int d_S (1 - exp(-i u t))`` with unit norm.

    Avoids the cancellation in ``1 - |A|^2`` at very short times.
    """
    if t == 0:
        return 0.0
    tol = max(cfg.abs_tol, cfg.rel_tol * (t * t * _magnitude_scale(p, 2) / 2.0))
    X0 = tail_cutoff(p, 0, 0.5 * tol)
    X1 = tail_cutoff(p, 1, tol / t)
    e_cut = min(X0, X1)
    args = p.args
    r = integrate_oscillatory(lambda u: kernels.spectral_offset(u, *args, 0),
                              p.E_th - p.M, e_cut - p.M, t, cfg, spectral_points(p, e_cut),
                              kernel=kernels.oscillate_deficit)
    D = r.check("survival deficit")
    return float(2.0 * D.real - abs(D) ** 2)


def _background(t, p, cfg, power) -> QuadResult:
    args = p.args

    def scaled(s):
        return kernels.background_integrand(s, t, power, *args)

    return integrate_semiinfinite_exp(None, t, cfg, points=(p.M - p.E_th, p.Lambda), scaled=scaled)


def background_term(t, p: ModelParams, cfg: QuadConfig = AMPLITUDE_CONFIG) -> complex:
    """Cut contribution ``-i int_0^inf d_S(-iy) exp(-y t) dy``."""
    return complex(-1j * _background(t, p, cfg, 0).check("background integral"))


def amplitude_contour(t, p: ModelParams, cfg: QuadConfig = AMPLITUDE_CONFIG, poles: PoleData | None = None) -> complex:
    if not t > 0:
        raise ValueError("contour representation needs t > 0")
    poles = build_pole_data(p) if poles is None else poles
    return poles.term(t) + background_term(t, p, cfg)


def amplitude_longtime(t, p: ModelParams, poles: PoleData | None = None) -> complex:
    """Resonance term minus the leading ``chi / (M^2 t^2)`` cut contribution."""
    if not t > 0:
        raise ValueError("need t > 0")
    poles = build_pole_data(p) if poles is None else poles
    return poles.resonance_term(t) - p.chi / (p.M**2 * t * t)


def longtime_error(t, p: ModelParams) -> float:
    """Size of the first neglected term, ``4 chi / (M^3 t^3)``."""
    return 4.0 * p.chi / (p.M**3 * t**3)


def _direct_with_error(t, p, cfg):
    r = spectral_transform(t, p, 0, cfg)
    return cmath.exp(-1j * p.M * t) * r.check("direct amplitude"), r.error_estimate


def _contour_with_error(t, p, cfg):
    r = _background(t, p, cfg, 0)
    return build_pole_data(p).term(t) - 1j * r.check("background integral"), r.error_estimate


def _pick(t, policy, method):
    if method not in ("auto",) + METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method != "auto":
        return method
    return "direct" if t <= policy.t_direct_max else "contour"


def amplitude(t, p: ModelParams, policy: RegimePolicy = RegimePolicy(), cfg: QuadConfig = AMPLITUDE_CONFIG,
              method: str = "auto") -> AmplitudeSample:
    """Evaluate ``A(t)`` with automatic method selection.

    Inside ``[t_contour_min, t_direct_max]`` and with ``overlap_check`` set,
    both methods run and their difference becomes the error estimate; a
    difference above 100x the tolerance raises :class:`ConsistencyError`.
    """
    if t < 0:
        raise ValueError("need t >= 0")
    chosen = _pick(t, policy, method)
    if chosen == "longtime":
        A = amplitude_longtime(t, p)
        return _sample(t, A, "longtime", longtime_error(t, p))
    if chosen == "direct":
        try:
            A, err = _direct_with_error(t, p, cfg)
        except InfeasibleError:
            if method != "auto" or t < policy.t_contour_min:
                raise
            chosen = "contour"
    if chosen == "contour":
        A, err = _contour_with_error(t, p, cfg)
        return _sample(t, A, "contour", err)
    if method == "auto" and policy.overlap_check and policy.t_contour_min <= t <= policy.t_direct_max:
        Ac, errc = _contour_with_error(t, p, cfg)
        delta = abs(A - Ac)
        if delta > 100.0 * max(cfg.tolerance(A), err, errc):
            raise ConsistencyError(f"direct/contour mismatch {delta:.3g} at t={t:g}")
        err = max(err, delta)
    return _sample(t, A, "direct", err)


def _sample(t, A, method, err):
    A = complex(A)
    return AmplitudeSample(float(t), A, abs(A) ** 2, method, float(err))


def amplitude_derivative(t, p: ModelParams, policy: RegimePolicy = RegimePolicy(),
                         cfg: QuadConfig = AMPLITUDE_CONFIG, method: str = "auto") -> complex:
    """Exact ``dA/dt``: differentiation under the integral (direct) or of
    each contour term (contour)."""
    if t < 0:
        raise ValueError("need t >= 0")
    chosen = _pick(t, policy, method)
    if chosen == "longtime":
        poles = build_pole_data(p)
        return (-1j * poles.z_pole * poles.resonance_term(t)
                + 2.0 * p.chi / (p.M**2 * t**3))
    if chosen == "direct":
        try:
            A0 = spectral_transform(t, p, 0, cfg).check("direct amplitude")
            B = spectral_transform(t, p, 1, cfg).check("first-moment transform")
            return complex(-1j * cmath.exp(-1j * p.M * t) * (p.M * A0 + B))
        except InfeasibleError:
            if method != "auto" or t < policy.t_contour_min:
                raise
    if not t > 0:
        raise ValueError("contour representation needs t > 0")
    dbg = 1j * _background(t, p, cfg, 1).check("background derivative")
    return complex(build_pole_data(p).term_derivative(t) + dbg)
