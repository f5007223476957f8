"""Diagnostics derived from the survival amplitude.

Energy moments and the Zeno time, the effective decay width and its
anti-Zeno maximum, level crossings of the width ratio, the turn-over time
between exponential and power-law decay, and power-law fits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .amplitude import (
    DEFICIT_CONFIG,
    WIDTH_CONFIG,
    PoleData,
    RegimePolicy,
    amplitude,
    amplitude_contour,
    amplitude_derivative,
    build_pole_data,
    spectral_moment,
    spectral_transform,
    survival_deficit,
    _pick,
)
from .physics import ModelParams
from .quadrature import InfeasibleError, QuadConfig, integrate_pv

MOMENT_CONFIG = QuadConfig(abs_tol=0.0, rel_tol=1e-10)
CROSSING_LEVELS = (2.0, 1.1, 1.01)


@dataclass(frozen=True)
class MomentsReport:
    """Energy moments of the spectral function (absolute energies, eV)."""

    mean_E: float
    mean_E2: float
    sigma_E: float
    zeno_time: float
    zeno_time_s: float
    norm: float

    def __post_init__(self):
        if not self.mean_E2 >= self.mean_E**2:
            raise ValueError("inconsistent moments: <E^2> < <E>^2")


@dataclass(frozen=True)
class WidthSample:
    t: float
    gamma_eff_ratio: float


@dataclass(frozen=True)
class TurnoverReport:
    t_turnover: float
    t_turnover_s: float
    t_over_tau: float

    def __post_init__(self):
        if not self.t_over_tau > 100.0:
            raise ValueError(f"turn-over at {self.t_over_tau:.4g} tau, expected beyond 100 tau")


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    mixed_regime: bool


# ------------------------------------------------------------------ moments


def energy_moments(p: ModelParams, cfg: QuadConfig = MOMENT_CONFIG) -> MomentsReport:
    """``<E>``, ``<E^2>``, ``sigma_E`` and ``tau_Z = 1/sigma_E``.

    The integrals are taken in the offset ``u = E - M`` and normalized by the
    zeroth moment, so the variance does not suffer from the ``M^2``
    cancellation.
    """
    m0 = spectral_moment(p, 0, cfg).check("norm")
    m1 = spectral_moment(p, 1, cfg).check("first moment") / m0
    m2 = spectral_moment(p, 2, cfg).check("second moment") / m0
    var = m2 - m1 * m1
    sigma = math.sqrt(var)
    mean = p.M + m1
    tz = 1.0 / sigma
    return MomentsReport(mean, mean * mean + var, sigma, tz, p.seconds(tz), float(m0))


def short_time_expansion(p: ModelParams, cfg: QuadConfig = MOMENT_CONFIG):
    """Coefficients ``(<E>, sigma_E^2)`` of ``A ~ e^{-i<E>t}``, ``P ~ 1 - sigma^2 t^2``."""
    m = energy_moments(p, cfg)
    return m.mean_E, m.sigma_E**2


def quadratic_law_residual(t, p: ModelParams, cfg: QuadConfig = DEFICIT_CONFIG, sigma2=None) -> float:
    """Relative deviation ``(1 - P(t)) / (sigma^2 t^2) - 1`` of the Zeno law."""
    if sigma2 is None:
        sigma2 = short_time_expansion(p)[1]
    return survival_deficit(t, p, cfg) / (sigma2 * t * t) - 1.0


# -------------------------------------------------------------------- width


def _width_ratio(t, p, policy, cfg, method="auto"):
    if t == 0:
        return 0.0
    chosen = _pick(t, policy, method)
    if chosen == "direct":
        try:
            # The carrier e^{-iMt} drops out of Re(A' conj A); keeping it out
            # avoids an O(M/Gamma) cancellation.
            A0 = spectral_transform(t, p, 0, cfg).check("direct amplitude")
            B = spectral_transform(t, p, 1, cfg).check("first-moment transform")
            P = abs(A0) ** 2
            num = -2.0 * (B * A0.conjugate()).imag
        except InfeasibleError:
            if method != "auto" or t < policy.t_contour_min:
                raise
            chosen = "contour"
    if chosen != "direct":
        A = amplitude(t, p, policy, cfg, method=chosen).amplitude
        dA = amplitude_derivative(t, p, policy, cfg, method=chosen)
        phase = cmath.exp(1j * p.M * t)
        A, dA = A * phase, (dA * phase + 1j * p.M * A * phase)
        P = abs(A) ** 2
        num = -2.0 * (dA * A.conjugate()).real
    if not (P > 1e-300 and math.isfinite(P)):
        raise ZeroDivisionError(f"survival probability underflows at t={t:g}")
    return float(num / P / p.Gamma)


def effective_width(t, p: ModelParams, policy: RegimePolicy = RegimePolicy(),
                    cfg: QuadConfig = WIDTH_CONFIG, method: str = "auto") -> WidthSample:
    """``Gamma_eff(t) / Gamma`` with ``Gamma_eff = -P'(t) / P(t)``.

    Uses the exact derivative of the amplitude, never finite differences.
    """
    if t < 0:
        raise ValueError("need t >= 0")
    return WidthSample(float(t), _width_ratio(t, p, policy, cfg, method))


@lru_cache(maxsize=16)
def _scan(p, policy, cfg, lo, hi, per_decade):
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    ts = np.geomspace(lo, hi, n)
    return ts, np.array([_width_ratio(t, p, policy, cfg) for t in ts])


def antizeno_maximum(p: ModelParams, policy: RegimePolicy = RegimePolicy(), cfg: QuadConfig = WIDTH_CONFIG,
                     t_range=(1e-6, 1e-1), per_decade: int = 200):
    """Global maximum of ``Gamma_eff / Gamma`` on ``t_range``.

    A log-spaced scan brackets the maximum, a golden-section search in
    ``log t`` refines it. Returns ``(t, ratio)``.
    """
    ts, r = _scan(p, policy, cfg, float(t_range[0]), float(t_range[1]), per_decade)
    i = int(np.argmax(r))
    if i == 0 or i == ts.size - 1:
        return float(ts[i]), float(r[i])

    def neg(s):
        return -_width_ratio(math.exp(s), p, policy, cfg)

    lg = np.log(ts[i - 1:i + 2])
    res = minimize_scalar(neg, bracket=tuple(lg), method="golden", tol=1e-6)
    t = math.exp(res.x)
    return t, -float(res.fun)


def width_crossings(levels=CROSSING_LEVELS, p: ModelParams = None, policy: RegimePolicy = RegimePolicy(),
                    cfg: QuadConfig = WIDTH_CONFIG, t_max=None, t_hi: float = 0.2, points: int = 100):
    """Times where ``Gamma_eff / Gamma`` falls through each level after the maximum.

    Returns a list of ``(level, t)`` in the order of ``levels``. Raises
    ``ValueError`` when a level is not crossed on ``[t_max, t_hi]``.
    """
    if p is None:
        raise ValueError("model parameters required")
    if t_max is None:
        t_max = antizeno_maximum(p, policy, cfg)[0]
    ts, r = _scan(p, policy, cfg, float(t_max), float(t_hi), points)
    out = []
    for level in levels:
        if not level > 1.0:
            raise ValueError(f"level {level} must exceed 1")
        below = np.nonzero(r < level)[0]
        if below.size == 0 or below[0] == 0:
            raise ValueError(f"level {level} not bracketed on [{t_max:g}, {t_hi:g}]")
        j = int(below[0])
        t = brentq(lambda s: _width_ratio(s, p, policy, cfg) - level, ts[j - 1], ts[j], rtol=1e-12)
        out.append((float(level), float(t)))
    return out


def zeno_crossover(p: ModelParams, policy: RegimePolicy = RegimePolicy(), cfg: QuadConfig = WIDTH_CONFIG,
                   t_max=None) -> float:
    """First time at which ``Gamma_eff / Gamma`` rises through 1."""
    if t_max is None:
        t_max = antizeno_maximum(p, policy, cfg)[0]
    ts, r = _scan(p, policy, cfg, 1e-9, float(t_max), 50)
    above = np.nonzero(r > 1.0)[0]
    if above.size == 0 or above[0] == 0:
        raise ValueError("no Zeno to anti-Zeno crossover found")
    j = int(above[0])
    return float(brentq(lambda s: _width_ratio(s, p, policy, cfg) - 1.0, ts[j - 1], ts[j], rtol=1e-12))


# ----------------------------------------------------------------- turnover


def turnover_time(p: ModelParams, poles: PoleData | None = None) -> TurnoverReport:
    """Solve ``|c| exp(-Gamma t/2) = chi / (M^2 t^2)`` on ``[10 tau, 1e4 tau]``."""
    poles = build_pole_data(p) if poles is None else poles
    lc = math.log(abs(poles.pole_coefficient))
    lb = math.log(p.chi / p.M**2)

    def g(t):
        return lc - 0.5 * p.Gamma * t - lb + 2.0 * math.log(t)

    t = brentq(g, 10.0 * p.tau, 1e4 * p.tau, xtol=1e-12 * p.tau, rtol=4 * np.finfo(float).eps)
    return TurnoverReport(t, p.seconds(t), t / p.tau)


def powerlaw_exponent(p: ModelParams, t_lo=None, t_hi=None, n_points: int = 50,
                      cfg: QuadConfig = QuadConfig(abs_tol=0.0, rel_tol=1e-8), survival=None) -> PowerLawFit:
    """Least-squares slope of ``log P`` against ``log t``.

    The default window is ``[1e3 tau, 1e4 tau]``. ``survival`` replaces the
    contour evaluation of ``P(t)`` (a callable of ``t``). Windows starting
    before the turn-over are flagged as mixed-regime.
    """
    t_lo = 1e3 * p.tau if t_lo is None else t_lo
    t_hi = 1e4 * p.tau if t_hi is None else t_hi
    if not 0 < t_lo < t_hi or n_points < 2:
        raise ValueError("need 0 < t_lo < t_hi and n_points >= 2")
    if survival is None:
        def survival(t):
            return abs(amplitude_contour(t, p, cfg)) ** 2
    ts = np.geomspace(t_lo, t_hi, n_points)
    P = np.array([survival(t) for t in ts], dtype=float)
    if np.any(P <= 0):
        raise ValueError("survival must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(ts), np.log(P), 1)
    mixed = t_lo < turnover_time(p).t_turnover
    return PowerLawFit(float(slope), float(intercept), bool(mixed))


# --------------------------------------------------------------- dispersion


def dispersion_real_part(E, p: ModelParams, cfg: QuadConfig = QuadConfig(abs_tol=0.0, rel_tol=1e-13)) -> float:
    """Unsubtracted principal value ``(1/pi) P int Im Pi(E') / (E' - E) dE'``.

    Independent of the closed form; used as an oracle for ``Re Pi``.
    The integral is truncated where the ``x^-8`` tail is below double precision.
    """
    x = (E - p.E_th) / p.Lambda
    if not x > 0:
        raise ValueError("need E above threshold")

    def g(xp):
        return xp / (1.0 + xp * xp) ** 4

    X = max(200.0, 200.0 * x)
    r = integrate_pv(g, 0.0, X, x, cfg, points=(1.0, 10.0))
    return float(p.chi * p.Lambda * r.check("dispersion integral").real)

