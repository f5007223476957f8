"""Hot elementwise kernels.

Every kernel exists twice: a scalar-loop version compiled with numba and a
vectorized numpy version. The module-level names (``spectral_offset``,
``continued_density`` ...) point at whichever backend ``_accel`` selected;
both variants stay importable so they can be tested and benchmarked against
each other.

Self-energy conventions (``x = (E - eth) / lam``)::

    Im Pi = pi chi lam x / (1 + x^2)^4
    Re Pi = chi lam (bracket(x) + C)

``bracket`` is the closed-form dispersion integral of the imaginary part; it
is written here multiplied through by ``D^4 = (1 + x^2)^4`` so the continued
density can be evaluated next to the poles at ``x = +-i`` without overflow.

The continued density is ``I / (pi P1 P2)`` with ``P1,2 = z - M + R -+ iI``.
Near ``x = -i`` (``+i``) the factor ``P1`` (``P2``) is the physical-sheet
propagator denominator: regular, but only available from the closed form as
a difference of two ``O(D^-4)`` terms.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from ._accel import USE_NUMBA, njit

PI = math.pi

# Within CAUCHY_SWITCH of x = +-i the regular propagator factor is rebuilt
# from a 64-point Cauchy integral on a circle of radius CAUCHY_RADIUS.
CAUCHY_SWITCH = 0.05
CAUCHY_RADIUS = 0.1
_ROOTS = np.exp(2j * np.pi * np.arange(64) / 64)


# ---------------------------------------------------------------- numpy path


def bracket_np(x):
    """``D^4 * bracket(x)`` for real (x > 0) or complex arrays."""
    x = np.asarray(x)
    x2 = x * x
    D = 1.0 + x2
    with np.errstate(divide="ignore", invalid="ignore"):
        xl = np.where(x == 0, 0.0, x * np.log(np.where(x == 0, 1.0, x)))
    return (
        -(2.0 * xl + PI * x2) / 2.0
        - D * (2.0 * x + PI * x2) / 4.0
        - D * D * (4.0 * x + 3.0 * PI * x2) / 16.0
        + D * D * D * (15.0 * PI - 16.0 * x) / 96.0
    )


def spectral_offset_np(u, M, eth, chi, lam, C, power=0):
    u = np.asarray(u, dtype=np.float64)
    E = M + u
    out = np.zeros_like(u)
    m = E > eth
    x = (E[m] - eth) / lam
    D = 1.0 + x * x
    D4 = (D * D) ** 2
    im = PI * chi * lam * x / D4
    re = chi * lam * (bracket_np(x) / D4 + C)
    r = u[m] + re
    val = im / (PI * (r * r + im * im))
    if power:
        val = val * u[m] ** power
    out[m] = val
    return out


def _p_formula_np(z, sign, M, eth, chi, lam, C):
    """``z - M + R(z) + sign * i I(z)`` straight from the closed forms."""
    x = (z - eth) / lam
    D = 1.0 + x * x
    D4 = (D * D) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return (z - M) + chi * lam * (bracket_np(x) + C * D4 + sign * 1j * PI * x) / D4


def _p_cauchy_np(z, sign, M, eth, chi, lam, C):
    # P is regular inside the disc but the closed form cancels ~1/D^4 terms there.
    c = eth + sign * 1j * lam
    xi = c + CAUCHY_RADIUS * lam * _ROOTS
    pv = _p_formula_np(xi, sign, M, eth, chi, lam, C)
    w = (xi - c)[None, :] / (xi[None, :] - z[:, None])
    return (pv[None, :] * w).mean(axis=1)


def continued_density_np(z, M, eth, chi, lam, C):
    z = np.asarray(z, dtype=np.complex128)
    shape = z.shape
    z = z.reshape(-1)
    x = (z - eth) / lam
    D = 1.0 + x * x
    D4 = (D * D) ** 2
    q = bracket_np(x) + C * D4
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = (z - M) + chi * lam * (q - 1j * PI * x) / D4
        val = x / (p1 * ((z - M) * D4 / (chi * lam) + q + 1j * PI * x))
        inv_im = D4 / (PI * chi * lam * x)
        for sign in (-1.0, 1.0):
            m = np.abs(x - sign * 1j) < CAUCHY_SWITCH
            if np.any(m):
                preg = _p_cauchy_np(z[m], sign, M, eth, chi, lam, C)
                val[m] = 1.0 / (PI * preg * (preg * inv_im[m] - sign * 2j))
    return np.where(x == 0, 0.0j, val).reshape(shape)


def oscillate_np(values, x, t):
    return values * np.exp(-1j * (np.asarray(x) * t))


def oscillate_deficit_np(values, x, t):
    """``values * (1 - exp(-i x t))`` without cancellation at small ``x t``."""
    ph = np.asarray(x) * t
    s = np.sin(0.5 * ph)
    return values * (2.0 * s * s + 1j * np.sin(ph))


def background_integrand_np(s, t, power, M, eth, chi, lam, C):
    """``y^power d_S(-i y) exp(-s)`` with ``y = s / t``."""
    s = np.asarray(s, dtype=np.float64)
    y = s / t
    val = continued_density_np(-1j * y, M, eth, chi, lam, C) * np.exp(-s)
    if power:
        val = val * y**power
    return val


# ---------------------------------------------------------------- numba path


@njit
def _bracket_real(x):
    x2 = x * x
    D = 1.0 + x2
    return (
        -(2.0 * x * math.log(x) + PI * x2) / 2.0
        - D * (2.0 * x + PI * x2) / 4.0
        - D * D * (4.0 * x + 3.0 * PI * x2) / 16.0
        + D * D * D * (15.0 * PI - 16.0 * x) / 96.0
    )


@njit
def _bracket_complex(x):
    x2 = x * x
    D = 1.0 + x2
    xl = 0.0j if x == 0 else x * cmath.log(x)
    return (
        -(2.0 * xl + PI * x2) / 2.0
        - D * (2.0 * x + PI * x2) / 4.0
        - D * D * (4.0 * x + 3.0 * PI * x2) / 16.0
        + D * D * D * (15.0 * PI - 16.0 * x) / 96.0
    )


@njit
def _p_formula(z, sign, M, eth, chi, lam, C):
    x = (z - eth) / lam
    D = 1.0 + x * x
    D4 = (D * D) * (D * D)
    return (z - M) + chi * lam * (_bracket_complex(x) + C * D4 + sign * 1j * PI * x) / D4


@njit
def _p_cauchy(z, sign, M, eth, chi, lam, C):
    c = eth + sign * 1j * lam
    acc = 0.0j
    for j in range(_ROOTS.shape[0]):
        xi = c + CAUCHY_RADIUS * lam * _ROOTS[j]
        acc += _p_formula(xi, sign, M, eth, chi, lam, C) * (xi - c) / (xi - z)
    return acc / _ROOTS.shape[0]


@njit
def _density_complex(z, M, eth, chi, lam, C):
    x = (z - eth) / lam
    if x == 0:
        return 0.0j
    D = 1.0 + x * x
    D4 = (D * D) * (D * D)
    for sign in (-1.0, 1.0):
        if abs(x - sign * 1j) < CAUCHY_SWITCH:
            preg = _p_cauchy(z, sign, M, eth, chi, lam, C)
            inv_im = D4 / (PI * chi * lam * x)
            return 1.0 / (PI * preg * (preg * inv_im - sign * 2j))
    q = _bracket_complex(x) + C * D4
    p1 = (z - M) + chi * lam * (q - 1j * PI * x) / D4
    return x / (p1 * ((z - M) * D4 / (chi * lam) + q + 1j * PI * x))


@njit
def spectral_offset_nb(u, M, eth, chi, lam, C, power):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        ui = u[i]
        E = M + ui
        if E <= eth:
            out[i] = 0.0
            continue
        x = (E - eth) / lam
        D = 1.0 + x * x
        D4 = (D * D) * (D * D)
        im = PI * chi * lam * x / D4
        re = chi * lam * (_bracket_real(x) / D4 + C)
        r = ui + re
        val = im / (PI * (r * r + im * im))
        if power:
            val *= ui**power
        out[i] = val
    return out


@njit
def continued_density_nb(z, M, eth, chi, lam, C):
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        out[i] = _density_complex(z[i], M, eth, chi, lam, C)
    return out


@njit
def oscillate_nb(values, x, t):
    out = np.empty(x.shape[0], dtype=np.complex128)
    for i in range(x.shape[0]):
        ph = x[i] * t
        out[i] = values[i] * complex(math.cos(ph), -math.sin(ph))
    return out


@njit
def oscillate_deficit_nb(values, x, t):
    out = np.empty(x.shape[0], dtype=np.complex128)
    for i in range(x.shape[0]):
        ph = x[i] * t
        s = math.sin(0.5 * ph)
        out[i] = values[i] * complex(2.0 * s * s, math.sin(ph))
    return out


@njit
def background_integrand_nb(s, t, power, M, eth, chi, lam, C):
    out = np.empty(s.shape[0], dtype=np.complex128)
    for i in range(s.shape[0]):
        y = s[i] / t
        val = _density_complex(complex(0.0, -y), M, eth, chi, lam, C) * math.exp(-s[i])
        if power:
            val *= y**power
        out[i] = val
    return out


# ------------------------------------------------------------------ dispatch


def _flat(a, dtype):
    return np.ascontiguousarray(np.ravel(a), dtype=dtype)


if USE_NUMBA:

    def spectral_offset(u, M, eth, chi, lam, C, power=0):
        u = np.asarray(u, dtype=np.float64)
        return spectral_offset_nb(_flat(u, np.float64), M, eth, chi, lam, C, power).reshape(u.shape)

    def continued_density(z, M, eth, chi, lam, C):
        z = np.asarray(z, dtype=np.complex128)
        return continued_density_nb(_flat(z, np.complex128), M, eth, chi, lam, C).reshape(z.shape)

    def oscillate(values, x, t):
        x = np.asarray(x, dtype=np.float64)
        v = _flat(values, np.complex128)
        return oscillate_nb(v, _flat(x, np.float64), float(t)).reshape(x.shape)

    def oscillate_deficit(values, x, t):
        x = np.asarray(x, dtype=np.float64)
        v = _flat(values, np.complex128)
        return oscillate_deficit_nb(v, _flat(x, np.float64), float(t)).reshape(x.shape)

    def background_integrand(s, t, power, M, eth, chi, lam, C):
        s = np.asarray(s, dtype=np.float64)
        out = background_integrand_nb(_flat(s, np.float64), float(t), power, M, eth, chi, lam, C)
        return out.reshape(s.shape)

else:
    spectral_offset = spectral_offset_np
    continued_density = continued_density_np
    oscillate = oscillate_np
    oscillate_deficit = oscillate_deficit_np
    background_integrand = background_integrand_np
