"""Self-energy, its analytic continuation and the spectral function of the
hydrogen 2P state coupled to the 1S + photon continuum.

All energies are in eV and all times in eV^-1 (natural units). Complex
energies are plain Python/numpy complex numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

ALPHA = 7.2973525693e-3
M_E_EV = 510998.95
HBAR_EV_S = 6.582119569e-16


class SingularEnergyError(ValueError):
    """Raised at ``x = (z - E_th)/Lambda = +-i`` where the closed forms have poles."""


@dataclass(frozen=True)
class PhysicalConstants:
    alpha: float = ALPHA
    m_e: float = M_E_EV
    hbar_eV_s: float = HBAR_EV_S

    def __post_init__(self):
        if not 7.29e-3 < self.alpha < 7.30e-3:
            raise ValueError(f"alpha={self.alpha!r} outside (7.29e-3, 7.30e-3)")
        if not 510998.0 < self.m_e < 511000.0:
            raise ValueError(f"m_e={self.m_e!r} eV outside (510998, 511000)")
        if not 6.582e-16 < self.hbar_eV_s < 6.583e-16:
            raise ValueError(f"hbar={self.hbar_eV_s!r} eV s outside (6.582e-16, 6.583e-16)")


def _bracket(x):
    """Closed-form real-part bracket (without the subtraction constant)."""
    x = np.asarray(x)
    D = 1.0 + x * x
    return kernels.bracket_np(x) / (D * D) ** 2


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set of the 2P-1S model.

    ``C`` is never stored as a literal; use :meth:`from_couplings` or
    :func:`derive_params`, which solve ``Re Pi(M) = 0`` for it.
    """

    chi: float
    Lambda: float
    E_th: float
    M: float
    Gamma: float
    tau: float
    C: float
    hbar_eV_s: float = field(default=HBAR_EV_S, compare=True)

    def __post_init__(self):
        if not (self.chi > 0 and self.Lambda > 0 and self.Gamma > 0):
            raise ValueError("chi, Lambda and Gamma must be positive")
        if not self.M > self.E_th:
            raise ValueError("M must lie above the threshold E_th")
        if not math.isclose(self.tau * self.Gamma, 1.0, rel_tol=1e-12):
            raise ValueError("tau must equal 1/Gamma")

    @classmethod
    def from_couplings(cls, chi, Lambda, M, E_th=0.0, Gamma=None, hbar_eV_s=HBAR_EV_S):
        """Build a consistent parameter set; ``Gamma`` defaults to ``2 Im Pi(M)``."""
        x_m = (M - E_th) / Lambda
        C = -float(_bracket(x_m))
        if Gamma is None:
            Gamma = 2.0 * math.pi * chi * Lambda * x_m / (1.0 + x_m * x_m) ** 4
        return cls(chi, Lambda, E_th, M, Gamma, 1.0 / Gamma, C, hbar_eV_s)

    @property
    def args(self):
        """Positional parameter tuple consumed by :mod:`decaylab.kernels`."""
        return (self.M, self.E_th, self.chi, self.Lambda, self.C)

    def seconds(self, t):
        """Convert a time in eV^-1 to seconds."""
        return t * self.hbar_eV_s


def derive_params(constants: PhysicalConstants = PhysicalConstants()) -> ModelParams:
    a, me = constants.alpha, constants.m_e
    chi = 2.0 / math.pi * (2.0 / 3.0) ** 9 * a**3
    Lam = 1.5 * a * me
    M = 0.375 * a * a * me
    Gamma = 1.5 * (2.0 / 3.0) ** 9 * me * a**5 / (1.0 + (a / 4.0) ** 2) ** 4
    return ModelParams.from_couplings(chi, Lam, M, 0.0, Gamma, constants.hbar_eV_s)


def _out(val, like):
    return val.item() if np.ndim(like) == 0 else val


def im_self_energy(E, p: ModelParams):
    E = np.asarray(E, dtype=np.float64)
    x = np.where(E > p.E_th, (E - p.E_th) / p.Lambda, 0.0)
    val = math.pi * p.chi * p.Lambda * x / (1.0 + x * x) ** 4
    return _out(val, E)


def re_self_energy(E, p: ModelParams):
    """Closed-form ``Re Pi(E)`` on the real line, ``E >= E_th``.

    Raises ``ValueError`` below threshold; use :func:`continued_self_energy`
    for general arguments.
    """
    E = np.asarray(E, dtype=np.float64)
    if np.any(E < p.E_th) or not np.all(np.isfinite(E)):
        raise ValueError("re_self_energy needs finite E >= E_th")
    x = (E - p.E_th) / p.Lambda
    val = p.chi * p.Lambda * (_bracket(x) + p.C)
    return _out(val, E)


def _check_z(z, p, singular=True):
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(z)):
        raise ValueError("complex energy must be finite")
    x = (z - p.E_th) / p.Lambda
    if np.any((x.imag == 0) & (x.real < 0)):
        raise ValueError("argument on the excluded branch-cut ray (real z < E_th)")
    if singular and np.any(np.abs(1.0 + x * x) < 1e-14):
        raise SingularEnergyError("closed-form self-energy is singular at x = +-i")
    return z, x


def continued_self_energy(z, p: ModelParams):
    """Analytic continuation ``R(z) + i I(z)`` with the principal logarithm.

    On the real axis above threshold this reproduces ``Re Pi + i Im Pi``; in
    the lower half plane it is the second-sheet self-energy that carries the
    resonance pole.
    """
    z, x = _check_z(z, p)
    D = 1.0 + x * x
    D4 = (D * D) ** 2
    val = p.chi * p.Lambda * ((kernels.bracket_np(x) + p.C * D4) + 1j * math.pi * x) / D4
    return _out(val, z)


def spectral_density(E, p: ModelParams):
    E = np.asarray(E, dtype=np.float64)
    val = kernels.spectral_offset(E - p.M, *p.args)
    return _out(val, E)


def spectral_density_continued(z, p: ModelParams):
    """Spectral formula with the continued self-energy inserted.

    Finite at ``x = +-i``: the fourth-order pole of one propagator factor
    suppresses the density there.
    """
    z, _ = _check_z(z, p, singular=False)
    val = kernels.continued_density(z, *p.args)
    return _out(val, z)
