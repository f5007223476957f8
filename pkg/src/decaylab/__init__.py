"""Exact decay law of the hydrogen 2P -> 1S transition in the Lee-Friedrichs model.

Energies are in eV and times in eV^-1; ``ModelParams.seconds`` converts.

>>> from decaylab import derive_params
>>> p = derive_params()
>>> round(p.M, 4)
10.2043
"""
from ._accel import BACKEND
from .amplitude import (
    AMPLITUDE_CONFIG,
    WIDTH_CONFIG,
    AmplitudeSample,
    ConsistencyError,
    PoleData,
    RegimePolicy,
    amplitude,
    amplitude_contour,
    amplitude_derivative,
    amplitude_direct,
    amplitude_longtime,
    background_term,
    build_pole_data,
    survival_deficit,
)
from .analysis import (
    MomentsReport,
    PowerLawFit,
    TurnoverReport,
    WidthSample,
    antizeno_maximum,
    effective_width,
    energy_moments,
    powerlaw_exponent,
    short_time_expansion,
    turnover_time,
    width_crossings,
    zeno_crossover,
)
from .physics import (
    ModelParams,
    PhysicalConstants,
    SingularEnergyError,
    continued_self_energy,
    derive_params,
    im_self_energy,
    re_self_energy,
    spectral_density,
    spectral_density_continued,
)
from .quadrature import (
    InfeasibleError,
    NonConvergenceError,
    QuadConfig,
    QuadResult,
    QuadratureError,
    integrate_adaptive,
    integrate_oscillatory,
    integrate_pv,
    integrate_semiinfinite_exp,
)

__version__ = "0.1.0"
