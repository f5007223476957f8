"""Adaptive Gauss-Kronrod quadrature on batches of panels.

Integrands are vectorized callables ``f(x: ndarray) -> ndarray`` (real or
complex). All panels of one refinement pass are evaluated in a single call
(chunked to bound memory), which is what lets the numba kernels in
:mod:`decaylab.kernels` do the heavy lifting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import oscillate

# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
WG = np.zeros(15)
WG[1:7:2] = _WG[:3]
WG[7] = _WG[3]
WG[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_CHUNK = 1 << 15
# Passes without a 10% error reduction before giving up. Homing in on a
# narrow peak missed by the initial panels can take a few dozen bisections.
_STALL_PASSES = 60


class QuadratureError(RuntimeError):
    """Base class for quadrature failures."""


class NonConvergenceError(QuadratureError):
    """An integral did not reach its tolerance; ``result`` holds the best estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InfeasibleError(QuadratureError):
    """The oscillation panel budget would be exceeded."""


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 0.0
    rel_tol: float = 1e-9
    max_panels: int = 2_000_000
    min_panel_width: float = 0.0

    def __post_init__(self):
        if not (self.abs_tol > 0 or self.rel_tol > 0):
            raise ValueError("need abs_tol > 0 or rel_tol > 0")
        if self.max_panels < 16:
            raise ValueError("max_panels must be at least 16")

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error_estimate: float
    panels_used: int
    converged: bool

    def __post_init__(self):
        # Plain Python scalars, whatever numpy type the arithmetic produced.
        object.__setattr__(self, "value", np.asarray(self.value).item())
        object.__setattr__(self, "error_estimate", float(self.error_estimate))
        object.__setattr__(self, "converged", bool(self.converged))

    def check(self, what="integral"):
        """Return ``value`` or raise :class:`NonConvergenceError`."""
        if not self.converged:
            raise NonConvergenceError(
                f"{what} did not converge (error estimate {self.error_estimate:.3g} "
                f"after {self.panels_used} panels)", self)
        return self.value


def _gk15(f, a, b):
    """Kronrod value, error estimate and ``int |f|`` for every panel."""
    n = a.size
    K = None
    err = np.empty(n)
    rabs = np.empty(n)
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        c = 0.5 * (a[lo:hi] + b[lo:hi])
        h = 0.5 * (b[lo:hi] - a[lo:hi])
        x = c[:, None] + h[:, None] * NODES[None, :]
        fx = np.asarray(f(x.ravel())).reshape(x.shape)
        if K is None:
            K = np.empty(n, dtype=np.result_type(fx.dtype, np.float64))
        k = fx @ WK
        g = fx @ WG
        afx = np.abs(fx)
        resabs = afx @ WK
        resasc = np.abs(fx - (0.5 * k)[:, None]) @ WK
        e = np.abs(k - g)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = resasc * np.minimum(1.0, (200.0 * e / resasc) ** 1.5)
        e = np.where((resasc != 0) & (e != 0), scaled, e)
        e = np.maximum(e, 50.0 * _EPS * resabs)
        K[lo:hi] = h * k
        err[lo:hi] = np.abs(h) * e
        rabs[lo:hi] = np.abs(h) * resabs
    return K, err, rabs


def _adaptive(f, edges, cfg: QuadConfig) -> QuadResult:
    edges = np.asarray(edges, dtype=np.float64)
    a, b = edges[:-1].copy(), edges[1:].copy()
    K, err, _ = _gk15(f, a, b)
    stalls = 0
    prev = math.inf
    while True:
        total = K.sum()
        etot = err.sum()
        tol = cfg.tolerance(total)
        n = a.size
        if etot <= tol:
            return QuadResult(total, float(etot), n, True)
        room = cfg.max_panels - n
        stalls = stalls + 1 if etot > 0.9 * prev else 0
        if room <= 0 or stalls >= _STALL_PASSES:
            return QuadResult(total, float(etot), n, False)
        prev = etot
        order = np.argsort(-err, kind="stable")
        width = b[order] - a[order]
        floor = np.maximum(cfg.min_panel_width, 1e3 * _EPS * np.maximum(np.abs(a[order]), np.abs(b[order])))
        order = order[width > floor]
        if order.size == 0:
            return QuadResult(total, float(etot), n, False)
        csum = np.cumsum(err[order])
        k = int(np.searchsorted(csum, etot - 0.5 * tol)) + 1
        sel = order[: min(k, room, order.size)]
        keep = np.ones(n, dtype=bool)
        keep[sel] = False
        mid = 0.5 * (a[sel] + b[sel])
        na = np.concatenate([a[sel], mid])
        nb = np.concatenate([mid, b[sel]])
        nK, nerr, _ = _gk15(f, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        K = np.concatenate([K[keep], nK])
        err = np.concatenate([err[keep], nerr])


def _edges(a, b, points=(), max_width=None):
    pts = np.asarray(sorted({float(a), float(b), *(float(p) for p in points if a < p < b)}))
    if max_width is None:
        return pts
    out = [pts[:1]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil((hi - lo) / max_width)))
        out.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(out)


def integrate_adaptive(f, a, b, cfg: QuadConfig = QuadConfig(), points=()) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` seeding panels at ``points``.

    >>> r = integrate_adaptive(lambda x: x, 0.0, 1.0)
    >>> round(r.value, 12), r.converged
    (0.5, True)
    """
    if not a < b:
        raise ValueError("need a < b")
    return _adaptive(f, _edges(a, b, points), cfg)


def integrate_pv(g, a, b, c, cfg: QuadConfig = QuadConfig(), points=()) -> QuadResult:
    """Principal value of ``int_a^b g(x) / (x - c) dx``.

    Uses the subtraction ``g(x) - g(c)`` and adds ``g(c) ln((b - c)/(c - a))``
    analytically.
    """
    if not a < c < b:
        raise ValueError("pole must lie strictly inside (a, b)")
    gc = np.asarray(g(np.array([c], dtype=float)))[0]

    def h(x):
        return (g(x) - gc) / (x - c)

    r = _adaptive(h, _edges(a, b, (c, *points)), cfg)
    value = r.value + gc * math.log((b - c) / (c - a))
    return QuadResult(value, r.error_estimate, r.panels_used, r.converged)


def oscillation_panels(a, b, t):
    """Number of panels the one-eighth-period cap imposes on ``[a, b]``."""
    if t == 0:
        return 1
    return int(math.ceil((b - a) * t / (2.0 * math.pi) * 8.0))


def integrate_oscillatory(g, a, b, t, cfg: QuadConfig = QuadConfig(), points=(), kernel=None) -> QuadResult:
    """``int_a^b g(x) exp(-i x t) dx`` with panels no wider than 1/8 period.

    ``kernel`` overrides the weight: a callable ``kernel(values, x, t)`` that
    returns ``values * w(x t)`` (default ``exp(-i x t)``).
    Raises :class:`InfeasibleError` when the capped partition alone would
    exceed ``cfg.max_panels``.
    """
    if not a < b:
        raise ValueError("need a < b")
    if t < 0:
        raise ValueError("need t >= 0")
    if t == 0:
        return integrate_adaptive(g, a, b, cfg, points)
    need = oscillation_panels(a, b, t)
    if need > cfg.max_panels:
        raise InfeasibleError(
            f"oscillatory integral needs ~{need} panels at t={t:g} (budget {cfg.max_panels}); "
            "use the contour representation")
    weight = oscillate if kernel is None else kernel

    def h(x):
        return weight(g(x), x, t)

    return _adaptive(h, _edges(a, b, points, max_width=2.0 * math.pi / t / 8.0), cfg)


def integrate_semiinfinite_exp(h, t, cfg: QuadConfig = QuadConfig(), points=(), cutoff=60.0,
                               scaled=None) -> QuadResult:
    """``int_0^inf h(y) exp(-y t) dy`` via ``s = y t``.

    The integral over ``s`` in ``[0, cutoff]`` is adaptive; the remainder
    ``[cutoff, 4 cutoff]`` is added from one Kronrod panel and its magnitude
    counted in the error estimate. ``points`` are breakpoints in ``y``.
    ``scaled``, if given, is a vectorized ``scaled(s) = h(s/t) exp(-s)`` that
    replaces the default composition (used by the fused kernels).
    """
    if not t > 0:
        raise ValueError("need t > 0")
    if scaled is None:
        def scaled(s):
            return h(s / t) * np.exp(-s)
    pts = [p * t for p in points]
    r = _adaptive(scaled, _edges(0.0, cutoff, pts), cfg)
    tail, terr, _ = _gk15(scaled, np.array([cutoff]), np.array([4.0 * cutoff]))
    value = (r.value + tail[0]) / t
    err = (r.error_estimate + terr[0] + abs(tail[0])) / t
    ok = r.converged and err <= cfg.tolerance(value)
    return QuadResult(value, err, r.panels_used + 1, ok)
