"""``decay-lab`` command line: CSV data for the decay-law figures and tables.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 validation
failure.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis
from .amplitude import AMPLITUDE_CONFIG, WIDTH_CONFIG, ConsistencyError, RegimePolicy, amplitude, build_pole_data
from .physics import ALPHA, M_E_EV, PhysicalConstants, derive_params, spectral_density
from .quadrature import QuadConfig, QuadratureError
from .validation import run_validation

COMMANDS = ("constants", "spectral", "survival", "width", "zeno", "turnover", "powerlaw", "validate")
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    t_min: float | None = None
    t_max: float | None = None
    points: int = 50
    spacing: str = "linear"
    method: str = "auto"
    rel_tol: float | None = None
    abs_tol: float | None = None
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.points < 2:
            raise UsageError("--points must be at least 2")
        if self.spacing not in ("linear", "log"):
            raise UsageError("--spacing must be linear or log")
        if self.t_min is not None and self.t_max is not None:
            if not self.t_min < self.t_max:
                raise UsageError("need --min < --max")
            if self.spacing == "log" and not self.t_min > 0:
                raise UsageError("log spacing requires --min > 0")

    def grid(self, lo, hi):
        lo = self.t_min if self.t_min is not None else lo
        hi = self.t_max if self.t_max is not None else hi
        if not lo < hi:
            raise UsageError("need --min < --max")
        if self.spacing == "log":
            if not lo > 0:
                raise UsageError("log spacing requires --min > 0")
            return np.geomspace(lo, hi, self.points)
        return np.linspace(lo, hi, self.points)

    def quad(self, base: QuadConfig) -> QuadConfig:
        return QuadConfig(abs_tol=base.abs_tol if self.abs_tol is None else self.abs_tol,
                          rel_tol=base.rel_tol if self.rel_tol is None else self.rel_tol,
                          max_panels=base.max_panels)


def fmt(v) -> str:
    """Nine significant digits; scientific notation outside ``[1e-3, 1e4)``."""
    v = float(v)
    if v == 0 or not np.isfinite(v):
        return repr(v) if not np.isfinite(v) else "0"
    if 1e-3 <= abs(v) < 1e4:
        return f"{v:.9g}"
    return f"{v:.8e}"


def fmt6(v) -> str:
    """Six significant digits with a compact exponent (``1.59535e-9``)."""
    s = f"{float(v):.6g}"
    if "e" in s:
        mant, exp = s.split("e")
        s = f"{mant}e{int(exp)}"
    return s


def _csv(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(c if isinstance(c, str) else fmt(c) for c in row) + "\n")


def _table(out, items):
    for key, val in items:
        out.write(f"{key} = {val if isinstance(val, str) else fmt6(val)}\n")


def cmd_constants(p, rc, out):
    m = analysis.energy_moments(p)
    z = build_pole_data(p).z_pole
    _table(out, [
        ("chi", p.chi), ("Lambda_eV", p.Lambda), ("E_th_eV", p.E_th), ("M_eV", p.M),
        ("Gamma_eV", p.Gamma), ("tau_eVinv", p.tau), ("tau_s", p.seconds(p.tau)), ("C", p.C),
        ("tau_Z_eVinv", m.zeno_time), ("tau_Z_s", m.zeno_time_s),
        ("z_pole_re_eV", z.real), ("z_pole_im_eV", z.imag),
    ])
    return EXIT_OK


def cmd_spectral(p, rc, out):
    E = rc.grid(p.M - 50 * p.Gamma, p.M + 50 * p.Gamma)
    d = spectral_density(E, p)
    _csv(out, ("E_eV", "d_S_per_eV"), zip(E, d))
    return EXIT_OK


def cmd_survival(p, rc, out, policy=RegimePolicy()):
    ts = rc.grid(0.0, 5.0 * p.tau)
    cfg = rc.quad(AMPLITUDE_CONFIG)
    rows = []
    for t in ts:
        s = amplitude(float(t), p, policy, cfg, rc.method)
        rows.append((s.t, p.seconds(s.t), s.amplitude.real, s.amplitude.imag, s.survival, s.method,
                     s.error_estimate))
    _csv(out, ("t_eVinv", "t_s", "ReA", "ImA", "P", "method", "err"), rows)
    return EXIT_OK


def cmd_width(p, rc, out, policy=RegimePolicy()):
    ts = rc.grid(1e-6, 1.0)
    cfg = rc.quad(WIDTH_CONFIG)
    rows = [(t, p.seconds(t), analysis.effective_width(float(t), p, policy, cfg, rc.method).gamma_eff_ratio)
            for t in ts]
    _csv(out, ("t_eVinv", "t_s", "gamma_eff_over_gamma"), rows)
    return EXIT_OK


def cmd_zeno(p, rc, out):
    m = analysis.energy_moments(p)
    t, r = analysis.antizeno_maximum(p)
    items = [("mean_E_eV", m.mean_E), ("sigma_E_eV", m.sigma_E), ("tau_Z_eVinv", m.zeno_time),
             ("tau_Z_s", m.zeno_time_s), ("zeno_crossover_eVinv", analysis.zeno_crossover(p, t_max=t)),
             ("antizeno_t_eVinv", t), ("antizeno_t_s", p.seconds(t)), ("antizeno_ratio", r)]
    for level, tc in analysis.width_crossings(analysis.CROSSING_LEVELS, p, t_max=t):
        items.append((f"crossing_{level:g}_eVinv", tc))
    _table(out, items)
    return EXIT_OK


def cmd_turnover(p, rc, out):
    rep = analysis.turnover_time(p)
    _table(out, [("t_turnover_eVinv", rep.t_turnover), ("t_turnover_s", rep.t_turnover_s),
                 ("t_turnover_over_tau", rep.t_over_tau)])
    return EXIT_OK


def cmd_powerlaw(p, rc, out):
    fit = analysis.powerlaw_exponent(p, rc.t_min, rc.t_max, rc.points,
                                     rc.quad(QuadConfig(abs_tol=0.0, rel_tol=1e-8)))
    _table(out, [("slope", fit.slope), ("intercept", fit.intercept),
                 ("mixed_regime", str(fit.mixed_regime).lower())])
    return EXIT_OK


def cmd_validate(p, rc, out):
    results = run_validation(p)
    for r in results:
        out.write(r.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        out.write(f"{len(failed)} check(s) failed: {', '.join(failed)}\n")
        return EXIT_VALIDATION
    out.write(f"all {len(results)} checks passed\n")
    return EXIT_OK


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decay-lab", description="Exact decay law of the hydrogen 2P -> 1S transition.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--min", "--tmin", "--emin", dest="t_min", type=float,
                        help="grid start (eV^-1 for times, eV for energies)")
    parser.add_argument("--max", "--tmax", "--emax", dest="t_max", type=float, help="grid end")
    parser.add_argument("--points", type=int, default=50)
    parser.add_argument("--spacing", choices=("linear", "log"), default="linear")
    parser.add_argument("--method", choices=("auto", "direct", "contour", "longtime"), default="auto")
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--abs-tol", type=float)
    parser.add_argument("--out", help="output file (default: standard output)")
    parser.add_argument("--alpha", type=float, default=ALPHA, help="fine-structure constant")
    parser.add_argument("--me-ev", type=float, default=M_E_EV, help="electron mass in eV")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = RunConfig(args.command, args.t_min, args.t_max, args.points, args.spacing, args.method,
                       args.rel_tol, args.abs_tol, args.out)
        p = derive_params(PhysicalConstants(alpha=args.alpha, m_e=args.me_ev))
    except (UsageError, ValueError) as exc:
        print(f"decay-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with contextlib.ExitStack() as stack:
            out = sys.stdout if rc.out is None else stack.enter_context(open(rc.out, "w", newline=""))
            return HANDLERS[rc.command](p, rc, out)
    except UsageError as exc:
        print(f"decay-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ConsistencyError, ArithmeticError, ValueError) as exc:
        print(f"decay-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

if __name__ == "__main__":
    sys.exit(main())
