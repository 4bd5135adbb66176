"""Comparison methods for the two-spring oscillator and relatives:
Lindstedt-Poincare closed forms, conventional HAM with flat-region
selection, one- and two-term harmonic balance, and the non-smooth
temporal transform (amplitude-phase) route.

The LP and HAM expressions are transcribed closed forms: a golden test
pins each coefficient, nothing is re-derived at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit, systems
from .numkit import EventSpec, IvpProblem
from .systems import HEAVISIDE, INVERSE_MODULUS, MODULUS, SIGNUM, OscillatorSpec
from .trigcalc import (PiecewiseTrigSeries, series, term_const, term_cos,
                       term_sin)

TWO_PI = 2 * math.pi
HALF_PI = math.pi / 2
PI = math.pi


# ---------------------------------------------------------------------------
# Lindstedt-Poincare (two-spring oscillator)
# ---------------------------------------------------------------------------

OMEGA_1 = 0.25
OMEGA_2 = -0.125


def lp_frequency(eps: float) -> float:
    """Second-order LP frequency 1 + eps/4 - eps^2/8."""
    return 1.0 + OMEGA_1 * eps + OMEGA_2 * eps * eps


def _lp_x1_terms() -> list:
    q = PI / 4
    return [
        # (cos/2 + (-pi/4 + tau/2) sin) H(tau - pi/2)
        term_cos(0.5, a=HALF_PI),
        term_sin(-q, a=HALF_PI),
        term_sin(0.5, k=1, a=HALF_PI),
        # (-cos/2 + (3 pi/4 - tau/2) sin) H(tau - 3 pi/2)
        term_cos(-0.5, a=3 * HALF_PI),
        term_sin(3 * q, a=3 * HALF_PI),
        term_sin(-0.5, k=1, a=3 * HALF_PI),
        term_sin(-0.25, k=1),
    ]


def _lp_x2_terms() -> list:
    p = PI
    return [
        # ((-pi^2/32 + pi tau/16 - 1/8) cos + (pi/16 - tau/8) sin) H(tau - pi/2)
        term_cos(-p * p / 32 - 0.125, a=HALF_PI),
        term_cos(p / 16, k=1, a=HALF_PI),
        term_sin(p / 16, a=HALF_PI),
        term_sin(-0.125, k=1, a=HALF_PI),
        # ((-3 pi^2/32 + pi tau/16 + 1/8) cos + (-3 pi/16 + tau/8) sin) H(tau-3pi/2)
        term_cos(-3 * p * p / 32 + 0.125, a=3 * HALF_PI),
        term_cos(p / 16, k=1, a=3 * HALF_PI),
        term_sin(-3 * p / 16, a=3 * HALF_PI),
        term_sin(0.125, k=1, a=3 * HALF_PI),
        term_cos(-1.0 / 32.0, k=2),
        term_sin(1.0 / 16.0, k=1),
    ]


@dataclass(frozen=True)
class LpSolution:
    eps: float
    omega: float
    series: PiecewiseTrigSeries  # x0 + eps x1 + eps^2 x2 on tau in [0, 2 pi]
    omega1: float = OMEGA_1
    omega2: float = OMEGA_2

    def eval_time(self, t: float) -> float:
        return self.series.evaluate(min(self.omega * t, TWO_PI))

    @property
    def period(self) -> float:
        return TWO_PI / self.omega


def lp_waveform(eps: float) -> LpSolution:
    """One period of the LP solution x0 + eps x1 + eps^2 x2."""
    from .trigcalc import TrigTerm
    terms = [term_cos(1.0)]
    terms += [TrigTerm(t.c * eps, t.k, t.r, t.kind, t.m, t.a)
              for t in _lp_x1_terms()]
    terms += [TrigTerm(t.c * eps * eps, t.k, t.r, t.kind, t.m, t.a)
              for t in _lp_x2_terms()]
    return LpSolution(eps, lp_frequency(eps),
                      series(terms, TWO_PI).normalize())


# ---------------------------------------------------------------------------
# conventional HAM (third order, constant convergence-control parameter)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HamExpansion:
    eps: float
    h: float
    lam: float  # lambda(1) at the selected h

    @property
    def omega(self) -> float:
        return 1.0 / self.lam


def ham_lambda1(eps: float, h: float) -> float:
    """Third-order HAM time stretch lambda(1) as a cubic in h."""
    return (1.0
            + eps / 4.0 * (3 * h + 3 * h * h + h ** 3)
            + eps ** 2 / 8.0 * (4.5 * h * h + 3 * h ** 3)
            + eps ** 3 * 5.0 * h ** 3 / 32.0)


# flat-region machinery: the selection metric is the frequency 1/lambda
# (the h-range where the natural frequency stops changing); lambda is
# masked away from its zero crossing so the pole of 1/lambda cannot
# masquerade as a flat region.
_H_GRID = np.arange(-2.0, 0.0 + 1e-12, 0.01)
_LAMBDA_GUARD = 0.25


class FlatRegionError(Exception):
    pass


def ham_select_h(eps: float) -> tuple[float, float]:
    """(h, omega) from the flat region of the frequency-vs-h curve.

    Scans h in [-2, 0] at step 0.01, keeps the connected region around
    h = 0 where lambda stays clear of zero, and takes the midpoint of the
    maximal interval where |d omega/d h| is below 5% of its masked maximum.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0.0:
        return -0.5, 1.0
    lam = np.array([ham_lambda1(eps, h) for h in _H_GRID])
    mask = lam > _LAMBDA_GUARD
    # connected component touching h = 0 (last grid point)
    valid = np.zeros_like(mask)
    for i in range(len(mask) - 1, -1, -1):
        if not mask[i]:
            break
        valid[i] = True
    if valid.sum() < 3:
        raise FlatRegionError(f"no usable h-range at eps={eps}")
    omega = np.where(valid, 1.0 / np.where(valid, lam, 1.0), np.nan)
    slope = np.abs(np.gradient(omega, _H_GRID))
    slope_max = np.nanmax(slope[valid])
    flat = valid & (slope < 0.05 * slope_max)
    best_len, best = 0, None
    run_start = None
    for i, f in enumerate(flat):
        if f and run_start is None:
            run_start = i
        if (not f or i == len(flat) - 1) and run_start is not None:
            end = i if f else i - 1
            if end - run_start > best_len:
                best_len, best = end - run_start, (run_start, end)
            run_start = None
    if best is None:
        raise FlatRegionError(f"no flat region found at eps={eps}")
    h_mid = 0.5 * (_H_GRID[best[0]] + _H_GRID[best[1]])
    return float(h_mid), 1.0 / ham_lambda1(eps, float(h_mid))


def ham_frequency(eps: float) -> float:
    return ham_select_h(eps)[1]


# ---------------------------------------------------------------------------
# harmonic balance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HbSolution:
    kind: str
    eps: float
    A: float
    n_terms: int
    a1: float
    a2: float
    omega: float
    residual_norm: float

    def eval_time(self, t: float) -> float:
        th = self.omega * t
        return self.a1 * math.cos(th) + self.a2 * math.cos(3 * th)


def _hb_residual_factory(spec: OscillatorSpec, a1: float, a2: float,
                         omega: float):
    """Pointwise residual of the governing equation along the ansatz."""
    eps = spec.epsilon

    def x(t):
        return a1 * math.cos(omega * t) + a2 * math.cos(3 * omega * t)

    def xd(t):
        return -omega * (a1 * math.sin(omega * t)
                         + 3 * a2 * math.sin(3 * omega * t))

    def xdd(t):
        return -omega ** 2 * (a1 * math.cos(omega * t)
                              + 9 * a2 * math.cos(3 * omega * t))

    kind = spec.kind
    if kind == HEAVISIDE:
        return lambda t: xdd(t) + (1.0 + eps * (x(t) >= 0)) * x(t)
    if kind == SIGNUM:
        return lambda t: xdd(t) + eps * x(t) * abs(x(t))
    if kind == MODULUS:
        return lambda t: xdd(t) + x(t) + eps * x(t) * abs(xd(t))
    if kind == INVERSE_MODULUS:
        # multiplied-through form keeps the residual integrable
        return lambda t: (xd(t) * xdd(t) * math.copysign(1.0, xd(t))
                          + eps * x(t))
    raise ValueError(f"unsupported kind {kind!r}")


def hb_solve(spec: OscillatorSpec, n_terms: int = 2,
             omega_seed: float | None = None) -> HbSolution:
    """Harmonic balance with ansatz A1 cos(w t) (+ A2 cos(3 w t)).

    The initial condition pins A1 + A2 = A; the remaining unknowns solve
    the vanishing of the fundamental (and, for two terms, third-harmonic)
    Fourier coefficients of the residual.  omega is bracketed around the
    supplied seed (reference frequency when omitted) to avoid the spurious
    roots of the algebraic system.
    """
    if spec.kind == systems.IMPACT:
        raise ValueError("harmonic balance applies to the periodic kinds")
    A = spec.amplitude
    if omega_seed is None:
        if spec.epsilon == 0.0:
            omega_seed = 1.0
        else:
            omega_seed = systems.reference_frequency(spec)
    period_bps = [HALF_PI, PI, 3 * HALF_PI]

    def projections(omega, a2):
        a1 = A - a2
        r = _hb_residual_factory(spec, a1, a2, omega)
        bps = [b / omega for b in period_bps]
        harmonics = [("cos", 1)] + ([("cos", 3)] if n_terms == 2 else [])
        return numkit.fourier_project(r, omega, harmonics, bps, tol=1e-11)

    if n_terms == 1:
        f = lambda w: projections(w, 0.0)[0]  # noqa: E731
        omega = numkit.solve_bracketed(f, 0.5 * omega_seed, 1.5 * omega_seed,
                                       tol=1e-12)
        return HbSolution(spec.kind, spec.epsilon, A, 1, A, 0.0, omega,
                          abs(f(omega)))
    if n_terms != 2:
        raise ValueError("n_terms must be 1 or 2")

    sys = numkit.NonlinearSystem(
        lambda v: projections(v[0], v[1]), [omega_seed, 0.0],
        brackets=[(0.5 * omega_seed, 1.5 * omega_seed), (-0.5 * A, 0.5 * A)],
        tol=1e-10)
    omega, a2 = numkit.solve_system(sys)
    res = max(abs(g) for g in projections(omega, a2))
    return HbSolution(spec.kind, spec.epsilon, A, 2, A - a2, float(a2),
                      float(omega), res)


# ---------------------------------------------------------------------------
# non-smooth temporal transform (amplitude-phase integration)
# ---------------------------------------------------------------------------

def triangular_sine(z: float) -> float:
    """Triangular wave tau(z) = (2/pi) arcsin(sin(pi z / 2)) in [-1, 1]."""
    return (2.0 / PI) * math.asin(math.sin(PI * z / 2.0))


def rectangular_cosine(z: float) -> float:
    """Square wave e(z) = sgn(cos(pi z / 2)) in {-1, +1}."""
    return 1.0 if math.cos(PI * z / 2.0) >= 0.0 else -1.0


@dataclass(frozen=True)
class NsttState:
    amplitude: float
    phase: float

    @property
    def tau(self) -> float:
        return triangular_sine(2.0 * self.phase / PI)

    @property
    def e(self) -> float:
        return rectangular_cosine(2.0 * self.phase / PI)


def nstt_frequency(eps: float, n_cycles: int = 40,
                   rel_tol: float = 1e-10) -> float:
    """Mean phase rate of the transformed amplitude-phase system.

    Integrates the triangular-sine / rectangular-cosine form of the
    two-spring oscillator over n_cycles phase revolutions and returns
    2 pi n / elapsed time; to first order in eps this is 1 + eps/4.
    """
    if eps <= -1:
        raise ValueError("needs eps > -1")
    if eps == 0.0:
        return 1.0

    def rhs(t, y):
        amp, phi = y
        z = 2.0 * phi / PI
        tau = triangular_sine(z)
        e = rectangular_cosine(z)
        amp_dot = eps * amp / 4.0 * (1.0 + e) * math.sin(PI * tau)
        phi_dot = 1.0 + eps * (1.0 + e) / 2.0 * math.cos(PI * tau / 2.0) ** 2
        return (amp_dot, phi_dot)

    target = TWO_PI * n_cycles
    stop = EventSpec(lambda t, y: y[1] - target, direction=+1,
                     action=numkit.STOP, name="cycles_done")
    t_max = 1.5 * target / min(1.0, 1.0 + eps)  # phi_dot >= min(1, 1+eps)
    prob = IvpProblem(rhs, (1.0, 0.0), (0.0, t_max), events=[stop],
                      rel_tol=rel_tol, abs_tol=1e-12)
    trace = numkit.solve_ivp(prob)
    t_done = trace.event_times("cycles_done")
    if len(t_done) == 0:
        raise numkit.InsufficientDataError("phase target not reached")
    return target / float(t_done[0])
