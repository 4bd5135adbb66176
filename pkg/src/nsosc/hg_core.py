"""Homotopy-Galerkin solver for the four algebraically non-smooth oscillators.

For each oscillator the first-order deformation solution is instantiated as
an exact piecewise trig series X(tau) on tau in [0, 2*pi], tau = omega*t.
Three equations determine (omega, h1, h2):

  * omega * lam(eps, A, h1, h2) = 1, the second-order time-stretch relation,
  * two Galerkin projections of the equation residual, with the step/sign
    factors replaced by their breakpoint form (Newton-refined zeros for the
    two-spring oscillator, exact quarter-period zeros for the others).

The Galerkin integrals are evaluated in closed form by trigcalc, so the
solved unknowns are limited only by the nonlinear solver tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit, systems, trigcalc
from .systems import HEAVISIDE, INVERSE_MODULUS, MODULUS, SIGNUM
from .trigcalc import (PiecewiseTrigSeries, series, term_const, term_cos,
                       term_sin)

TWO_PI = 2 * math.pi
HALF_PI = math.pi / 2

NON_IMPACT_KINDS = (HEAVISIDE, SIGNUM, MODULUS, INVERSE_MODULUS)


class HgError(Exception):
    pass


class DegenerateZeroError(HgError):
    """Newton refinement hit a vanishing waveform slope."""


# ---------------------------------------------------------------------------
# first-order waveform builders (tau domain, one period [0, 2 pi])
# ---------------------------------------------------------------------------

def _shape_heaviside() -> list:
    """Unit first-order shape for the two-spring oscillator."""
    q = math.pi / 4
    return [
        term_sin(0.25, k=1),
        # activated at 3*pi/2: cos/2 + (-3*pi/4 + tau/2) sin
        term_cos(0.5, a=3 * HALF_PI),
        term_sin(-3 * q, a=3 * HALF_PI),
        term_sin(0.5, k=1, a=3 * HALF_PI),
        # activated at pi/2: -cos/2 + (pi/4 - tau/2) sin
        term_cos(-0.5, a=HALF_PI),
        term_sin(q, a=HALF_PI),
        term_sin(-0.5, k=1, a=HALF_PI),
    ]


def _shape_signum() -> list:
    c3 = 1.0 / 3.0
    return [
        term_cos(c3, m=2, a=HALF_PI),
        term_sin(4 * c3, a=HALF_PI),
        term_const(-1.0, a=HALF_PI),
        term_cos(-c3, m=2, a=3 * HALF_PI),
        term_sin(4 * c3, a=3 * HALF_PI),
        term_const(1.0, a=3 * HALF_PI),
        term_cos(-c3),
        term_cos(-1.0 / 6.0, m=2),
        term_sin(-4.0 / (3.0 * math.pi), k=1),
        term_const(0.5),
    ]


def _shape_vee() -> list:
    """Shared first-order shape of the modulus and inverse-modulus kinds."""
    c3 = 1.0 / 3.0
    return [
        term_sin(2 * c3, a=math.pi),
        term_sin(c3, m=2, a=math.pi),
        term_sin(2 * c3, a=TWO_PI),
        term_sin(-c3, m=2, a=TWO_PI),
        term_sin(c3),
        term_sin(-2.0 / (3.0 * math.pi), k=1),
        term_sin(-1.0 / 6.0, m=2),
    ]


def _first_order_prefactor(kind: str, eps: float, A: float, h1: float) -> float:
    if kind == HEAVISIDE:
        return eps * A * h1
    if kind == SIGNUM or kind == MODULUS:
        return eps * A * A * h1
    return -A * A * h1  # inverse modulus carries no eps in the waveform


def build_x0(A: float) -> PiecewiseTrigSeries:
    return series([term_cos(A)], TWO_PI)


def build_x1(kind: str, eps: float, A: float, h1: float) -> PiecewiseTrigSeries:
    """x0 + x1 as a concrete series on tau in [0, 2 pi]."""
    if kind not in NON_IMPACT_KINDS:
        raise ValueError(f"unsupported kind {kind!r}")
    shape = {HEAVISIDE: _shape_heaviside, SIGNUM: _shape_signum,
             MODULUS: _shape_vee, INVERSE_MODULUS: _shape_vee}[kind]()
    pref = _first_order_prefactor(kind, eps, A, h1)
    terms = [term_cos(A)]
    terms += [trigcalc.TrigTerm(pref * t.c, t.k, t.r, t.kind, t.m, t.a)
              for t in shape]
    return series(terms, TWO_PI).normalize()


# ---------------------------------------------------------------------------
# frequency relation
# ---------------------------------------------------------------------------

def lambda1_coefficient(kind: str, eps: float, A: float) -> float:
    """d(lambda)/dh1 at h = 0: the first-order secular coefficient."""
    if kind == HEAVISIDE:
        return eps / 4.0
    if kind == SIGNUM:
        return -0.5 + 4.0 * eps * A / (3.0 * math.pi)
    if kind == MODULUS:
        return 2.0 * eps * A / (3.0 * math.pi)
    return eps / 2.0 - 2.0 * A / (3.0 * math.pi)


def time_stretch(kind: str, eps: float, A: float, h1: float, h2: float) -> float:
    """Second-order expansion of the time-stretch lambda(1)."""
    p = math.pi
    if kind == HEAVISIDE:
        return (1.0 + eps / 2.0 * (1.5 * h1 + 0.5 * h2 + h1 * h1)
                + 0.375 * eps ** 2 * h1 * h1)
    if kind == SIGNUM:
        ea = eps * A
        return (1.0 - h1 - h2 / 4.0 - h1 * h1 / 8.0
                + 2.0 * ea / (3.0 * p) * (4.0 * h1 + h2 - h1 * h1)
                + ea * ea * h1 * h1 * (5.0 / 12.0 - 4.0 / (9.0 * p)))
    if kind == MODULUS:
        ea = eps * A
        return (1.0 + ea / (3.0 * p) * (4.0 * h1 + h2 + 2.0 * h1 * h1)
                + ea * ea * h1 * h1 / 24.0)
    if kind == INVERSE_MODULUS:
        return (1.0 - A / (3.0 * p) * (4.0 * h1 + h2) - A * A * h1 * h1 / 12.0
                + eps * (h1 + h2 / 4.0) + 0.375 * eps ** 2 * h1 * h1)
    raise ValueError(f"unsupported kind {kind!r}")


def frequency_relation(kind: str, eps: float, A: float,
                       h1: float, h2: float) -> float:
    """Natural frequency implied by the convergence-control parameters."""
    return 1.0 / time_stretch(kind, eps, A, h1, h2)


# ---------------------------------------------------------------------------
# first-order deformation forcing (for back-substitution checks)
# ---------------------------------------------------------------------------

def _sign_series_x(domain_end=TWO_PI) -> PiecewiseTrigSeries:
    """sgn(cos tau) over one period as a Heaviside combination."""
    return series([term_const(1.0), term_const(-2.0, a=HALF_PI),
                   term_const(2.0, a=3 * HALF_PI)], domain_end)


def _sign_series_v(domain_end=TWO_PI) -> PiecewiseTrigSeries:
    """sgn(d x0/d tau) = sgn(-sin tau) over one period."""
    return series([term_const(-1.0), term_const(2.0, a=math.pi)], domain_end)


def _step_series_x(domain_end=TWO_PI) -> PiecewiseTrigSeries:
    """H(cos tau) over one period."""
    return series([term_const(1.0), term_const(-1.0, a=HALF_PI),
                   term_const(1.0, a=3 * HALF_PI)], domain_end)


def first_order_forcing(kind: str, eps: float, A: float,
                        h1: float) -> PiecewiseTrigSeries:
    """Right side F1 of the first-order deformation equation x1'' + x1 = F1."""
    lam1 = lambda1_coefficient(kind, eps, A) * h1
    cos1 = series([term_cos(1.0)], TWO_PI)
    minus_2lam_x0 = series([term_cos(-2.0 * lam1 * A)], TWO_PI)
    if kind == HEAVISIDE:
        n0 = _step_series_x().product(cos1).scaled(eps * A)
        return (minus_2lam_x0 + n0.scaled(h1)).normalize()
    if kind == SIGNUM:
        cos_sq_sgn = cos1.product(cos1).product(_sign_series_x())
        n0 = (series([term_cos(-A)], TWO_PI)
              + cos_sq_sgn.scaled(eps * A * A)).normalize()
        return (minus_2lam_x0 + n0.scaled(h1)).normalize()
    if kind == MODULUS:
        sin2 = series([term_sin(0.5, m=2)], TWO_PI)  # sin*cos
        n0 = sin2.product(_sign_series_v()).scaled(-eps * A * A)
        return (minus_2lam_x0 + n0.scaled(h1)).normalize()
    if kind == INVERSE_MODULUS:
        sin2 = series([term_sin(0.5, m=2)], TWO_PI)
        n0 = (sin2.product(_sign_series_v()).scaled(A * A)
              + series([term_cos(eps * A)], TWO_PI)).normalize()
        return (minus_2lam_x0 + n0.scaled(h1)).normalize()
    raise ValueError(f"unsupported kind {kind!r}")


# ---------------------------------------------------------------------------
# Galerkin equations
# ---------------------------------------------------------------------------

def refine_zeros(x1: PiecewiseTrigSeries, omega: float,
                 newton_steps: int = 1) -> tuple[float, float]:
    """Zeros of the waveform near the quarter and three-quarter period.

    One Newton step from the nominal zeros pi/(2 omega), 3 pi/(2 omega),
    exactly as used to place the Heaviside breakpoints; more steps are
    allowed as a refinement.  Returned in physical time.
    """
    dx = x1.differentiate()
    out = []
    for tau0 in (HALF_PI, 3 * HALF_PI):
        tau = tau0
        for _ in range(max(1, newton_steps)):
            slope = dx.evaluate(tau)
            if abs(slope) < 1e-10:
                raise DegenerateZeroError(f"waveform slope ~ 0 near tau={tau}")
            tau = tau - x1.evaluate(tau) / slope
        out.append(tau / omega)
    return out[0], out[1]


def _residual_series(kind: str, eps: float, A: float, omega: float,
                     h1: float, newton_steps: int = 1) -> PiecewiseTrigSeries:
    """Equation residual along the first-order waveform, in tau."""
    X = build_x1(kind, eps, A, h1)
    dX = X.differentiate()
    d2X = dX.differentiate()
    w2 = omega * omega
    if kind == HEAVISIDE:
        t1, t2 = refine_zeros(X, omega, newton_steps)
        step = series([term_const(1.0), term_const(-1.0, a=min(omega * t1, TWO_PI)),
                       term_const(1.0, a=min(omega * t2, TWO_PI))], TWO_PI)
        r = (d2X.scaled(w2) + X + step.product(X).scaled(eps))
    elif kind == SIGNUM:
        r = (d2X.scaled(w2)
             + _sign_series_x().product(X).product(X).scaled(eps))
    elif kind == MODULUS:
        r = (d2X.scaled(w2) + X
             + _sign_series_v().product(X).product(dX).scaled(eps * omega))
    elif kind == INVERSE_MODULUS:
        r = (_sign_series_v().product(dX).product(d2X).scaled(omega ** 3)
             + X.scaled(eps))
    else:
        raise ValueError(f"unsupported kind {kind!r}")
    return r.normalize()


def galerkin_equations(kind: str, eps: float, A: float, omega: float,
                       h1: float, h2: float,
                       newton_steps: int = 1) -> tuple[float, float]:
    """Weighted residual integrals over one period, in physical time.

    Weights: cos(omega t) for every kind; H(omega t - pi/2) for the
    two-spring and signum kinds, t sin(omega t) for the modulus kinds.
    h2 does not enter the first-order waveform, so the projections depend
    on it only through the caller's frequency relation.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    r = _residual_series(kind, eps, A, omega, h1, newton_steps)
    cosw = series([term_cos(1.0)], TWO_PI)
    g1 = r.product(cosw).integrate_definite(0.0, TWO_PI) / omega
    if kind in (HEAVISIDE, SIGNUM):
        g2 = r.integrate_definite(HALF_PI, TWO_PI) / omega
    else:
        tsin = series([term_sin(1.0, k=1)], TWO_PI)
        g2 = r.product(tsin).integrate_definite(0.0, TWO_PI) / (omega * omega)
    return g1, g2


# ---------------------------------------------------------------------------
# full solve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HGSolution:
    kind: str
    eps: float
    A: float
    omega1: float
    h1: float
    h2: float
    waveform: PiecewiseTrigSeries  # in tau on [0, 2 pi]
    t_zero_1: float
    t_zero_2: float
    residual_norm: float

    def eval_time(self, t: float) -> float:
        """Waveform sample at physical time t in [0, 2 pi / omega1]."""
        return self.waveform.evaluate(min(self.omega1 * t, TWO_PI))

    @property
    def period(self) -> float:
        return TWO_PI / self.omega1


def solve_hg(kind: str, eps: float, A: float = 1.0,
             omega_seed: float | None = None,
             newton_steps: int = 1) -> HGSolution:
    """Solve {frequency relation, two Galerkin projections} for (omega, h1, h2).

    omega is bracketed in [0.5, 1.5] * omega_seed, the seed coming from the
    reference integrator when not supplied.  The initial guess follows the
    conventional flat-region midpoint h1 = -0.5, with scaled fallbacks for
    strongly nonlinear cases where eps*A is far from order one.
    """
    if kind not in NON_IMPACT_KINDS:
        raise ValueError(f"unsupported kind {kind!r}")
    if eps == 0.0:
        x = build_x1(kind, 0.0, A, 0.0)
        return HGSolution(kind, eps, A, 1.0, 0.0, 0.0, x,
                          HALF_PI, 3 * HALF_PI, 0.0)
    if omega_seed is None:
        omega_seed = systems.reference_frequency(
            systems.OscillatorSpec(kind, eps, amplitude=A))

    def residual(v):
        omega, h1, h2 = v
        g1, g2 = galerkin_equations(kind, eps, A, omega, h1, h2, newton_steps)
        rel = omega * time_stretch(kind, eps, A, h1, h2) - 1.0
        return [rel, g1, g2]

    brackets = [(0.5 * omega_seed, 1.5 * omega_seed), None, None]
    guesses = [-0.5]
    scale = abs(eps) * A if kind != INVERSE_MODULUS else A
    if scale > 2.0:  # keep eps*A*h1 of order one for strongly nonlinear cases
        guesses.insert(0, -1.2 / scale)
    last_err = None
    for h1_guess in guesses:
        sys = numkit.NonlinearSystem(residual, [omega_seed, h1_guess, 0.0],
                                     brackets=brackets, tol=1e-11)
        try:
            omega, h1, h2 = solved = numkit.solve_system(sys)
        except numkit.SolverFailure as err:
            last_err = err
            continue
        res = np.max(np.abs(residual(solved)))
        x1 = build_x1(kind, eps, A, h1)
        t1, t2 = refine_zeros(x1, omega, newton_steps)
        return HGSolution(kind, eps, A, float(omega), float(h1), float(h2),
                          x1, t1, t2, float(res))
    raise numkit.SolverFailure(
        f"HG solve failed for {kind} eps={eps}: {last_err}",
        getattr(last_err, "best_x", None), getattr(last_err, "best_residual", None))
