"""Homotopy-Galerkin path for the unilaterally constrained pendulum.

The linear operator is a viscously damped oscillator whose decay rate and
unit damped frequency are pre-set from the impact physics, so the zeroth
order is

    x0(t) = exp(-g0 t / 2) (cos t + g0/2 sin t),

with equally spaced zeros t_i = i pi - atan(2/g0).  The first-order
correction multiplies x0 by an alternating Heaviside sum, and the single
convergence-control unknown h1 is fixed by one Galerkin projection whose
impact part is evaluated through the left-limit sifting rule of the
delta-star distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import numkit
from .trigcalc import (PiecewiseTrigSeries, series, term_const, term_cos,
                       term_sin)

CHI_PRINTED = "printed"
CHI_UNIT_OMEGA_D = "omega_d_unit"


class ImpactHgError(Exception):
    pass


class GrazingZeroError(ImpactHgError):
    """delta-star sifting hit a zero with vanishing left slope."""


def gamma_chi_zero(eps: float, chi_mode: str = CHI_PRINTED) -> tuple[float, float]:
    """Damping and stiffness of the zeroth-order operator.

    The decay rate per cycle matches the restitution coefficient
    e = -1 - eps; chi_mode selects the published stiffness expression or
    the variant that makes the damped frequency exactly one.
    """
    if not (-2.0 < eps < -1.0):
        raise ValueError("impact oscillator needs -2 < eps < -1")
    L = math.log(-eps - 1.0)
    den = math.sqrt(L * L + 4 * math.pi ** 2)
    gamma0 = -2.0 * L / den
    if chi_mode == CHI_PRINTED:
        chi0 = math.sqrt(1.0 + (L / den) ** 2)
    elif chi_mode == CHI_UNIT_OMEGA_D:
        chi0 = 1.0 + gamma0 * gamma0 / 4.0
    else:
        raise ValueError(f"unknown chi_mode {chi_mode!r}")
    return gamma0, chi0


def x0_roots(gamma0: float, n: int) -> list[float]:
    """First n zeros of the zeroth-order solution, spaced exactly pi."""
    shift = math.atan2(2.0, gamma0)
    return [i * math.pi - shift for i in range(1, n + 1)]


def build_x0_impact(gamma0: float, domain_end: float) -> PiecewiseTrigSeries:
    """exp(-g0 t/2)(cos t + g0/2 sin t) with initial condition (1, 0)."""
    if gamma0 < 0:
        raise ValueError("gamma0 must be >= 0")
    r = -gamma0 / 2.0
    return series([term_cos(1.0, r=r), term_sin(gamma0 / 2.0, r=r)], domain_end)


@dataclass(frozen=True)
class ImpactHgState:
    eps: float
    restitution: float
    gamma0: float
    chi0: float
    gamma1: float
    chi1: float
    h1: float
    roots: tuple[float, ...]
    waveform: PiecewiseTrigSeries  # x0 + x1 on [0, roots[-1] + pi]
    residual_norm: float


def _alternating_multiplier(eps: float, h1: float, roots: Sequence[float],
                            domain_end: float) -> PiecewiseTrigSeries:
    terms = [term_const(1.0)]
    for i, t_i in enumerate(roots, start=1):
        terms.append(term_const(eps * h1 * (-1.0) ** i, a=t_i))
    return series(terms, domain_end)


def build_x1_impact(eps: float, h1: float, gamma0: float,
                    n_roots: int = 4) -> tuple[PiecewiseTrigSeries, list[float]]:
    """x0 + x1 = x0(t) (1 + eps h1 sum_i (-1)^i H(t - t_i)), truncated."""
    roots = x0_roots(gamma0, n_roots)
    domain_end = roots[-1] + math.pi
    x0 = build_x0_impact(gamma0, domain_end)
    mult = _alternating_multiplier(eps, h1, roots, domain_end)
    return x0.product(mult), roots


def delta_star_integral(y: PiecewiseTrigSeries,
                        f_weight: Callable[[float], float],
                        window: tuple[float, float],
                        seeds: Sequence[float] = ()) -> float:
    """Left-limit sifting sum  sum_i f_weight(t_i) / |y'^-(t_i)|.

    The t_i are the simple zeros of y inside [window[0], window[1]); they
    are located by bracketed bisection from a scan grid refined around the
    supplied seeds.  The left limit of dy/dt supplies the weight, matching
    the delta-star convention that every factor takes its value just before
    the crossing.
    """
    lo, hi = window
    if hi <= lo:
        return 0.0
    dy = y.differentiate()
    grid = list(np.linspace(lo, hi, max(64, int(80 * (hi - lo) / math.pi))))
    for s in seeds:
        if lo < s < hi:
            grid.extend((s - 1e-4, s + 1e-4))
    grid = sorted(set(min(max(g, lo), hi) for g in grid))
    zeros = []
    vals = [y.evaluate(g) for g in grid]
    for (a, fa), (b, fb) in zip(zip(grid[:-1], vals[:-1]), zip(grid[1:], vals[1:])):
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0.0:
            zeros.append(numkit.solve_bracketed(y.evaluate, a, b, tol=1e-14))
    total = 0.0
    for t_i in zeros:
        if not (lo <= t_i < hi - 1e-12):
            continue
        slope = dy.eval_left(t_i) if t_i > 0 else dy.evaluate(t_i)
        if abs(slope) < 1e-10:
            raise GrazingZeroError(f"zero at t={t_i} has |left slope| < 1e-10")
        total += f_weight(t_i) / abs(slope)
    return total


def weighted_residual(eps: float, h1: float, gamma0: float,
                      n_roots: int = 4) -> float:
    """Galerkin functional whose root in h1 closes the first-order solve.

    Smooth part: integral of cos(t) sum_i H(t - t_i) (x1'' + x1) dt over
    [0, t_N + pi], done segment-wise because x1 is only C0 at the roots.
    Impact part: eps sum_i w1(t_i^-) |x1'(t_i^-)| from the sifting rule.
    """
    roots = x0_roots(gamma0, n_roots)
    domain_end = roots[-1] + math.pi
    x0 = build_x0_impact(gamma0, domain_end)
    l0 = (x0.differentiate().differentiate() + x0).normalize()
    cos_l0 = l0.product(series([term_cos(1.0)], domain_end))

    # x1 = (1 + eps h1 sigma_i) x0 on segment i; w1 = i cos t there
    edges = [0.0, *roots, domain_end]
    smooth = 0.0
    sigma = 0.0
    for i in range(1, n_roots + 1):
        sigma += (-1.0) ** i
        c_i = 1.0 + eps * h1 * sigma
        smooth += i * c_i * cos_l0.integrate_definite(edges[i], edges[i + 1])

    x1, _ = build_x1_impact(eps, h1, gamma0, n_roots)
    dx1 = x1.differentiate()
    w1_steps = series([term_const(1.0, a=t_i) for t_i in roots], domain_end)
    w1 = w1_steps.product(series([term_cos(1.0)], domain_end))

    def f_weight(t):
        v = dx1.eval_left(t)
        return eps * w1.eval_left(t) * v * v

    impact = delta_star_integral(x1, f_weight, (0.0, domain_end), seeds=roots)
    return smooth + impact


def solve_h1_impact(eps: float, n_roots: int = 4,
                    chi_mode: str = CHI_PRINTED,
                    bracket: tuple[float, float] = (-2.0, 1.0)) -> ImpactHgState:
    """Fix the single convergence-control unknown by a bracketed root solve."""
    gamma0, chi0 = gamma_chi_zero(eps, chi_mode)
    e = -1.0 - eps

    def psi(h1):
        return weighted_residual(eps, h1, gamma0, n_roots)

    lo, hi = bracket
    grid = np.linspace(lo, hi, 61)
    vals = [psi(h) for h in grid]
    root = None
    for a, fa, b, fb in zip(grid[:-1], vals[:-1], grid[1:], vals[1:]):
        if fa == 0.0:
            root = float(a)
            break
        if fa * fb < 0.0:
            root = numkit.solve_bracketed(psi, float(a), float(b), tol=1e-13)
            break
    if root is None:
        raise numkit.SolverFailure(
            "no sign change of the impact Galerkin residual in "
            f"[{lo}, {hi}]; curve: {list(zip(grid.tolist(), vals))}")
    h1 = root
    gamma1 = -gamma0 ** 2 * h1 / (gamma0 ** 2 + 4.0)
    chi1 = -gamma0 * h1
    x1, roots = build_x1_impact(eps, h1, gamma0, n_roots)
    return ImpactHgState(eps, e, gamma0, chi0, gamma1, chi1, h1,
                         tuple(roots), x1, abs(psi(h1)))


def decay_ratio_per_period(state: ImpactHgState) -> float:
    """Amplitude ratio of the solved waveform across one 2 pi period."""
    roots = state.roots
    m = []
    for k in (0, 2):
        lo, hi = roots[k], roots[k + 1]
        ts = np.linspace(lo, hi, 400)
        m.append(max(abs(state.waveform.evaluate(t)) for t in ts))
    return m[1] / m[0]


def zero_crossing_shift(state: ImpactHgState,
                        impact_times: Sequence[float]) -> list[float]:
    """Offsets between the solved-waveform zeros and simulated impacts."""
    n = min(len(state.roots), len(impact_times))
    return [state.roots[i] - impact_times[i] for i in range(n)]
