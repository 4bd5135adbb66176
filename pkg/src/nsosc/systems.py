"""Catalog of the five governed oscillators and reference-simulation recipes.

Kinds:
  heaviside_springs    xdd + (1 + eps*H(x)) x = 0
  signum               xdd + eps x^2 sgn(x) = 0
  modulus              xdd + x + eps x |xd| = 0
  inverse_modulus      xdd + eps x / |xd| = 0
  impact_pendulum      xdd + x = 0 between impacts, xd -> -e xd at x = 0

The reference integrator runs at tight tolerances (rel 1e-10 / abs 1e-12)
so measured frequencies are good to ~5 decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .numkit import EventSpec, IvpProblem, SimTrace

HEAVISIDE = "heaviside_springs"
SIGNUM = "signum"
MODULUS = "modulus"
INVERSE_MODULUS = "inverse_modulus"
IMPACT = "impact_pendulum"

KINDS = (HEAVISIDE, SIGNUM, MODULUS, INVERSE_MODULUS, IMPACT)
PERIODIC_KINDS = (HEAVISIDE, SIGNUM, MODULUS, INVERSE_MODULUS)

# inverse_modulus turning points: flip velocity sign across |v| = V_EPS
V_EPS = 1e-6


class SystemError_(Exception):
    pass


class SingularityError(SystemError_):
    """inverse_modulus acceleration evaluated too close to a turning point."""


@dataclass(frozen=True)
class OscillatorSpec:
    """One governed system: kind, non-smoothness strength, initial state."""

    kind: str
    epsilon: float
    amplitude: float = 1.0
    restitution: float | None = None
    x0: float | None = None
    v0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown oscillator kind {self.kind!r}")
        if self.kind == HEAVISIDE and self.epsilon <= -1:
            raise ValueError("heaviside_springs needs eps > -1")
        if self.kind == INVERSE_MODULUS and self.epsilon <= 0:
            raise ValueError("inverse_modulus needs eps > 0")
        if self.kind == IMPACT:
            if not (-2.0 <= self.epsilon < -1.0):
                raise ValueError("impact_pendulum needs -2 <= eps < -1")
            e = -(1.0 + self.epsilon)
            if self.restitution is not None and abs(self.restitution - e) > 1e-12:
                raise ValueError("restitution inconsistent with eps = -(1+e)")
            object.__setattr__(self, "restitution", e)
        if self.x0 is None:
            object.__setattr__(self, "x0", self.amplitude)

    @staticmethod
    def impact(e: float) -> "OscillatorSpec":
        """Impact pendulum from a restitution coefficient in (0, 1]."""
        return OscillatorSpec(IMPACT, epsilon=-(1.0 + e))


def rhs(spec: OscillatorSpec):
    """First-order vector field (x, v) -> (v, acceleration)."""
    eps = spec.epsilon
    if spec.kind == HEAVISIDE:
        def f(t, y):
            x, v = y
            return (v, -(1.0 + eps * (x >= 0.0)) * x)
    elif spec.kind == SIGNUM:
        def f(t, y):
            x, v = y
            return (v, -eps * x * abs(x))  # x^2 sgn(x) = x |x|
    elif spec.kind == MODULUS:
        def f(t, y):
            x, v = y
            return (v, -x - eps * x * abs(v))
    elif spec.kind == INVERSE_MODULUS:
        def f(t, y):
            x, v = y
            if abs(v) < 1e-12:
                raise SingularityError(
                    "inverse_modulus acceleration singular at v = 0")
            return (v, -eps * x / abs(v))
    elif spec.kind == IMPACT:
        def f(t, y):
            x, v = y
            return (v, -x)
    return f


def _zero_cross_events():
    up = EventSpec(lambda t, y: y[0], direction=+1, action=numkit.RECORD,
                   name="zero_up")
    down = EventSpec(lambda t, y: y[0], direction=-1, action=numkit.RECORD,
                     name="zero_down")
    return [up, down]


def _period_seed(spec: OscillatorSpec) -> float:
    """Crude frequency guess used only to size the integration window."""
    eps, A = spec.epsilon, spec.amplitude
    if spec.kind == HEAVISIDE:
        return 2.0 / (1.0 + 1.0 / math.sqrt(1.0 + eps))
    if spec.kind == SIGNUM:
        return max(0.9 * math.sqrt(max(eps * A, 1e-6) / 3.0), 1e-3)
    if spec.kind == MODULUS:
        return 1.0
    if spec.kind == INVERSE_MODULUS:
        return max(0.5 * (eps / A) ** (1.0 / 3.0), 0.2)
    return 1.0


def simulate(spec: OscillatorSpec, n_cycles: float = 12.0,
             rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> SimTrace:
    """Reference trajectory with displacement zero crossings recorded."""
    w_seed = _period_seed(spec)
    t_end = n_cycles * 2 * math.pi / w_seed
    events = _zero_cross_events()
    y0 = (spec.x0, spec.v0)

    if spec.kind == IMPACT:
        e = spec.restitution

        def bounce(t, y):
            return np.array([0.0, -e * y[1]])

        events = [EventSpec(lambda t, y: y[0], direction=-1,
                            action=numkit.IMPACT, mapper=bounce, name="impact")]
        prob = IvpProblem(rhs(spec), y0, (0.0, n_cycles * 2 * math.pi),
                          events=events, rel_tol=rel_tol, abs_tol=abs_tol)
        return numkit.solve_ivp(prob)

    if spec.kind == INVERSE_MODULUS:
        # flip the velocity sign across the turning point; x shift is O(V_EPS^3)
        def flip(t, y):
            return np.array([y[0], -math.copysign(V_EPS, y[1])])

        events = events + [EventSpec(lambda t, y: y[1] ** 2 - V_EPS ** 2,
                                     direction=-1, action=numkit.IMPACT,
                                     mapper=flip, name="turn")]
        y0 = (spec.x0, spec.v0 if abs(spec.v0) > V_EPS else -V_EPS)
        prob = IvpProblem(rhs(spec), y0, (0.0, t_end), events=events,
                          rel_tol=rel_tol, abs_tol=abs_tol)
        return numkit.solve_ivp(prob)

    prob = IvpProblem(rhs(spec), y0, (0.0, t_end), events=events,
                      rel_tol=rel_tol, abs_tol=abs_tol)
    return numkit.solve_ivp(prob)


def reference_frequency(spec: OscillatorSpec, n_cycles: float = 12.0) -> float:
    """omega measured from >= 10 cycles of the reference simulation."""
    if spec.kind == IMPACT:
        raise ValueError("impact pendulum decays; use reference_decay")
    trace = simulate(spec, n_cycles=n_cycles)
    period = numkit.measure_period(trace)
    return 2 * math.pi / period


def reference_decay(spec: OscillatorSpec,
                    n_cycles: float = 10.0) -> tuple[float, float]:
    """(frequency, amplitude ratio per period) for the impact pendulum.

    Frequency comes from the impact spacing (pi per half swing of the
    underlying unit oscillator); the ratio is between successive cycle
    maxima, one maximum per bounce.
    """
    if spec.kind != IMPACT:
        raise ValueError("reference_decay needs an impact_pendulum spec")
    trace = simulate(spec, n_cycles=n_cycles)
    t_imp = trace.event_times("impact")
    if len(t_imp) < 3:
        raise numkit.InsufficientDataError("need >= 3 impacts")
    freq = math.pi / float(np.mean(np.diff(t_imp)))

    # maxima between consecutive impacts: |v| just after bounce k gives the
    # next peak height for unit SHM, x_peak = speed
    speeds = []
    for ev in trace.events:
        if ev.name == "impact":
            speeds.append(abs(ev.post_state[1]))
    ratios = [s2 / s1 for s1, s2 in zip(speeds[:-1], speeds[1:])]
    return freq, float(np.mean(ratios))


def exact_heaviside_frequency(eps: float) -> float:
    """Two-branch matching: half cycle at stiffness 1+eps, half at 1."""
    return 2.0 / (1.0 + 1.0 / math.sqrt(1.0 + eps))
