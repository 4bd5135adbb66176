"""Numerical kernels: event-driven RK45, breakpoint-aware quadrature,
damped Newton for small systems, Fourier projection, bracketed roots.

The integrator and quadrature wrap scipy (Dormand-Prince 5(4) and
Gauss-Kronrod QUADPACK) behind small problem/result types; the nonlinear
solver is written here because it needs per-variable brackets and restart
semantics that the library routines do not expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad as _sp_quad
from scipy.integrate import solve_ivp as _sp_solve_ivp
from scipy.optimize import brentq

MAX_STEPS = 10 ** 6

STOP = "stop"
IMPACT = "impact"
RECORD = "record"


class NumKitError(Exception):
    pass


class StiffnessError(NumKitError):
    """Step size underflow / integrator failure."""


class BudgetError(NumKitError):
    """More than MAX_STEPS steps."""


class InsufficientDataError(NumKitError):
    """Not enough zero crossings to measure a period."""


class AccuracyError(NumKitError):
    """Quadrature failed to converge."""


class SolverFailure(NumKitError):
    """Nonlinear solve did not converge; carries the best iterate."""

    def __init__(self, msg, best_x=None, best_residual=None):
        super().__init__(msg)
        self.best_x = best_x
        self.best_residual = best_residual


@dataclass
class EventSpec:
    """Zero crossing of g(t, y) with a direction filter and an action.

    direction: +1 fires on increasing g, -1 on decreasing, 0 on both.
    action: "stop" ends integration, "impact" applies `mapper` to the state
    and restarts, "record" only logs the event.
    """

    g: Callable[[float, np.ndarray], float]
    direction: int = 0
    action: str = RECORD
    mapper: Callable[[float, np.ndarray], np.ndarray] | None = None
    name: str = "event"


@dataclass
class IvpProblem:
    rhs: Callable[[float, np.ndarray], Sequence[float]]
    y0: Sequence[float]
    t_span: tuple[float, float]
    events: list[EventSpec] = field(default_factory=list)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.t_span[1] <= self.t_span[0]:
            raise ValueError("t_span must be increasing")


@dataclass
class EventRecord:
    time: float
    name: str
    pre_state: np.ndarray
    post_state: np.ndarray


@dataclass
class SimTrace:
    """Integrator output: step points, event log, dense segments."""

    times: np.ndarray
    states: np.ndarray  # shape (n_points, n)
    events: list[EventRecord]
    segments: list  # (t0, t1, OdeSolution) for dense evaluation

    def interpolate(self, t: float) -> np.ndarray:
        for (t0, t1, sol) in self.segments:
            if t0 - 1e-12 <= t <= t1 + 1e-12:
                return np.atleast_1d(sol(t))
        raise ValueError(f"t={t} outside trace range")

    def sample(self, ts: np.ndarray) -> np.ndarray:
        return np.array([self.interpolate(t) for t in ts])

    def event_times(self, name: str) -> np.ndarray:
        return np.array([e.time for e in self.events if e.name == name])


def solve_ivp(problem: IvpProblem) -> SimTrace:
    """Adaptive Dormand-Prince 5(4) with event localization.

    scipy localizes each event time by root finding on the dense output;
    impact events replace the state through their mapper and integration
    restarts from the event time.  Simultaneous events are processed in
    listed order.
    """
    t, t_end = problem.t_span
    y = np.asarray(problem.y0, dtype=float)
    times = [t]
    states = [y.copy()]
    records: list[EventRecord] = []
    segments = []
    steps = 0

    def wrap(ev: EventSpec):
        f = lambda tt, yy: ev.g(tt, yy)  # noqa: E731
        f.terminal = ev.action in (STOP, IMPACT)
        f.direction = ev.direction
        return f

    ev_funcs = [wrap(e) for e in problem.events]

    while t < t_end - 1e-13 * max(1.0, abs(t_end)):
        sol = _sp_solve_ivp(
            problem.rhs, (t, t_end), y, method="RK45",
            rtol=problem.rel_tol, atol=problem.abs_tol,
            events=ev_funcs or None, dense_output=True,
            max_step=problem.max_step)
        if not sol.success and sol.status != 1:
            raise StiffnessError(f"integrator failed at t={sol.t[-1]}: {sol.message}")
        steps += len(sol.t)
        if steps > MAX_STEPS:
            raise BudgetError("step budget exceeded")
        segments.append((sol.t[0], sol.t[-1], sol.sol))
        times.extend(sol.t[1:])
        states.extend(sol.y.T[1:])

        # log non-terminal events from this segment
        fired_terminal = None
        for spec, t_ev in zip(problem.events, sol.t_events or []):
            for te in t_ev:
                ye = np.atleast_1d(sol.sol(te))
                if spec.action == RECORD:
                    records.append(EventRecord(te, spec.name, ye, ye))
        if sol.status == 1:  # a terminal event fired
            # identify which terminal event(s); process in listed order
            t_term = sol.t[-1]
            for spec, t_ev in zip(problem.events, sol.t_events or []):
                if spec.action in (STOP, IMPACT) and len(t_ev) and \
                        abs(t_ev[-1] - t_term) <= 1e-12 * max(1.0, abs(t_term)):
                    fired_terminal = spec
                    break
            y_pre = np.atleast_1d(sol.sol(t_term))
            if fired_terminal is None or fired_terminal.action == STOP:
                records.append(EventRecord(t_term, getattr(fired_terminal, "name", "stop"),
                                           y_pre, y_pre))
                t = t_term
                break
            y_post = np.asarray(fired_terminal.mapper(t_term, y_pre), dtype=float)
            records.append(EventRecord(t_term, fired_terminal.name, y_pre, y_post))
            t, y = t_term, y_post
            times.append(t)
            states.append(y.copy())
            # nudge off the event surface is not needed: scipy restarts cleanly
        else:
            t = sol.t[-1]
            y = sol.y[:, -1]

    records.sort(key=lambda e: e.time)
    return SimTrace(np.asarray(times), np.asarray(states), records, segments)


def measure_period(trace: SimTrace, event_name: str = "zero") -> float:
    """Averaged spacing between successive same-direction zero crossings.

    The trace must carry recorded crossing events named `<event_name>_up` /
    `<event_name>_down`; the direction with more crossings wins.
    """
    ups = trace.event_times(event_name + "_up")
    downs = trace.event_times(event_name + "_down")
    best = ups if len(ups) >= len(downs) else downs
    if len(best) < 3:
        raise InsufficientDataError(
            f"need >= 3 same-direction crossings, have {len(best)}")
    gaps = np.diff(best)
    return float(np.mean(gaps))


def quad_adaptive(f: Callable[[float], float], lo: float, hi: float,
                  breakpoints: Sequence[float] = (), tol: float = 1e-12) -> float:
    """Gauss-Kronrod adaptive quadrature split at known discontinuities."""
    if hi == lo:
        return 0.0
    pts = sorted(p for p in breakpoints if lo < p < hi)
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = _sp_quad(f, a, b, epsabs=tol, epsrel=tol, limit=10 ** 4)
        if not math.isfinite(val):
            raise AccuracyError(f"quadrature diverged on [{a}, {b}]")
        if err > 100 * max(tol, tol * abs(val)) and err > 1e-8 * max(1.0, abs(val)):
            raise AccuracyError(f"quadrature error {err} on [{a}, {b}]")
        total += val
    return total


def fourier_project(f: Callable[[float], float], omega: float,
                    harmonics: Sequence[tuple[str, int]],
                    breakpoints: Sequence[float] = (),
                    tol: float = 1e-12) -> list[float]:
    """Fourier coefficients (omega/pi) * int f(t) trig(m omega t) dt.

    The constant harmonic ("const", 0) is halved.  f is defined on one
    period [0, 2 pi / omega]; breakpoints are caller-supplied t values.
    """
    period = 2 * math.pi / omega
    out = []
    for kind, m in harmonics:
        if kind == "const" or m == 0:
            w = lambda t: 1.0  # noqa: E731
            scale = omega / (2 * math.pi)
        elif kind == "cos":
            w = lambda t, m=m: math.cos(m * omega * t)  # noqa: E731
            scale = omega / math.pi
        elif kind == "sin":
            w = lambda t, m=m: math.sin(m * omega * t)  # noqa: E731
            scale = omega / math.pi
        else:
            raise ValueError(f"unknown harmonic kind {kind!r}")
        out.append(scale * quad_adaptive(lambda t: f(t) * w(t), 0.0, period,
                                         breakpoints, tol))
    return out


@dataclass
class NonlinearSystem:
    """Residual map F: R^n -> R^n with guess, optional brackets, tolerance."""

    residual: Callable[[np.ndarray], Sequence[float]]
    x0: Sequence[float]
    brackets: Sequence[tuple[float, float] | None] | None = None
    tol: float = 1e-10

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        if self.brackets is not None:
            for xi, br in zip(x0, self.brackets):
                if br is not None and not (br[0] <= xi <= br[1]):
                    raise ValueError("initial guess outside bracket")


def _fd_jacobian(F, x, fx):
    n = len(x)
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-6 * max(1.0, abs(x[j]))
        xp = x.copy(); xp[j] += h
        xm = x.copy(); xm[j] -= h
        J[:, j] = (np.asarray(F(xp)) - np.asarray(F(xm))) / (2 * h)
    return J


def _in_brackets(x, brackets):
    if brackets is None:
        return True
    for xi, br in zip(x, brackets):
        if br is not None and not (br[0] - 1e-12 <= xi <= br[1] + 1e-12):
            return False
    return True


def solve_system(sys: NonlinearSystem, max_iter: int = 60,
                 max_restarts: int = 20, use_broyden: bool = False) -> np.ndarray:
    """Damped Newton with central finite-difference Jacobian.

    Armijo backtracking on |F|^2; iterates clipped to brackets during the
    iteration and solutions outside brackets rejected; rejected or stalled
    runs restart from deterministically perturbed guesses.  With
    use_broyden=True the Jacobian is rank-one updated between full
    re-evaluations.
    """
    rng = np.random.default_rng(0)
    x0 = np.asarray(sys.x0, dtype=float)
    fx0 = np.asarray(sys.residual(x0), dtype=float)
    if not np.all(np.isfinite(fx0)):
        raise SolverFailure("residual not finite at initial guess", x0, fx0)

    best_x, best_norm = x0, float(np.max(np.abs(fx0)))

    for attempt in range(max_restarts + 1):
        if attempt == 0:
            x = x0.copy()
        else:
            x = x0 + rng.uniform(-0.3, 0.3, size=x0.shape) * np.maximum(1.0, np.abs(x0))
            if sys.brackets is not None:
                for j, br in enumerate(sys.brackets):
                    if br is not None:
                        x[j] = min(max(x[j], br[0]), br[1])
        fx = np.asarray(sys.residual(x), dtype=float)
        J = None
        for it in range(max_iter):
            norm = float(np.max(np.abs(fx)))
            if norm < best_norm:
                best_x, best_norm = x.copy(), norm
            if norm < sys.tol:
                if _in_brackets(x, sys.brackets):
                    return x
                break  # converged to an out-of-bracket root: restart
            if J is None or not use_broyden or it % 8 == 0:
                J = _fd_jacobian(sys.residual, x, fx)
            try:
                step = np.linalg.solve(J, -fx)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(J, -fx, rcond=None)[0]
            # Armijo backtracking on the squared norm
            phi0 = float(fx @ fx)
            lam, ok = 1.0, False
            for _ in range(30):
                xn = x + lam * step
                if sys.brackets is not None:
                    for j, br in enumerate(sys.brackets):
                        if br is not None:
                            xn[j] = min(max(xn[j], br[0]), br[1])
                fn = np.asarray(sys.residual(xn), dtype=float)
                if np.all(np.isfinite(fn)) and float(fn @ fn) < phi0 * (1 - 1e-4 * lam):
                    ok = True
                    break
                lam *= 0.5
            if not ok:
                break  # stalled: restart
            if use_broyden:
                dx = xn - x
                df = fn - fx
                denom = float(dx @ dx)
                if denom > 0:
                    J = J + np.outer(df - J @ dx, dx) / denom
            x, fx = xn, fn
        else:
            continue  # max_iter exhausted without stall: restart anyway
    if best_norm < sys.tol and _in_brackets(best_x, sys.brackets):
        return best_x
    raise SolverFailure(
        f"no convergence after {max_restarts} restarts (best |F|={best_norm:.3e})",
        best_x, best_norm)


def solve_bracketed(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-12) -> float:
    """Scalar root in [lo, hi]; the bracket must change sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise SolverFailure(f"no sign change on [{lo}, {hi}]: f={flo:.3e},{fhi:.3e}")
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
