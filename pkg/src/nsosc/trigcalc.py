"""Exact calculus on piecewise polynomial-exponential-trigonometric series.

A series is a finite sum of terms

    c * tau^k * exp(r*tau) * {sin, cos, 1}(m*tau) * H(tau - a)

with H the right-continuous Heaviside step.  This family is closed under
differentiation and multiplication, and every term integrates in closed form,
so weighted-residual integrals of the solver waveforms are exact to roundoff.

Coefficients are concrete floats: parameters are substituted at construction
time and series are rebuilt per solver iteration instead of carrying symbols.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

SIN = "sin"
COS = "cos"
CONST = "const"

_KINDS = (SIN, COS, CONST)

# normalize() drops merged terms with |c| below this
COEFF_DROP = 1e-14


class TrigCalcError(Exception):
    """Base error for series operations."""


class DomainError(TrigCalcError):
    """Evaluation or integration outside [0, domain_end]."""


class DistributionalDerivativeError(TrigCalcError):
    """Series has a jump at an activation time; d/dtau would need deltas."""


@dataclass(frozen=True)
class TrigTerm:
    """One term c * tau^k * e^(r*tau) * trig(m*tau) * H(tau - a).

    kind is one of "sin", "cos", "const"; const terms must have m == 0 and
    sin/cos terms m >= 1.  The activation time a >= 0 multiplies the term by
    the right-continuous step H(tau - a).
    """

    c: float
    k: int = 0
    r: float = 0.0
    kind: str = CONST
    m: int = 0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == CONST and self.m != 0:
            raise ValueError("const terms must have m == 0")
        if self.kind != CONST and self.m < 1:
            raise ValueError("sin/cos terms must have m >= 1")
        if self.k < 0:
            raise ValueError("power k must be non-negative")
        if self.a < 0:
            raise ValueError("activation time must be >= 0")
        if not (math.isfinite(self.c) and math.isfinite(self.r)):
            raise ValueError("coefficient and rate must be finite")

    def smooth_value(self, tau: float) -> float:
        """Value of the smooth factor, ignoring the Heaviside gate."""
        v = self.c
        if self.k:
            v *= tau ** self.k
        if self.r:
            v *= math.exp(self.r * tau)
        if self.kind == SIN:
            v *= math.sin(self.m * tau)
        elif self.kind == COS:
            v *= math.cos(self.m * tau)
        return v

    def _key(self):
        return (self.k, self.r, self.kind, self.m, self.a)


def term_cos(c: float, m: int = 1, k: int = 0, r: float = 0.0,
             a: float = 0.0) -> TrigTerm:
    return TrigTerm(c=c, k=k, r=r, kind=COS, m=m, a=a)


def term_sin(c: float, m: int = 1, k: int = 0, r: float = 0.0,
             a: float = 0.0) -> TrigTerm:
    return TrigTerm(c=c, k=k, r=r, kind=SIN, m=m, a=a)


def term_const(c: float, k: int = 0, r: float = 0.0,
               a: float = 0.0) -> TrigTerm:
    return TrigTerm(c=c, k=k, r=r, kind=CONST, m=0, a=a)


def _poly_exp_antiderivative(k: int, z: complex, tau: float) -> complex:
    """Antiderivative of tau^k * e^(z*tau) at tau (repeated parts)."""
    if z == 0:
        return tau ** (k + 1) / (k + 1)
    acc = 0.0 + 0.0j
    fact = 1.0  # k!/(k-j)!
    for j in range(k + 1):
        acc += (-1) ** j * fact * tau ** (k - j) / z ** (j + 1)
        fact *= k - j
    return cmath.exp(z * tau) * acc


def _term_integral(t: TrigTerm, lo: float, hi: float) -> float:
    """Exact integral of the smooth factor of t over [lo, hi]."""
    if hi <= lo:
        return 0.0
    if t.kind == CONST:
        z = complex(t.r, 0.0)
        f = _poly_exp_antiderivative(t.k, z, hi) - _poly_exp_antiderivative(t.k, z, lo)
        return t.c * f.real
    z = complex(t.r, t.m)
    f = _poly_exp_antiderivative(t.k, z, hi) - _poly_exp_antiderivative(t.k, z, lo)
    # e^(r tau) cos(m tau) = Re e^(z tau), sin = Im
    return t.c * (f.real if t.kind == COS else f.imag)


@dataclass(frozen=True)
class PiecewiseTrigSeries:
    """Finite trig series on [0, domain_end] with Heaviside activations."""

    terms: tuple[TrigTerm, ...]
    domain_end: float

    def __post_init__(self):
        if self.domain_end <= 0:
            raise ValueError("domain_end must be positive")
        if not isinstance(self.terms, tuple):
            object.__setattr__(self, "terms", tuple(self.terms))

    # -- basic queries ---------------------------------------------------

    def activation_times(self) -> list[float]:
        """Interior activation times, sorted, without duplicates."""
        acts = {t.a for t in self.terms if 0.0 < t.a < self.domain_end}
        return sorted(acts)

    def _check_tau(self, tau: float, *, left: bool) -> None:
        slack = 1e-12 * max(1.0, self.domain_end)
        lo_ok = tau > 0.0 if left else tau >= -slack
        if not (lo_ok and tau <= self.domain_end + slack):
            raise DomainError(
                f"tau={tau} outside [0, {self.domain_end}]"
                + (" (left limit needs tau > 0)" if left else ""))

    # -- evaluation ------------------------------------------------------

    def evaluate(self, tau: float) -> float:
        """Series value at tau; H(tau - a) taken as 1 at tau == a."""
        self._check_tau(tau, left=False)
        return math.fsum(t.smooth_value(tau) for t in self.terms if t.a <= tau)

    def eval_left(self, tau: float) -> float:
        """Left limit at tau: terms activated strictly before tau."""
        self._check_tau(tau, left=True)
        return math.fsum(t.smooth_value(tau) for t in self.terms if t.a < tau)

    def jump(self, tau: float) -> float:
        """evaluate - eval_left at tau (size of the step discontinuity)."""
        return self.evaluate(tau) - self.eval_left(tau)

    def __call__(self, tau: float) -> float:
        return self.evaluate(tau)

    # -- calculus ----------------------------------------------------------

    def differentiate(self) -> "PiecewiseTrigSeries":
        """Exact term-wise derivative.

        Requires the series to be C0 at every interior activation time;
        otherwise the true derivative would contain Dirac terms and a
        DistributionalDerivativeError is raised.
        """
        for a in self.activation_times():
            scale = max(1.0, math.fsum(abs(t.c) for t in self.terms if t.a == a))
            if abs(self.jump(a)) > 1e-12 * scale:
                raise DistributionalDerivativeError(
                    f"series jumps at activation time {a}; "
                    "distributional derivative required")
        out: list[TrigTerm] = []
        for t in self.terms:
            if t.k:
                out.append(TrigTerm(t.c * t.k, t.k - 1, t.r, t.kind, t.m, t.a))
            if t.r:
                out.append(TrigTerm(t.c * t.r, t.k, t.r, t.kind, t.m, t.a))
            if t.kind == SIN:
                out.append(TrigTerm(t.c * t.m, t.k, t.r, COS, t.m, t.a))
            elif t.kind == COS:
                out.append(TrigTerm(-t.c * t.m, t.k, t.r, SIN, t.m, t.a))
        return PiecewiseTrigSeries(tuple(out), self.domain_end).normalize()

    def integrate_definite(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi] within the domain."""
        slack = 1e-12 * max(1.0, self.domain_end)
        if not (-slack <= lo <= hi <= self.domain_end + slack):
            raise DomainError(f"bad integration range [{lo}, {hi}]")
        parts = [_term_integral(t, max(lo, t.a), hi) for t in self.terms]
        return math.fsum(parts)

    # -- algebra -----------------------------------------------------------

    def product(self, other: "PiecewiseTrigSeries") -> "PiecewiseTrigSeries":
        """Exact product series (product-to-sum on trig factors)."""
        if abs(self.domain_end - other.domain_end) > 1e-12:
            raise TrigCalcError("product requires matching domains")
        out: list[TrigTerm] = []
        for t1 in self.terms:
            for t2 in other.terms:
                out.extend(_term_product(t1, t2))
        return PiecewiseTrigSeries(tuple(out), self.domain_end).normalize()

    def scaled(self, factor: float) -> "PiecewiseTrigSeries":
        terms = tuple(TrigTerm(t.c * factor, t.k, t.r, t.kind, t.m, t.a)
                      for t in self.terms)
        return PiecewiseTrigSeries(terms, self.domain_end)

    def __add__(self, other: "PiecewiseTrigSeries") -> "PiecewiseTrigSeries":
        if abs(self.domain_end - other.domain_end) > 1e-12:
            raise TrigCalcError("sum requires matching domains")
        return PiecewiseTrigSeries(self.terms + other.terms, self.domain_end)

    def normalize(self) -> "PiecewiseTrigSeries":
        """Merge terms with identical (k, r, kind, m, a); drop tiny ones."""
        merged: dict[tuple, float] = {}
        for t in self.terms:
            merged[t._key()] = merged.get(t._key(), 0.0) + t.c
        out = []
        for (k, r, kind, m, a), c in sorted(merged.items(), key=_key_order):
            if abs(c) > COEFF_DROP:
                out.append(TrigTerm(c, k, r, kind, m, a))
        if not out:  # keep an explicit zero so the series stays well-formed
            out = [term_const(0.0)]
        return PiecewiseTrigSeries(tuple(out), self.domain_end)


def _key_order(item):
    (k, r, kind, m, a), _ = item
    return (a, m, kind, k, r)


def _term_product(t1: TrigTerm, t2: TrigTerm) -> list[TrigTerm]:
    c = t1.c * t2.c
    k = t1.k + t2.k
    r = t1.r + t2.r
    a = max(t1.a, t2.a)
    k1, k2 = t1.kind, t2.kind
    if k1 == CONST and k2 == CONST:
        return [TrigTerm(c, k, r, CONST, 0, a)]
    if k1 == CONST:
        return [TrigTerm(c, k, r, k2, t2.m, a)]
    if k2 == CONST:
        return [TrigTerm(c, k, r, k1, t1.m, a)]
    m, n = t1.m, t2.m
    plus, minus = m + n, m - n
    if k1 == COS and k2 == COS:
        # cos m cos n = (cos(m-n) + cos(m+n))/2
        return _half_pair(c, k, r, a, COS, minus, COS, plus)
    if k1 == SIN and k2 == SIN:
        # sin m sin n = (cos(m-n) - cos(m+n))/2
        return _half_pair(c, k, r, a, COS, minus, COS, plus, second_sign=-1.0)
    if k1 == SIN:  # sin m cos n = (sin(m+n) + sin(m-n))/2
        return _half_pair(c, k, r, a, SIN, plus, SIN, minus)
    # cos m sin n = (sin(m+n) - sin(m-n))/2
    return _half_pair(c, k, r, a, SIN, plus, SIN, minus, second_sign=-1.0)


def _half_pair(c, k, r, a, kind1, m1, kind2, m2, second_sign=1.0):
    out = []
    for kind, m, sgn in ((kind1, m1, 1.0), (kind2, m2, second_sign)):
        cc = 0.5 * c * sgn
        if m < 0:
            m = -m
            if kind == SIN:
                cc = -cc
        if m == 0:
            if kind == SIN:
                continue  # sin(0) term vanishes
            out.append(TrigTerm(cc, k, r, CONST, 0, a))
        else:
            out.append(TrigTerm(cc, k, r, kind, m, a))
    return out


def series(terms, domain_end: float) -> PiecewiseTrigSeries:
    """Build a series from an iterable of TrigTerm."""
    return PiecewiseTrigSeries(tuple(terms), domain_end)
