"""Exact small-time expansion for the modified Harry Dym problem.

The initial-value problem (posed in a sector, data H(x, 0) = x^(-1/2))

    H_t - H^3 H_xxx + H_x + (1/2) H^3 = 0

has a unique small-time solution with an expansion in the characteristic
variable y = x - t,

    H(x, t) = sum_n t^n c_n(y),    c_0 = y^(-1/2),

where the transport part collapses to H_t + H_x = sum (n+1) c_{n+1} t^n and
the coefficient recurrence

    c_{n+1} = [t^n-coefficient of H^3 H_yyy - (1/2) H^3] / (n + 1)

is evaluated in exact rational arithmetic.  Every c_n is a finite sum of
half-integer powers of y, with the most negative exponent -(9n+1)/2.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, OutOfRegimeError
from .series import PuiseuxSeries, Scalar

__all__ = ["OuterSeries", "OuterValue", "coefficients", "evaluate"]

VARIABLE = "y"
THETA_SQUARED = Fraction(-1)   # coefficients are plain rationals


def _y_inv_sqrt() -> PuiseuxSeries:
    return PuiseuxSeries.monomial(VARIABLE, THETA_SQUARED, Fraction(-1, 2))


@dataclass(frozen=True)
class OuterSeries:
    """Coefficients c_0 ... c_N of the small-time expansion."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ConfigurationError("coefficient count does not match order")

    def to_json_dict(self) -> dict:
        return {"variable": VARIABLE, "order": self.order,
                "coefficients": [c.to_json_dict() for c in self.coeffs]}


def coefficients(order: int) -> OuterSeries:
    """Generate c_0 ... c_order by the exact recurrence."""
    if order < 0:
        raise ConfigurationError("order must be nonnegative")
    cs = [_y_inv_sqrt()]
    d3 = [cs[0].derivative().derivative().derivative()]
    half = Scalar(Fraction(1, 2), 0, THETA_SQUARED)
    for n in range(order):
        # [H^3]_m and [H^3 H_yyy]_n from the coefficients known so far
        zero = PuiseuxSeries.zero(VARIABLE, THETA_SQUARED)
        cube_n = zero
        rhs = zero
        for a in range(n + 1):
            for b in range(n + 1 - a):
                for c in range(n + 1 - a - b):
                    rhs = rhs + cs[a] * cs[b] * cs[c] * d3[n - a - b - c]
                cube_n = cube_n + cs[a] * cs[b] * cs[n - a - b]
        nxt = (rhs - cube_n.scale(half)).scale(
            Scalar(Fraction(1, n + 1), 0, THETA_SQUARED))
        cs.append(nxt)
        d3.append(nxt.derivative().derivative().derivative())
    return OuterSeries(coeffs=tuple(cs), order=order)


@dataclass(frozen=True)
class OuterValue:
    value: complex
    error_proxy: float
    terms: tuple


def evaluate(x: complex, t: complex, order: int,
             outer: OuterSeries | None = None) -> OuterValue:
    """Partial sum sum_{n<=order} t^n c_n(x - t) with the first neglected
    term's magnitude as the error proxy.

    Raises OutOfRegimeError when the term magnitudes stop decreasing, which
    signals y = x - t entering the inner scale where the ordering of the
    expansion breaks down.
    """
    if outer is None or outer.order < order + 1:
        outer = coefficients(order + 1)
    y = complex(x) - complex(t)
    if y == 0:
        raise OutOfRegimeError("characteristic variable y = x - t vanishes")
    t = complex(t)
    vals = [outer.coeffs[n].eval_complex(y) * t ** n
            for n in range(order + 2)]
    mags = [abs(v) for v in vals]
    for n in range(order + 1):
        if mags[n + 1] >= mags[n] and mags[n] > 0:
            raise OutOfRegimeError(
                f"expansion terms stop decreasing at order {n + 1} "
                f"(|y| = {abs(y):.3g} is inside the inner region for this t)")
    return OuterValue(value=sum(vals[: order + 1]),
                      error_proxy=mags[order + 1],
                      terms=tuple(vals[: order + 1]))


def inner_limit_profile(outer: OuterSeries) -> dict:
    """Exponent bookkeeping for the inner re-scaling H = t^(-1/9) G.

    A term t^n y^e maps to tau^k eta^e with k = (9n + 2e + 1)/7; collecting
    k = 0 terms yields the far-field profile of the leading inner solution.
    Returns {k: {eta exponent: rational coefficient}}.
    """
    profile: dict = {}
    for n, c in enumerate(outer.coeffs):
        for e, s in c.items():
            nine = 9 * n + 2 * e + 1
            if nine % 7 != 0:
                raise ConfigurationError(
                    f"term t^{n} y^{e} violates the inner-scaling lattice")
            k = int(nine // 7)
            profile.setdefault(k, {})[e] = s.a
    return profile
