"""Formal algebraic-decay series for the Painleve I equation y'' = 6 y^2 + x.

The solution branch y ~ 6^(-1/2) i x^(1/2) is built by the fixed-point
iteration y_{n+1} = 6^(-1/2) i sqrt(x - y_n''), run in exact arithmetic over
Q(theta) with theta^2 = -6 (so theta = i sqrt 6 and 6^(-1/2) i = theta / 6).

The series descends in powers of x (exponents 1/2, -2, -9/2, ...), so the
engine stores it ascending in the inverse variable w = 1/x, where the
truncation order is an ordinary upper cutoff.  The public type translates
back to x-exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import IterationDepthError
from .series import PuiseuxSeries, Scalar

THETA_SQUARED = Fraction(-6)
INVERSE_VAR = "1/x"

# coefficient theta/6 = 6^(-1/2) i multiplying the square root
_PREFACTOR = Scalar(0, Fraction(1, 6), THETA_SQUARED)


def _x_monomial() -> PuiseuxSeries:
    # x = w^(-1), exact
    return PuiseuxSeries.monomial(INVERSE_VAR, THETA_SQUARED, -1)


def second_derivative_x(y: PuiseuxSeries) -> PuiseuxSeries:
    """d^2/dx^2 of a series stored in w = 1/x: y'' = w^4 y_ww + 2 w^3 y_w."""
    yw = y.derivative()
    yww = yw.derivative()
    w3 = PuiseuxSeries.monomial(INVERSE_VAR, THETA_SQUARED, 3, 2)
    w4 = PuiseuxSeries.monomial(INVERSE_VAR, THETA_SQUARED, 4)
    return w4 * yww + w3 * yw


@dataclass(frozen=True)
class P1Series:
    """Stabilized truncation of the formal solution.

    ``series`` lives in the inverse variable; term exponents in x are the
    negatives of the stored ones.
    """

    series: PuiseuxSeries
    n_terms: int

    def term(self, x_exponent) -> Scalar:
        """Coefficient of x**x_exponent."""
        return self.series.coefficient(-Fraction(x_exponent))

    def x_terms(self):
        """(x exponent, coefficient) pairs, descending in the x exponent."""
        return tuple((-e, c) for e, c in self.series.items())

    def to_json_dict(self) -> dict:
        return self.series.to_json_dict()


def _iterate(y: PuiseuxSeries, trunc: Fraction, branch: int) -> PuiseuxSeries:
    radicand = _x_monomial() - second_derivative_x(y)
    root = radicand.sqrt(branch=branch, cap=trunc + Fraction(3))
    return root.scale(_PREFACTOR).truncate(trunc)


def formal_series(n_terms: int, branch: int = 1) -> P1Series:
    """Iterate the recurrence from y = 0 until ``n_terms`` coefficients are
    stable (two consecutive iterations agree exactly).

    Exponents in x descend from 1/2 in steps of 5/2; the default branch has
    coefficient theta/6 at x^(1/2).
    """
    if n_terms < 1:
        raise IterationDepthError("n_terms must be at least 1")
    # highest retained w-exponent is 5(n_terms-1)/2 - 1/2; cut just above it
    trunc = Fraction(5 * n_terms - 1, 2)
    y = PuiseuxSeries.zero(INVERSE_VAR, THETA_SQUARED, trunc)
    budget = n_terms + 8
    for _ in range(budget):
        y_next = _iterate(y, trunc, branch)
        if y_next == y:
            return P1Series(series=y, n_terms=n_terms)
        y = y_next
    raise IterationDepthError(
        f"series did not stabilize within {budget} iterations")


def residual(y) -> PuiseuxSeries:
    """y'' - 6 y^2 - x for the truncated series treated as an exact sum.

    For a stabilized n-term truncation every representable term cancels:
    nothing survives below w-exponent 5n/2 - 1 (i.e. above x-exponent
    1 - 5n/2).
    """
    if isinstance(y, P1Series):
        y = y.series
    exact = PuiseuxSeries(INVERSE_VAR, THETA_SQUARED, dict(y.items()), None)
    return (second_derivative_x(exact)
            - exact * exact * Scalar.rational(6, THETA_SQUARED)
            - _x_monomial())


def residual_floor(n_terms: int) -> Fraction:
    """Lowest w-exponent at which the n-term truncation's residual may be
    nonzero."""
    return Fraction(5 * n_terms - 2, 2)
