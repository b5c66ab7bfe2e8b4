"""Exact truncated Laurent-Puiseux series over a rational quadratic extension.

Coefficients live in Q(theta) with theta^2 = d for a fixed rational d (for
example d = -6 so theta = i*sqrt(6), or d = -1 so theta = i).  Exponents are
restricted to the half-integer lattice (1/2)Z; finitely many may be negative.

Truncation is explicit data: a series with truncation order T represents a
formal sum whose coefficients are known exactly for every exponent < T and
unknown at or beyond T.  ``trunc = None`` marks an exact series (all
unstored coefficients are genuinely zero).  Arithmetic propagates truncation
pessimistically and reading a coefficient at or past the truncation order
raises, so stale knowledge can never masquerade as a zero.

All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import cmath
import json
import math
from collections.abc import Iterable, Mapping
from fractions import Fraction

from .errors import (
    ConfigurationError,
    DivisionError,
    LatticeError,
    TruncationError,
    UnsupportedScalarError,
)

__all__ = ["Scalar", "PuiseuxSeries", "rational_sqrt"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    pn, pd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if pn * pn == q.numerator and pd * pd == q.denominator:
        return Fraction(pn, pd)
    return None


class Scalar:
    """An element a + b*theta of Q(theta), theta^2 = d.

    Arithmetic is exact.  Two scalars combine when they share the same d or
    when one of them is plain rational (b == 0), in which case it adopts the
    other's extension.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=-1):
        object.__setattr__(self, "a", _frac(a))
        object.__setattr__(self, "b", _frac(b))
        object.__setattr__(self, "d", _frac(d))

    def __setattr__(self, *_):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def rational(cls, q, d=-1) -> "Scalar":
        return cls(_frac(q), 0, d)

    # -- helpers -----------------------------------------------------------

    def _join_d(self, other: "Scalar") -> Fraction:
        if self.d == other.d:
            return self.d
        if self.b == 0:
            return other.d
        if other.b == 0:
            return self.d
        raise ConfigurationError(
            f"mixing extensions theta^2={self.d} and theta^2={other.d}"
        )

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(other, 0, self.d)
        return NotImplemented

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.a + other.a, self.b + other.b, self._join_d(other))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b, self.d)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self._join_d(other)
        return Scalar(
            self.a * other.a + d * self.b * other.b,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        norm = self.a * self.a - self.d * self.b * self.b
        if norm == 0:
            raise DivisionError("scalar has no inverse")
        return Scalar(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def sqrt(self, branch: int = 1) -> "Scalar":
        """An exact square root in the same extension, if one exists.

        The principal representative has a > 0, or a == 0 and b > 0; pass
        branch = -1 for its negative.  Raises UnsupportedScalarError when no
        root lies in Q(theta).
        """
        root = self._sqrt_candidate()
        if root is None:
            raise UnsupportedScalarError(f"no exact square root of {self}")
        if branch not in (1, -1):
            raise ConfigurationError("branch must be +1 or -1")
        return root if branch == 1 else -root

    def _sqrt_candidate(self):
        if self.is_zero():
            return Scalar(0, 0, self.d)
        if self.b == 0:
            x = rational_sqrt(self.a)
            if x is not None:
                return Scalar(x, 0, self.d)
            if self.d != 0:
                y2 = self.a / self.d
                y = rational_sqrt(y2)
                if y is not None:
                    return Scalar(0, y, self.d)
            return None
        # b != 0: solve x^2 + d y^2 = a, 2 x y = b over Q
        disc = rational_sqrt(self.a * self.a - self.d * self.b * self.b)
        if disc is None:
            return None
        for sign in (1, -1):
            x2 = (self.a + sign * disc) / 2
            x = rational_sqrt(x2)
            if x is not None and x != 0:
                y = self.b / (2 * x)
                cand = Scalar(x, y, self.d)
                if cand.a > 0 or (cand.a == 0 and cand.b > 0):
                    return cand
                return -cand
        return None

    # -- predicates / conversions ------------------------------------------

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.a != other.a or self.b != other.b:
            return False
        return self.b == 0 or self.d == other.d

    def __hash__(self):
        return hash((self.a, self.b, self.d if self.b else None))

    def to_complex(self) -> complex:
        if self.b == 0:
            return complex(self.a)
        root = cmath.sqrt(complex(self.d))
        return complex(self.a) + complex(self.b) * root

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "d": str(self.d)}

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "Scalar":
        return cls(Fraction(obj["a"]), Fraction(obj["b"]), Fraction(obj["d"]))

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        if self.a == 0:
            return f"{self.b}*th"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*th"


def _check_exponent(e: Fraction) -> Fraction:
    e = _frac(e)
    if e.denominator not in (1, 2):
        raise LatticeError(f"exponent {e} is off the half-integer lattice")
    return e


class PuiseuxSeries:
    """Truncated formal sum of Scalar coefficients over half-integer powers.

    ``terms`` maps exponent -> Scalar; zero coefficients are never stored
    and every stored exponent is < ``trunc`` (when truncated).
    """

    __slots__ = ("variable", "theta_squared", "_terms", "trunc")

    def __init__(self, variable: str, theta_squared, terms: Mapping | Iterable = (),
                 trunc=None):
        object.__setattr__(self, "variable", str(variable))
        object.__setattr__(self, "theta_squared", _frac(theta_squared))
        t = trunc if trunc is None else _check_exponent(trunc)
        object.__setattr__(self, "trunc", t)
        items = terms.items() if isinstance(terms, Mapping) else terms
        stored = {}
        for e, c in items:
            e = _check_exponent(e)
            if not isinstance(c, Scalar):
                c = Scalar.rational(c, self.theta_squared)
            elif c.b != 0 and c.d != self.theta_squared:
                raise ConfigurationError(
                    f"coefficient extension {c.d} != series extension "
                    f"{self.theta_squared}")
            if c.is_zero():
                continue
            if t is not None and e >= t:
                raise TruncationError(
                    f"term at exponent {e} at/beyond truncation order {t}")
            stored[e] = Scalar(c.a, c.b, self.theta_squared)
        object.__setattr__(self, "_terms", dict(sorted(stored.items())))

    def __setattr__(self, *_):
        raise AttributeError("PuiseuxSeries is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, variable, theta_squared, trunc=None):
        return cls(variable, theta_squared, {}, trunc)

    @classmethod
    def monomial(cls, variable, theta_squared, exponent, coeff=1, trunc=None):
        return cls(variable, theta_squared, {_frac(exponent): coeff}, trunc)

    @classmethod
    def constant(cls, variable, theta_squared, value, trunc=None):
        return cls.monomial(variable, theta_squared, 0, value, trunc)

    # -- basic accessors -----------------------------------------------------

    def items(self):
        """Term association, sorted by ascending exponent."""
        return tuple(self._terms.items())

    def exponents(self):
        return tuple(self._terms.keys())

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return self.trunc is None

    def order(self) -> Fraction | None:
        """Lowest stored exponent; for an empty series the truncation order
        (the earliest exponent at which it could still be nonzero), or None
        for the exact zero series."""
        if self._terms:
            return next(iter(self._terms))
        return self.trunc

    def leading(self):
        if not self._terms:
            raise DivisionError("zero series has no leading term")
        e = next(iter(self._terms))
        return e, self._terms[e]

    def coefficient(self, exponent) -> Scalar:
        e = _check_exponent(exponent)
        if self.trunc is not None and e >= self.trunc:
            raise TruncationError(
                f"coefficient at {e} is beyond truncation order {self.trunc}")
        return self._terms.get(e, Scalar(0, 0, self.theta_squared))

    # -- structural helpers --------------------------------------------------

    def _compat(self, other: "PuiseuxSeries"):
        if self.variable != other.variable:
            raise ConfigurationError(
                f"variable mismatch: {self.variable!r} vs {other.variable!r}")
        if self.theta_squared != other.theta_squared:
            raise ConfigurationError(
                f"extension mismatch: theta^2={self.theta_squared} vs "
                f"{other.theta_squared}")

    def _with(self, terms, trunc):
        if trunc is not None:
            terms = {e: c for e, c in terms.items() if e < trunc}
        return PuiseuxSeries(self.variable, self.theta_squared, terms, trunc)

    def truncate(self, trunc) -> "PuiseuxSeries":
        """Forget all terms at or beyond ``trunc`` (may only lower knowledge)."""
        t = _check_exponent(trunc)
        if self.trunc is not None and t > self.trunc:
            t = self.trunc
        return self._with(dict(self._terms), t)

    # -- ring operations -----------------------------------------------------

    @staticmethod
    def _min_trunc(*ts):
        vals = [t for t in ts if t is not None]
        return min(vals) if vals else None

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = PuiseuxSeries.constant(self.variable, self.theta_squared, other)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        self._compat(other)
        trunc = self._min_trunc(self.trunc, other.trunc)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            s = terms.get(e)
            s = c if s is None else s + c
            if s.is_zero():
                terms.pop(e, None)
            else:
                terms[e] = s
        return self._with(terms, trunc)

    __radd__ = __add__

    def __neg__(self):
        return self._with({e: -c for e, c in self._terms.items()}, self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, scalar) -> "PuiseuxSeries":
        if not isinstance(scalar, Scalar):
            scalar = Scalar.rational(scalar, self.theta_squared)
        if scalar.is_zero():
            return self._with({}, self.trunc)
        return self._with({e: c * scalar for e, c in self._terms.items()},
                          self.trunc)

    def shift(self, exponent) -> "PuiseuxSeries":
        """Multiply by the monomial variable**exponent (exact operation)."""
        de = _check_exponent(exponent)
        trunc = None if self.trunc is None else self.trunc + de
        return self._with({e + de: c for e, c in self._terms.items()}, trunc)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        self._compat(other)
        # exact zero annihilates regardless of the other operand's truncation
        if self.is_zero() and self.trunc is None:
            return self
        if other.is_zero() and other.trunc is None:
            return other
        ta = None if self.trunc is None else self.trunc + other.order()
        tb = None if other.trunc is None else other.trunc + self.order()
        trunc = self._min_trunc(ta, tb)
        terms: dict[Fraction, Scalar] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = ea + eb
                if trunc is not None and e >= trunc:
                    continue
                s = terms.get(e)
                p = ca * cb
                s = p if s is None else s + p
                if s.is_zero():
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return self._with(terms, trunc)

    __rmul__ = __mul__

    def derivative(self) -> "PuiseuxSeries":
        """Termwise d/dvariable; truncation order drops by one."""
        terms = {}
        for e, c in self._terms.items():
            if e == 0:
                continue
            terms[e - 1] = c * e
        trunc = None if self.trunc is None else self.trunc - 1
        return self._with(terms, trunc)

    def _split_leading(self, cap):
        """Write self = c0 * var^e0 * (1 + u), returning (e0, c0, u).

        ``cap`` bounds the relative truncation when self is exact.
        """
        if self.is_zero():
            raise DivisionError("zero series has no leading factorization")
        e0, c0 = self.leading()
        inv = c0.inverse()
        u = self.shift(-e0).scale(inv) - 1
        rel = None if self.trunc is None else self.trunc - e0
        if rel is None:
            rel = cap
        elif cap is not None:
            rel = min(rel, cap)
        if rel is None:
            if not u.is_zero():
                raise TruncationError(
                    "operation on an exact multi-term series needs an explicit "
                    "truncation cap")
            u = u._with({}, None)
        else:
            u = u.truncate(rel)
        return e0, c0, u

    def _geometric(self, u: "PuiseuxSeries", coeffs):
        """Sum c_j u^j for the generator ``coeffs`` until truncation kills it."""
        it = iter(coeffs)
        acc = PuiseuxSeries.constant(self.variable, self.theta_squared,
                                     Scalar.rational(next(it), self.theta_squared),
                                     u.trunc)
        power = PuiseuxSeries.constant(self.variable, self.theta_squared, 1)
        if u.is_zero():
            return acc
        step = u.order()
        j = 0
        for c in it:
            j += 1
            if u.trunc is not None and j * step >= u.trunc:
                break
            power = power * u
            acc = acc + power.scale(Scalar.rational(c, self.theta_squared))
        return acc

    def sqrt(self, branch: int = 1, cap=None) -> "PuiseuxSeries":
        """Square root with mul(s, s) = self up to truncation.

        The leading exponent must be an even lattice point (an integer) so
        the result stays on the half-integer lattice; the leading coefficient
        must have an exact root in the extension.  ``cap`` bounds the relative
        truncation when self is exact and the binomial tail does not
        terminate.
        """
        cap = None if cap is None else _check_exponent(cap)
        e0, c0, u = self._split_leading(cap)
        if e0.denominator != 1:
            raise LatticeError(
                f"leading exponent {e0} must be integral for a lattice sqrt")
        root = c0.sqrt(branch)

        def binom_halves():
            # binomial coefficients C(1/2, j)
            c = Fraction(1)
            j = 0
            while True:
                yield c
                c *= (Fraction(1, 2) - j) / (j + 1)
                j += 1

        body = self._geometric(u, binom_halves())
        return body.scale(root).shift(e0 / 2)

    def inverse(self, cap=None) -> "PuiseuxSeries":
        cap = None if cap is None else _check_exponent(cap)
        if self.is_zero():
            raise DivisionError("reciprocal of zero series")
        e0, c0, u = self._split_leading(cap)

        def alternating():
            c = Fraction(1)
            while True:
                yield c
                c = -c

        body = self._geometric(u, alternating())
        return body.scale(c0.inverse()).shift(-e0)

    def pow_int(self, k: int, cap=None) -> "PuiseuxSeries":
        """Integer power; negative k goes through the reciprocal."""
        if not isinstance(k, int):
            raise ConfigurationError("pow_int exponent must be an integer")
        if k == 0:
            return PuiseuxSeries.constant(self.variable, self.theta_squared, 1)
        base = self if k > 0 else self.inverse(cap)
        out = base
        for _ in range(abs(k) - 1):
            out = out * base
        return out

    # -- evaluation ----------------------------------------------------------

    def eval_complex(self, x) -> complex:
        """Sum stored terms at a complex point; principal branches for the
        fractional powers (cut on the negative real axis)."""
        x = complex(x)
        total = 0j
        for e, c in self._terms.items():
            if e == 0:
                p = 1.0 + 0j
            elif x == 0:
                raise DivisionError("evaluation at 0 with nonzero exponent")
            else:
                p = cmath.exp(complex(e) * cmath.log(x))
            total += c.to_complex() * p
        return total

    # -- comparison / hashing --------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return (self.variable == other.variable
                and self.theta_squared == other.theta_squared
                and self.trunc == other.trunc
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.variable, self.theta_squared, self.trunc,
                     tuple(self._terms.items())))

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "variable": self.variable,
            "theta_squared": str(self.theta_squared),
            "trunc": None if self.trunc is None else str(self.trunc),
            "terms": [
                {"exp": str(e), "a": str(c.a), "b": str(c.b)}
                for e, c in self._terms.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "PuiseuxSeries":
        d = Fraction(obj["theta_squared"])
        trunc = obj.get("trunc")
        terms = {
            Fraction(t["exp"]): Scalar(Fraction(t["a"]), Fraction(t["b"]), d)
            for t in obj["terms"]
        }
        return cls(obj["variable"], d, terms,
                   None if trunc is None else Fraction(trunc))

    @classmethod
    def from_json(cls, text: str) -> "PuiseuxSeries":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self):
        var = self.variable
        bits = []
        for e, c in self._terms.items():
            coeff = f"({c})" if (c.a != 0 and c.b != 0) else f"{c}"
            if e == 0:
                bits.append(coeff)
            else:
                bits.append(f"{coeff}*{var}^({e})")
        body = " + ".join(bits) if bits else "0"
        tail = "" if self.trunc is None else f" + O({var}^({self.trunc}))"
        return body + tail
