"""Borel transform, Pade continuation, and Laplace-integral summation.

The convention pairs a formal sum  sum_{k>=1} a_k t^k  with the Borel-plane
function  B(p) = sum_{j>=0} a_{j+1} p^j / j!,  so that
laplace_sum(B, t) = integral_0^inf exp(-p/t) B(p) dp  recovers the sum when
it converges.  Any constant term a_0 is the caller's to add back.

Floating point throughout; exact scalars must be converted on entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .config import SolverConfig
from .errors import ContourError, DegeneracyError, DivergenceError, ConfigurationError

__all__ = ["BorelSeries", "PadeApproximant", "LaplaceSum",
           "borel_transform", "pade_approximant", "laplace_sum"]


@dataclass(frozen=True)
class BorelSeries:
    """Coefficients b_j of p^j in the Borel plane, plus a root-test radius
    estimate for the disk of convergence."""

    coeffs: np.ndarray
    radius_estimate: float = field(default=math.inf)

    def __len__(self):
        return len(self.coeffs)

    def __call__(self, p):
        return np.polynomial.polynomial.polyval(p, self.coeffs)


def _radius_estimate(b: np.ndarray) -> float:
    mags = np.abs(b)
    if not mags.any():
        return math.inf
    rates = [mags[j] ** (1.0 / j) for j in range(1, len(mags)) if mags[j] > 0]
    if not rates:
        return math.inf
    tail = rates[len(rates) // 2:]
    worst = max(tail)
    return math.inf if worst == 0 else 1.0 / worst


def borel_transform(a) -> BorelSeries:
    """Termwise factorial division: b_{k-1} = a_k / (k-1)! for k >= 1.

    ``a[i]`` is the coefficient of t^(i+1).
    """
    a = np.asarray(a, dtype=complex)
    b = np.empty_like(a)
    fact = 1.0
    for j in range(len(a)):
        if j >= 2:
            fact *= j
        b[j] = a[j] / fact
    return BorelSeries(coeffs=b, radius_estimate=_radius_estimate(b))


@dataclass(frozen=True)
class PadeApproximant:
    """Rational function P/Q with Q(0) = 1 matching a power series through
    order m + n."""

    num: np.ndarray       # ascending, degree m
    den: np.ndarray       # ascending, degree n_effective, den[0] == 1
    m: int
    n: int                # requested denominator degree
    n_effective: int

    def __call__(self, p):
        pv = np.polynomial.polynomial.polyval
        return pv(p, self.num) / pv(p, self.den)

    def poles(self) -> np.ndarray:
        if self.n_effective == 0:
            return np.empty(0, dtype=complex)
        return np.polynomial.polynomial.polyroots(self.den)

    def expand(self, order: int) -> np.ndarray:
        """Taylor coefficients of P/Q through p^order."""
        c = np.zeros(order + 1, dtype=complex)
        for j in range(order + 1):
            acc = self.num[j] if j < len(self.num) else 0.0
            for i in range(1, min(j, len(self.den) - 1) + 1):
                acc -= self.den[i] * c[j - i]
            c[j] = acc
        return c


def _try_pade(c: np.ndarray, m: int, n: int) -> PadeApproximant | None:
    if n > 0:
        rows = [[c[m + j - i] if m + j - i >= 0 else 0.0 for i in range(1, n + 1)]
                for j in range(1, n + 1)]
        rhs = [-c[m + j] for j in range(1, n + 1)]
        try:
            q = np.linalg.solve(np.array(rows, dtype=complex),
                                np.array(rhs, dtype=complex))
        except np.linalg.LinAlgError:
            return None
        den = np.concatenate(([1.0 + 0j], q))
    else:
        den = np.ones(1, dtype=complex)
    num = np.array([
        c[j] + sum(den[i] * c[j - i] for i in range(1, min(j, n) + 1))
        for j in range(m + 1)
    ], dtype=complex)
    cand = PadeApproximant(num=num, den=den, m=m, n=n, n_effective=n)
    if not (np.isfinite(cand.num).all() and np.isfinite(cand.den).all()):
        return None
    # accept only if the ratio actually reproduces the series through m+n
    back = cand.expand(m + n)
    scale = max(np.abs(c[: m + n + 1]).max(), 1.0)
    if np.abs(back - c[: m + n + 1]).max() > 1e-8 * scale:
        return None
    return cand


def pade_approximant(b, m: int, n: int) -> PadeApproximant:
    """[m/n] Pade approximant of the series; on a singular matching system
    the denominator degree is reduced until the system becomes solvable."""
    c = np.asarray(b.coeffs if isinstance(b, BorelSeries) else b, dtype=complex)
    if m + n + 1 > len(c):
        raise ConfigurationError(
            f"need {m + n + 1} coefficients for an [{m}/{n}] approximant, "
            f"got {len(c)}")
    if not np.isfinite(c).all():
        raise DegeneracyError("non-finite input coefficients")
    for n_try in range(n, -1, -1):
        cand = _try_pade(c, m, n_try)
        if cand is not None:
            return PadeApproximant(num=cand.num, den=cand.den, m=m, n=n,
                                   n_effective=n_try)
    raise DegeneracyError("Pade system singular after maximal reduction")


@dataclass(frozen=True)
class LaplaceSum:
    value: complex
    error_estimate: float

    def __complex__(self):
        return complex(self.value)


def laplace_sum(B, t: complex, quad_cfg: SolverConfig | None = None) -> LaplaceSum:
    """Evaluate integral_0^inf exp(-p/t) B(p) dp along the positive real ray.

    ``B`` is any callable on the ray (a PadeApproximant gets its poles
    checked against the contour).  Raises DivergenceError when the damped
    integrand grows along the tail and ContourError when a pole obstructs
    the ray.
    """
    cfg = quad_cfg or SolverConfig()
    tol = cfg.quad_tol
    lam = 1.0 / complex(t)
    if lam.real <= 0:
        raise ConfigurationError("need Re(1/t) > 0 for the Laplace ray")

    if isinstance(B, PadeApproximant):
        for pole in B.poles():
            if pole.real > 0 and abs(pole.imag) < 1e-9 * (1 + abs(pole.real)):
                raise ContourError(
                    f"Pade pole at p = {pole:.6g} lies on the integration ray",
                    pole=pole)

    # extend the truncation point until the damped integrand is negligible;
    # persistent growth along the way means the sum diverges on this ray
    damped = lambda p: abs(complex(B(p))) * math.exp(-p * lam.real)
    probes = np.linspace(0.0, 1.0, 5)
    scale = max(max(abs(complex(B(p))) for p in probes), 1e-300)
    p_max = max((math.log(scale / tol) + 5.0 * math.log(10.0)) / lam.real, 1.0)
    level = damped(p_max)
    rises = 0
    while level > 0.1 * tol * lam.real:
        nxt = damped(1.4 * p_max)
        rises = rises + 1 if (nxt >= level and nxt > tol) else 0
        if rises >= 3 or not math.isfinite(nxt):
            raise DivergenceError(
                f"integrand does not decay on the ray "
                f"(|integrand|({p_max:.3g}) = {level:.3g} and growing)")
        p_max *= 1.4
        level = nxt

    integrand = lambda p: complex(B(p)) * np.exp(-lam * p)
    value, err = quad(integrand, 0.0, p_max, epsabs=0.1 * tol,
                      epsrel=1e-12, limit=400, complex_func=True)
    # bound the discarded tail using the observed local decay rate
    d1, d2 = damped(p_max), damped(1.05 * p_max)
    if d1 <= 0.0:
        tail_bound = 0.0
    elif 0.0 < d2 < d1:
        mu = math.log(d1 / d2) / (0.05 * p_max)
        tail_bound = 2.0 * d1 / mu
    else:
        tail_bound = 2.0 * d1 / lam.real
    return LaplaceSum(value=value, error_estimate=abs(err) + tail_bound)
