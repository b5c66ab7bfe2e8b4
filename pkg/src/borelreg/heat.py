"""Two quadrature routes to the heat evolution of analytic initial data.

The formal time series sum_k t^k F0^(2k)(x)/k! is factorially divergent for
non-entire analytic data, yet the problem is solved exactly by either of two
integrals that this module evaluates and cross-checks:

* ``borel_solution``  - integral over the Borel-plane variable, with the
  endpoint singularity removed by the substitution y = w^2;
* ``kernel_solution`` - the classical Gaussian-kernel convolution.

Both carry the same normalization, equal to 2*sqrt(pi) times the unit-mass
heat evolution, so they agree pointwise wherever the data decays enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

from .config import SolverConfig
from .errors import ConfigurationError, DivergenceError

__all__ = ["InitialDatum", "DATUMS", "series_coefficients",
           "kernel_solution", "borel_solution"]

DECAY_CLASSES = ("bounded", "gaussian", "polynomial-times-gaussian")


@dataclass(frozen=True)
class InitialDatum:
    """Real-analytic initial data u0 with an optional derivative evaluator
    and a decay tag used to sanity-check integrability."""

    u0: Callable[[float], float]
    decay_class: str = "bounded"
    du0: Callable[[float], float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.decay_class not in DECAY_CLASSES:
            raise ConfigurationError(
                f"unknown decay class {self.decay_class!r}")


DATUMS = {
    "const": InitialDatum(lambda s: 1.0, "bounded", lambda s: 0.0, "const"),
    "linear": InitialDatum(lambda s: s, "bounded", lambda s: 1.0, "linear"),
    "gaussian": InitialDatum(lambda s: math.exp(-s * s), "gaussian",
                             lambda s: -2 * s * math.exp(-s * s), "gaussian"),
    "poly-gaussian": InitialDatum(lambda s: s * s * math.exp(-s * s),
                                  "polynomial-times-gaussian",
                                  lambda s: (2 * s - 2 * s ** 3) * math.exp(-s * s),
                                  "poly-gaussian"),
}


def series_coefficients(even_derivatives, order: int) -> list:
    """Coefficients F_k = F0^(2k)/k! of the formal time series, k <= order.

    ``even_derivatives[k]`` holds F0^(2k) at the point of interest, so
    2*order derivatives of the data are consumed.
    """
    if len(even_derivatives) < order + 1:
        raise ConfigurationError(
            f"need {order + 1} even-order derivatives, got "
            f"{len(even_derivatives)}")
    return [even_derivatives[k] / math.factorial(k) for k in range(order + 1)]


def _decay_window(edge, start: float, tol: float) -> float:
    """Grow a cutoff until |integrand| at the edge drops below tol; three
    consecutive rises mean the integral diverges."""
    w = start
    level = edge(w)
    rises = 0
    for _ in range(200):
        if math.isfinite(level) and level < tol:
            return w
        nxt = edge(1.3 * w)
        rises = rises + 1 if (not math.isfinite(nxt) or nxt >= level) else 0
        if rises >= 3:
            raise DivergenceError(
                f"integrand grows along the tail (size {level:.3g} at "
                f"cutoff {w:.3g})")
        w *= 1.3
        level = nxt
    raise DivergenceError("integrand tail does not decay below tolerance")


def kernel_solution(u: InitialDatum, t: float, x: float,
                    quad_cfg: SolverConfig | None = None) -> float:
    """Gaussian-kernel form t^(-1/2) * integral u0(s) exp(-(x-s)^2/(4t)) ds."""
    cfg = quad_cfg or SolverConfig()
    if t <= 0:
        raise ConfigurationError("kernel_solution needs t > 0")
    edge = lambda w: max(abs(u.u0(x + w)), abs(u.u0(x - w))) * math.exp(
        -w * w / (4.0 * t))
    w = _decay_window(edge, 2.0 * math.sqrt(t), 0.01 * cfg.quad_tol)
    val, _ = quad(lambda s: u.u0(s) * math.exp(-(x - s) ** 2 / (4.0 * t)),
                  x - w, x + w, epsabs=0.1 * cfg.quad_tol, epsrel=1e-13,
                  limit=300)
    return val / math.sqrt(t)


def borel_solution(u: InitialDatum, t: float, x: float,
                   quad_cfg: SolverConfig | None = None) -> float:
    """Borel-plane form t^(-1/2) * integral_0^inf y^(-1/2)
    [u0(x + 2 sqrt y) + u0(x - 2 sqrt y)] e^(-y/t) dy.

    The substitution y = w^2 removes the endpoint singularity exactly,
    leaving 2 * integral_0^inf [u0(x+2w) + u0(x-2w)] e^(-w^2/t) dw.
    """
    cfg = quad_cfg or SolverConfig()
    if t <= 0:
        raise ConfigurationError("borel_solution needs t > 0")
    edge = lambda w: (abs(u.u0(x + 2.0 * w)) + abs(u.u0(x - 2.0 * w))) \
        * math.exp(-w * w / t)
    half_w = _decay_window(edge, math.sqrt(t), 0.01 * cfg.quad_tol)
    val, _ = quad(
        lambda w: (u.u0(x + 2.0 * w) + u.u0(x - 2.0 * w))
        * math.exp(-w * w / t),
        0.0, half_w, epsabs=0.05 * cfg.quad_tol, epsrel=1e-13, limit=300)
    return 2.0 * val / math.sqrt(t)
