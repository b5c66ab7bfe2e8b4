"""Inner-region hierarchy for the rescaled Harry Dym problem.

On the scale where the small-time expansion loses its ordering, the
substitution eta = (x - t) t^(-2/9), tau = t^(7/9), H = t^(-1/9) G(eta, tau)
turns the PDE into

    -G/9 - (2/9) eta G_eta + (7/9) tau G_tau + (tau/2) G^3 - G^3 G_eee = 0

whose solution expands as G = sum_k tau^k G_k(eta).  Order tau^0 gives the
nonlinear leading equation

    G_0 + 2 eta G_0' + 9 G_0^3 G_0''' = 0,

and each higher order satisfies a linear third-order equation whose
inhomogeneity collects products of lower orders.  Writing [G^3]_m for the
tau^m coefficient of the cube of the truncated expansion, the order-k
equation used here (and reproduced by the tau^k coefficient of the full
equation) is

    G_0^3 G_k''' + (2/9) eta G_k' - ((7k-1)/9) G_k
        = (1/2) [G^3]_{k-1} - sum_{l=0}^{k-1} [G^3]_{k-l} G_l'''.

All orders are integrated jointly, inward from a far-field initialization
G_0 ~ eta^(-1/2) (1 + g_1 eta^(-9/2) + ...), G_k ~ A_k eta^(-k-1/2), along a
ray (or an arbitrary polyline path) in the complex eta plane.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .config import SolverConfig
from .errors import (
    AsymptoticOrderingWarning,
    ConfigurationError,
    SingularityProximity,
)

__all__ = [
    "InnerSolution", "InnerValue",
    "leading_farfield_coefficients", "order_constants",
    "farfield_state", "solve_hierarchy", "solve_leading", "continue_on_path",
    "assemble_rhs", "solve_order", "inner_eval", "inner_residual",
    "hierarchy_residual",
]

VALIDITY_WEDGE = (-2.0 * math.pi / 9.0, 2.0 * math.pi / 9.0)


# --------------------------------------------------------------- far field


@lru_cache(maxsize=None)
def leading_farfield_coefficients(count: int) -> tuple:
    """Exact coefficients g_m of G_0 ~ sum_m g_m eta^(-1/2 - 9m/2), g_0 = 1.

    Substituting the power series into the leading equation pushes the
    nonlinear term one slot up, giving the explicit recurrence
    g_{m+1} = sum_{a+b+c+d=m} g_a g_b g_c g_d e_d (e_d-1)(e_d-2) / (m+1)
    with e_d = -1/2 - 9d/2.
    """
    g = [Fraction(1)]
    for m in range(count - 1):
        total = Fraction(0)
        for a in range(m + 1):
            for b in range(m + 1 - a):
                for c in range(m + 1 - a - b):
                    d = m - a - b - c
                    e = Fraction(-1, 2) - Fraction(9, 2) * d
                    total += g[a] * g[b] * g[c] * g[d] * e * (e - 1) * (e - 2)
        g.append(total / (m + 1))
    return tuple(g)


@lru_cache(maxsize=None)
def order_constants(k_max: int) -> tuple:
    """Far-field amplitudes A_k with G_k ~ A_k eta^(-k-1/2).

    Balancing the order-k equation at eta -> infinity leaves
    -k A_k = (1/2) sum_{k1+k2+k3=k-1} A_{k1} A_{k2} A_{k3}; the four-factor
    products only enter at relative order eta^(-9/2).  A_1 = -1/2 and
    A_2 = 3/8 reproduce the corresponding small-time coefficients.
    """
    a = [Fraction(1)]
    for k in range(1, k_max + 1):
        s = Fraction(0)
        for k1 in range(k):
            for k2 in range(k - k1):
                s += a[k1] * a[k2] * a[k - 1 - k1 - k2]
        a.append(-s / (2 * k))
    return tuple(a)


def _p3(e: Fraction) -> Fraction:
    return e * (e - 1) * (e - 2)


@lru_cache(maxsize=None)
def order_corrections(k_max: int) -> tuple:
    """Second far-field amplitudes B_k with
    G_k ~ A_k eta^(-k-1/2) + B_k eta^(-k-5).

    Balancing the order-k equation one slot deeper (eta^(-k-5)) gives

        (k+1) B_k = A_k (P3(-k-1/2) - 45/8)
                    - (3/2) sum_{k1+k2+k3=k-1} B_{k1} A_{k2} A_{k3}
                    + sum_{l<k} [AAA]_{k-l}^{lower} A_l P3(-l-1/2)

    with P3(e) = e(e-1)(e-2) and B_0 = -15/8 the leading-order correction.
    B_1 = 195/32, B_2 = -855/64, B_3 = 12495/512 all match the
    corresponding slices of the exact small-time series.
    """
    a = order_constants(k_max)
    s_full = [
        sum(a[k1] * a[k2] * a[m - k1 - k2]
            for k1 in range(m + 1) for k2 in range(m + 1 - k1))
        for m in range(k_max + 1)
    ]
    b = [Fraction(-15, 8)]
    for k in range(1, k_max + 1):
        baa = sum(b[k1] * a[k2] * a[k - 1 - k1 - k2]
                  for k1 in range(k) for k2 in range(k - k1))
        four = (s_full[k] - 3 * a[k]) * Fraction(-15, 8)
        for l in range(1, k):
            four += s_full[k - l] * a[l] * _p3(Fraction(-2 * l - 1, 2))
        b.append((a[k] * (_p3(Fraction(-2 * k - 1, 2)) - Fraction(45, 8))
                  - Fraction(3, 2) * baa + four) / (k + 1))
    return tuple(b)


def _power_state(eta: complex, exponent: float, amplitude: complex):
    """(u, u', u'', u''') for amplitude * eta**exponent, principal branch."""
    le = cmath.log(eta)
    u = amplitude * cmath.exp(exponent * le)
    out = [u]
    fac = 1.0
    for j in range(3):
        fac *= exponent - j
        out.append(fac * u / eta ** (j + 1))
    return out


def farfield_state(k: int, eta: complex, n_terms: int = 3) -> np.ndarray:
    """Far-field values (G_k, G_k', G_k'', G_k''') at ``eta``.

    Order zero uses ``n_terms`` of the algebraic series; higher orders use
    their two balanced amplitudes A_k and B_k.
    """
    if k == 0:
        g = leading_farfield_coefficients(n_terms)
        state = np.zeros(4, dtype=complex)
        for m, gm in enumerate(g):
            state += _power_state(eta, -0.5 - 4.5 * m, float(gm))
        return state
    amp = float(order_constants(k)[k])
    corr = float(order_corrections(k)[k])
    state = np.asarray(_power_state(eta, -(k + 0.5), amp), dtype=complex)
    state += _power_state(eta, -(k + 5.0), corr)
    return state


def farfield_sum(eta: complex, max_terms: int = 24):
    """Optimally truncated far-field sum of G_0 and its smallest term.

    Terms are added while they keep shrinking; the first omitted term's
    magnitude is the truncation floor of the asymptotic series at ``eta``.
    """
    g = leading_farfield_coefficients(max_terms)
    total = 0j
    prev = math.inf
    floor = math.inf
    for m, gm in enumerate(g):
        term = float(gm) * cmath.exp((-0.5 - 4.5 * m) * cmath.log(eta))
        if abs(term) >= prev:
            floor = abs(term)
            break
        total += term
        prev = abs(term)
    else:
        floor = prev
    return total, floor


# --------------------------------------------------------------- hierarchy ODE


def _cube_coefficients(vals: np.ndarray, k_max: int) -> np.ndarray:
    """tau-coefficients [G^3]_m, m <= k_max, of (sum_k tau^k vals[k])^3."""
    n = len(vals)
    sq = np.zeros(k_max + 1, dtype=complex)
    for i in range(min(n, k_max + 1)):
        for j in range(min(n, k_max + 1 - i)):
            sq[i + j] += vals[i] * vals[j]
    cube = np.zeros(k_max + 1, dtype=complex)
    for i in range(min(n, k_max + 1)):
        for j in range(k_max + 1 - i):
            cube[i + j] += vals[i] * sq[j]
    return cube


def _third_derivatives(eta: complex, G: np.ndarray, G1: np.ndarray) -> np.ndarray:
    """G_k''' for every order, from the hierarchy equations."""
    K = len(G) - 1
    cube = _cube_coefficients(G, K)
    d3 = np.empty(K + 1, dtype=complex)
    d3[0] = -(G[0] + 2.0 * eta * G1[0]) / (9.0 * cube[0])
    for k in range(1, K + 1):
        rhs = 0.5 * cube[k - 1]
        for l in range(k):
            rhs -= cube[k - l] * d3[l]
        rhs -= (2.0 / 9.0) * eta * G1[k]
        rhs += ((7.0 * k - 1.0) / 9.0) * G[k]
        d3[k] = rhs / cube[0]
    return d3


def _hierarchy_rhs(eta: complex, state: np.ndarray, direction: complex,
                   K: int) -> np.ndarray:
    s = state.reshape(K + 1, 3)
    d3 = _third_derivatives(eta, s[:, 0], s[:, 1])
    out = np.empty_like(s)
    out[:, 0] = s[:, 1]
    out[:, 1] = s[:, 2]
    out[:, 2] = d3
    return (direction * out).reshape(-1)


@dataclass(frozen=True)
class InnerSolution:
    """Hierarchy orders sampled along a ray, with derivative channels."""

    ray_angle: float
    radii: np.ndarray                  # descending |eta|
    values: np.ndarray                 # shape (K+1, 4, nodes): G, G', G'', G'''
    blowup_eta: complex | None = None
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def orders(self) -> int:
        return self.values.shape[0] - 1

    @property
    def eta(self) -> np.ndarray:
        return self.radii * cmath.exp(1j * self.ray_angle)

    def channel(self, k: int, deriv: int = 0) -> np.ndarray:
        return self.values[k, deriv]

    def _spline(self, k: int, deriv: int):
        key = (k, deriv)
        if key not in self._splines:
            r = self.radii[::-1]
            self._splines[key] = CubicSpline(r, self.values[k, deriv][::-1])
        return self._splines[key]

    def interpolate(self, k: int, eta: complex, deriv: int = 0) -> complex:
        r = abs(eta)
        if not (self.radii[-1] - 1e-9 <= r <= self.radii[0] + 1e-9):
            raise ConfigurationError(
                f"|eta| = {r:.4g} outside the stored range "
                f"[{self.radii[-1]:.4g}, {self.radii[0]:.4g}]")
        ang = cmath.phase(eta * cmath.exp(-1j * self.ray_angle))
        if abs(ang) > 1e-6:
            raise ConfigurationError("eta is not on the stored ray")
        return complex(self._spline(k, deriv)(r))

    def eval(self, eta: complex, tau: float, orders: int | None = None):
        return inner_eval(self, eta, tau, orders)


@dataclass(frozen=True)
class InnerValue:
    value: complex
    error_proxy: float
    terms: tuple


def _check_wedge(angle: float):
    if not (VALIDITY_WEDGE[0] < angle < VALIDITY_WEDGE[1]):
        raise ConfigurationError(
            f"ray angle {angle:.4f} outside the far-field validity wedge "
            f"({VALIDITY_WEDGE[0]:.4f}, {VALIDITY_WEDGE[1]:.4f}); start "
            "inside it and continue along a path instead")


def _integrate(eta_start: complex, eta_end: complex, state: np.ndarray,
               K: int, cfg: SolverConfig, t_eval=None):
    """Integrate the joint system along the straight segment start -> end.

    ``t_eval`` holds arc-length offsets from the start.  Returns (offsets,
    states, status, offset_reached); status -1 flags an integration
    breakdown (singularity proximity).
    """
    span = abs(eta_end - eta_start)
    direction = (eta_end - eta_start) / span
    big = cfg.blowup_threshold

    def rhs(sigma, y):
        return _hierarchy_rhs(eta_start + sigma * direction, y, direction, K)

    def blowup(sigma, y):
        s = y.reshape(K + 1, 3)
        return big - max(abs(s[0, 0]), abs(s[0, 1]))
    blowup.terminal = True

    sol = solve_ivp(rhs, (0.0, span), state, method=cfg.ode_method,
                    rtol=cfg.ode_rel_tol, atol=cfg.ode_abs_tol,
                    t_eval=t_eval, events=blowup, dense_output=False)
    return sol


def solve_hierarchy(ray_angle: float, eta_max: float, eta_min: float,
                    orders: int, cfg: SolverConfig | None = None,
                    nodes: int | None = None) -> InnerSolution:
    """Solve G_0 ... G_orders jointly on the ray, inward from eta_max.

    The far-field data seeds the state at eta_max e^{i angle}; values and
    the first three derivatives are stored on ``nodes`` radii.  A blow-up of
    the leading order terminates the sweep and records its location; a
    stalled integrator raises SingularityProximity with the partial data.
    """
    cfg = cfg or SolverConfig()
    nodes = nodes or cfg.eta_nodes
    _check_wedge(ray_angle)
    if not eta_max > eta_min > 0:
        raise ConfigurationError("need eta_max > eta_min > 0")
    phase = cmath.exp(1j * ray_angle)
    radii = np.linspace(eta_max, eta_min, nodes)
    state = np.concatenate([
        farfield_state(k, eta_max * phase, cfg.farfield_terms)[:3]
        for k in range(orders + 1)
    ])
    sol = _integrate(eta_max * phase, eta_min * phase, state, orders, cfg,
                     t_eval=eta_max - radii)
    reached = eta_max - sol.t
    blowup_eta = None
    if sol.status == 1:
        blowup_eta = (eta_max - sol.t_events[0][0]) * phase
    elif sol.status < 0:
        last = (eta_max - sol.t[-1]) * phase if len(sol.t) else eta_max * phase
        raise SingularityProximity(
            f"integration stalled near eta = {last:.6g}", last_eta=last,
            partial=None)
    vals = np.empty((orders + 1, 4, len(sol.t)), dtype=complex)
    for i in range(len(sol.t)):
        s = sol.y[:, i].reshape(orders + 1, 3)
        d3 = _third_derivatives(reached[i] * phase, s[:, 0], s[:, 1])
        vals[:, :3, i] = s
        vals[:, 3, i] = d3
    return InnerSolution(ray_angle=ray_angle, radii=reached, values=vals,
                         blowup_eta=blowup_eta)


def solve_leading(ray_angle: float, eta_max: float, eta_min: float,
                  cfg: SolverConfig | None = None,
                  nodes: int | None = None) -> InnerSolution:
    """Leading order only (the nonlinear third-order equation)."""
    return solve_hierarchy(ray_angle, eta_max, eta_min, 0, cfg, nodes)


def continue_on_path(waypoints, orders: int, cfg: SolverConfig | None = None,
                     nodes_last_leg: int | None = None,
                     farfield_terms: int | None = None):
    """Far-field init at waypoints[0], then integrate leg by leg.

    Returns (radii, values) sampled on the last leg (by |eta| when the leg
    is radial, else by arc offset).  The first waypoint must lie inside the
    far-field validity wedge; subsequent legs may leave it.  Integration
    breakdown raises SingularityProximity carrying whatever was collected.
    """
    cfg = cfg or SolverConfig()
    pts = [complex(w) for w in waypoints]
    if len(pts) < 2:
        raise ConfigurationError("need at least two waypoints")
    _check_wedge(cmath.phase(pts[0]))
    n_far = farfield_terms or cfg.farfield_terms
    state = np.concatenate([
        farfield_state(k, pts[0], n_far)[:3] for k in range(orders + 1)
    ])
    for a, b in zip(pts[:-2], pts[1:-1]):
        sol = _integrate(a, b, state, orders, cfg)
        if sol.status != 0:
            last = a + sol.t[-1] * (b - a) / abs(b - a) if len(sol.t) else a
            raise SingularityProximity(
                f"integration stalled near eta = {last:.6g}", last_eta=last)
        state = sol.y[:, -1]
    a, b = pts[-2], pts[-1]
    n_nodes = nodes_last_leg or cfg.eta_nodes
    offsets = np.linspace(0.0, abs(b - a), n_nodes)
    sol = _integrate(a, b, state, orders, cfg, t_eval=offsets)
    direction = (b - a) / abs(b - a)
    etas = a + sol.t * direction
    vals = np.empty((orders + 1, 4, len(sol.t)), dtype=complex)
    for i in range(len(sol.t)):
        s = sol.y[:, i].reshape(orders + 1, 3)
        vals[:, :3, i] = s
        vals[:, 3, i] = _third_derivatives(etas[i], s[:, 0], s[:, 1])
    if sol.status < 0:
        last = etas[-1] if len(sol.t) else a
        raise SingularityProximity(
            f"integration stalled near eta = {last:.6g}", last_eta=last,
            partial=(etas, vals))
    return etas, vals


# --------------------------------------------------------------- assembly


def assemble_rhs(k: int, values: np.ndarray, third_derivs: np.ndarray
                 ) -> np.ndarray:
    """Inhomogeneity of the order-k equation from orders 0 .. k-1.

    ``values[l]`` and ``third_derivs[l]`` sample G_l and G_l''' on a common
    grid.  Nodewise:

        R_k = (1/2) sum_{k1+k2+k3=k-1} G G G
              - sum_{k_j < k, sum = k} G_{k1} G_{k2} G_{k3} G_{k4}'''
    """
    if k < 1:
        raise ConfigurationError("assemble_rhs needs k >= 1")
    values = np.asarray(values, dtype=complex)
    third_derivs = np.asarray(third_derivs, dtype=complex)
    if len(values) < k or len(third_derivs) < k:
        raise ConfigurationError(
            f"need orders 0..{k - 1} with derivatives to assemble order {k}")
    lower = values[:k]
    n = lower.shape[1]
    cube = np.zeros((k + 1, n), dtype=complex)
    sq = np.zeros((k + 1, n), dtype=complex)
    for i in range(min(k, k + 1)):
        for j in range(min(k, k + 1 - i)):
            sq[i + j] += lower[i] * lower[j]
    for i in range(min(k, k + 1)):
        for j in range(k + 1 - i):
            cube[i + j] += lower[i] * sq[j]
    out = 0.5 * cube[k - 1]
    for l in range(k):
        out = out - cube[k - l] * third_derivs[l]
    return out


def solve_order(k: int, leading: InnerSolution, rhs_values: np.ndarray,
                cfg: SolverConfig | None = None) -> np.ndarray:
    """Integrate the linear order-k equation alone, interpolating G_0 and
    the assembled inhomogeneity from their samples.

    Complements the joint solver (which avoids interpolation); agreement of
    the two is a consistency check.  Returns channels (4, nodes) on the
    grid of ``leading``.
    """
    cfg = cfg or SolverConfig()
    if k < 1:
        raise ConfigurationError("solve_order needs k >= 1")
    g0 = leading.channel(0, 0)
    if np.abs(g0).min() < 1e-12:
        raise SingularityProximity("leading order vanishes on the grid",
                                   last_eta=None)
    r_asc = leading.radii[::-1]
    sp_g0 = CubicSpline(r_asc, g0[::-1])
    sp_d3 = CubicSpline(r_asc, leading.channel(0, 3)[::-1])
    sp_rk = CubicSpline(r_asc, np.asarray(rhs_values, dtype=complex)[::-1])
    phase = cmath.exp(1j * leading.ray_angle)

    def rhs(sigma, y):
        r = leading.radii[0] - sigma
        eta = r * phase
        G0 = complex(sp_g0(r))
        c0 = G0 ** 3
        d30 = complex(sp_d3(r))
        u, u1, u2 = y
        u3 = (complex(sp_rk(r)) - 3.0 * G0 ** 2 * d30 * u
              - (2.0 / 9.0) * eta * u1
              + ((7.0 * k - 1.0) / 9.0) * u) / c0
        return -phase * np.array([u1, u2, u3])

    y0 = farfield_state(k, leading.radii[0] * phase)[:3]
    sol = solve_ivp(rhs, (0.0, leading.radii[0] - leading.radii[-1]), y0,
                    method=cfg.ode_method, rtol=cfg.ode_rel_tol,
                    atol=cfg.ode_abs_tol,
                    t_eval=leading.radii[0] - leading.radii)
    if sol.status != 0:
        raise SingularityProximity("order-k integration stalled",
                                   last_eta=None)
    out = np.empty((4, len(sol.t)), dtype=complex)
    out[:3] = sol.y
    for i, r in enumerate(leading.radii):
        eta = r * phase
        G0 = complex(sp_g0(r))
        out[3, i] = (complex(sp_rk(r))
                     - 3.0 * G0 ** 2 * complex(sp_d3(r)) * out[0, i]
                     - (2.0 / 9.0) * eta * out[1, i]
                     + ((7.0 * k - 1.0) / 9.0) * out[0, i]) / G0 ** 3
    return out


# --------------------------------------------------------------- evaluation


def inner_eval(sol: InnerSolution, eta: complex, tau: float,
               orders: int | None = None) -> InnerValue:
    """sum_{k<=K} tau^k G_k(eta) with cubic interpolation along the ray.

    Warns (AsymptoticOrderingWarning) when the term magnitudes stop
    decreasing: the expansion's radius shrinks with eta and the requested
    point is outside the reliable region.
    """
    K = sol.orders if orders is None else min(orders, sol.orders)
    terms = [sol.interpolate(k, eta) * tau ** k for k in range(K + 1)]
    mags = [abs(v) for v in terms]
    for n in range(K):
        if mags[n] > 0 and mags[n + 1] >= mags[n]:
            warnings.warn(
                f"expansion terms stop decreasing at order {n + 1} for "
                f"eta = {eta:.4g}, tau = {tau:.4g}",
                AsymptoticOrderingWarning, stacklevel=2)
            break
    if K >= 1 and mags[K - 1] > 0:
        proxy = mags[K] ** 2 / mags[K - 1]
    else:
        proxy = mags[0] * tau
    return InnerValue(value=sum(terms), error_proxy=proxy, terms=tuple(terms))


def hierarchy_residual(sol: InnerSolution, k: int) -> np.ndarray:
    """Order-k equation residual per node, from the stored channels."""
    G = sol.values[:, 0, :]
    D1 = sol.values[:, 1, :]
    D3 = sol.values[:, 3, :]
    eta = sol.eta
    K = sol.orders
    n = G.shape[1]
    cube = np.zeros((K + 1, n), dtype=complex)
    sq = np.zeros((K + 1, n), dtype=complex)
    for i in range(K + 1):
        for j in range(K + 1 - i):
            sq[i + j] += G[i] * G[j]
    for i in range(K + 1):
        for j in range(K + 1 - i):
            cube[i + j] += G[i] * sq[j]
    if k == 0:
        return G[0] + 2.0 * eta * D1[0] + 9.0 * cube[0] * D3[0]
    res = cube[0] * D3[k] + (2.0 / 9.0) * eta * D1[k] \
        - ((7.0 * k - 1.0) / 9.0) * G[k] - 0.5 * cube[k - 1]
    for l in range(k):
        res = res + cube[k - l] * D3[l]
    return res


def inner_residual(G, eta: complex, tau: float, h_eta: float | None = None,
                   h_tau: float | None = None) -> complex:
    """Residual of the full rescaled equation at (eta, tau):

        -G/9 - (2/9) eta G_eta + (7/9) tau G_tau + (tau/2) G^3 - G^3 G_eee.

    ``G`` is an InnerSolution (derivative channels are used directly) or a
    callable G(eta, tau) differentiated by finite differences along the
    direction of eta.
    """
    if isinstance(G, InnerSolution):
        K = G.orders
        val = de = d3e = dtau = 0j
        for k in range(K + 1):
            tk = tau ** k
            val += tk * G.interpolate(k, eta, 0)
            de += tk * G.interpolate(k, eta, 1)
            d3e += tk * G.interpolate(k, eta, 3)
            if k >= 1:
                dtau += k * tau ** (k - 1) * G.interpolate(k, eta, 0)
    else:
        u = eta / abs(eta) if eta != 0 else 1.0
        h = h_eta or 1e-2 * max(1.0, abs(eta) ** 0.5)
        ht = h_tau or max(1e-4, 1e-2 * tau)
        f = lambda s: G(eta + s * h * u, tau)
        val = G(eta, tau)
        de = (f(1) - f(-1)) / (2.0 * h * u)
        d3e = (f(2) - 2.0 * f(1) + 2.0 * f(-1) - f(-2)) / (2.0 * (h * u) ** 3)
        dtau = (G(eta, tau + ht) - G(eta, tau - ht)) / (2.0 * ht)
    return (-val / 9.0 - (2.0 / 9.0) * eta * de + (7.0 / 9.0) * tau * dtau
            + 0.5 * tau * val ** 3 - val ** 3 * d3e)
