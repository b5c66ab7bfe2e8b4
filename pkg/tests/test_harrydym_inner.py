import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from borelreg import harrydym_inner as hdi
from borelreg import harrydym_outer as hdo
from borelreg.config import SolverConfig
from borelreg.errors import AsymptoticOrderingWarning, ConfigurationError

CFG = SolverConfig()


@pytest.fixture(scope="module")
def hierarchy():
    return hdi.solve_hierarchy(0.0, 50.0, 2.0, 3, CFG, nodes=1200)


@pytest.fixture(scope="module")
def leading():
    return hdi.solve_leading(0.0, 50.0, 2.0, CFG, nodes=600)


# ----------------------------------------------------------------- far field


def test_farfield_coefficients_exact():
    g = hdi.leading_farfield_coefficients(3)
    assert g[0] == 1
    # dominant balance for the correction: -9 beta = 135/8
    assert -9 * g[1] == F(135, 8)
    # third coefficient coincides with the small-time y^(-19/2) rational
    assert g[2] == F(25875, 128)


def test_order_constants_match_outer_series():
    a = hdi.order_constants(2)
    assert a == (F(1), F(-1, 2), F(3, 8))


def test_order_corrections_match_outer_slices():
    # the second far-field amplitudes B_k coincide with the exact
    # small-time coefficients picked out by the tau^k bookkeeping
    profile = hdo.inner_limit_profile(hdo.coefficients(4))
    b = hdi.order_corrections(3)
    assert b[0] == F(-15, 8)
    assert b[1] == profile[1][F(-6)] == F(195, 32)
    assert b[2] == profile[2][F(-7)] == F(-855, 64)
    assert b[3] == profile[3][F(-8)] == F(12495, 512)


def test_farfield_matches_outer_inner_limit():
    # tau^0 and tau^1 slices of the exact small-time series reproduce the
    # far-field data of G_0 and G_1
    profile = hdo.inner_limit_profile(hdo.coefficients(3))
    g = hdi.leading_farfield_coefficients(4)
    assert profile[0] == {F(-1, 2) - F(9, 2) * m: g[m] for m in range(4)}
    assert profile[1][F(-3, 2)] == hdi.order_constants(1)[1]


def test_leading_farfield_correction_richardson(leading):
    # (G_0 sqrt(eta) - 1) eta^(9/2) -> g_1 = -15/8, to 5%
    r = leading.radii
    g0 = leading.values[0, 0]
    for eta in (40.0, 30.0):
        i = np.argmin(np.abs(r - eta))
        beta = (g0[i] * np.sqrt(r[i]) - 1.0) * r[i] ** 4.5
        assert abs(beta - (-15 / 8)) < 0.05 * 15 / 8


# ----------------------------------------------------------------- residuals


def test_hierarchy_residuals_below_tolerance(hierarchy):
    for k in range(hierarchy.orders + 1):
        res = np.abs(hdi.hierarchy_residual(hierarchy, k))
        assert res.max() < 1e-7, f"order {k} residual {res.max():.3g}"


def test_farfield_matching_condition(hierarchy):
    assert abs(hierarchy.values[0, 0, 0] * np.sqrt(50.0) - 1.0) < 0.01


def test_farfield_decay_slopes(hierarchy):
    r = hierarchy.radii
    mask = (r >= 25.0) & (r <= 50.0)
    for k in range(hierarchy.orders + 1):
        mags = np.abs(hierarchy.values[k, 0][mask])
        slope = np.polyfit(np.log(r[mask]), np.log(mags), 1)[0]
        target = -(k + 0.5)
        assert abs(slope - target) < 0.02 * abs(target)


def test_derivative_channels_consistent(hierarchy):
    # 4th-order central differences of stored values against the stored
    # first-derivative channel at interior nodes; points where the channel
    # passes through zero are excluded (relative error is meaningless there)
    r = hierarchy.radii
    h = r[1] - r[0]               # radii descend, so the step is negative
    sel = slice(2, -2)
    for k in range(hierarchy.orders + 1):
        g = hierarchy.values[k, 0]
        fd = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * h)
        chan = hierarchy.values[k, 1][sel]
        mask = np.abs(chan) > 1e-3 * np.abs(chan).max()
        rel = np.abs(fd[mask] - chan[mask]) / np.abs(chan[mask])
        assert rel.max() < 1e-6, f"order {k}: {rel.max():.3g}"


# ----------------------------------------------------------------- assembly


def brute_force_rhs(k, vals, d3):
    """Independent tuple enumeration of the order-k inhomogeneity."""
    n = vals.shape[1]
    out = np.zeros(n, dtype=complex)
    for k1 in range(k):
        for k2 in range(k):
            for k3 in range(k):
                if k1 + k2 + k3 == k - 1:
                    out += 0.5 * vals[k1] * vals[k2] * vals[k3]
                for k4 in range(k):
                    if k1 + k2 + k3 + k4 == k:
                        out -= vals[k1] * vals[k2] * vals[k3] * d3[k4]
    return out


def test_rhs_order_one_is_half_cube(hierarchy):
    vals = hierarchy.values[:, 0, :]
    d3 = hierarchy.values[:, 3, :]
    r1 = hdi.assemble_rhs(1, vals, d3)
    assert np.allclose(r1, 0.5 * vals[0] ** 3, rtol=1e-13, atol=0)


def test_rhs_brute_force_oracle(hierarchy):
    vals = hierarchy.values[:, 0, :]
    d3 = hierarchy.values[:, 3, :]
    for k in (1, 2, 3):
        structured = hdi.assemble_rhs(k, vals, d3)
        brute = brute_force_rhs(k, vals, d3)
        scale = np.abs(brute).max()
        assert np.abs(structured - brute).max() < 1e-13 * scale


def test_rhs_order_two_closed_form(hierarchy):
    # R_2 = (3/2) G0^2 G1 - 3 G0^2 G1 G1''' - 3 G0 G1^2 G0'''
    g0, g1 = hierarchy.values[0, 0], hierarchy.values[1, 0]
    d30, d31 = hierarchy.values[0, 3], hierarchy.values[1, 3]
    expected = (1.5 * g0 ** 2 * g1
                - 3.0 * g0 ** 2 * g1 * d31
                - 3.0 * g0 * g1 ** 2 * d30)
    r2 = hdi.assemble_rhs(2, hierarchy.values[:, 0, :],
                          hierarchy.values[:, 3, :])
    assert np.allclose(r2, expected, rtol=1e-12)


def test_rhs_zero_lower_orders():
    vals = np.zeros((2, 5), dtype=complex)
    d3 = np.zeros((2, 5), dtype=complex)
    assert not hdi.assemble_rhs(2, vals, d3).any()


def test_solve_order_agrees_with_joint(hierarchy, leading):
    vals = leading.values[:, 0, :]
    d3 = leading.values[:, 3, :]
    r1 = hdi.assemble_rhs(1, vals, d3)
    g1 = hdi.solve_order(1, leading, r1, CFG)
    joint = hierarchy.values[1, 0]
    rel = np.abs(g1[0] - joint) / np.abs(joint)
    assert rel.max() < 1e-5


# ----------------------------------------------------------------- evaluation


def test_inner_eval_tau_zero_is_leading(hierarchy):
    v = hdi.inner_eval(hierarchy, 10.0, 0.0)
    assert v.value == pytest.approx(hierarchy.interpolate(0, 10.0), rel=1e-12)


def test_inner_eval_telescoping(hierarchy):
    eta, tau = 12.0, 0.05
    full = hdi.inner_eval(hierarchy, eta, tau, orders=3)
    partial = hdi.inner_eval(hierarchy, eta, tau, orders=2)
    last = hierarchy.interpolate(3, eta) * tau ** 3
    assert full.value - partial.value == pytest.approx(last, rel=1e-12)


def test_inner_eval_warns_outside_radius(hierarchy):
    with pytest.warns(AsymptoticOrderingWarning):
        hdi.inner_eval(hierarchy, 2.5, 5.0)


def test_inner_eval_rejects_off_ray_points(hierarchy):
    with pytest.raises(ConfigurationError):
        hdi.inner_eval(hierarchy, 10.0 * np.exp(0.3j), 0.01)
    with pytest.raises(ConfigurationError):
        hdi.inner_eval(hierarchy, 80.0, 0.01)


def test_inner_residual_hand_value():
    # G = eta^(-1/2) at tau = 0: the linear terms cancel exactly and
    # -G^3 G''' = (15/8) eta^(-5) survives
    G = lambda e, t: complex(e) ** -0.5
    for eta in (3.0, 5.0):
        r = hdi.inner_residual(G, eta, 0.0, h_eta=0.01)
        expected = 1.875 * complex(eta) ** -5.0
        assert r == pytest.approx(expected, rel=1e-3)


def test_inner_residual_zero_function():
    assert hdi.inner_residual(lambda e, t: 0.0, 4.0, 0.3) == 0


def test_inner_residual_order(hierarchy):
    # residual of the K-term expansion is O(tau^(K+1)): log-log slope K+1
    i = np.argmin(np.abs(hierarchy.radii - 4.0))
    eta = float(hierarchy.radii[i])
    taus = np.array([0.4, 0.3, 0.2, 0.12, 0.07, 0.04])
    res = np.array([abs(hdi.inner_residual(hierarchy, eta, t)) for t in taus])
    slope = np.polyfit(np.log(taus), np.log(res), 1)[0]
    assert abs(slope - 4.0) < 0.25


# ----------------------------------------------------------------- matching


def test_matches_outer_evaluation_in_overlap(hierarchy):
    outer = hdo.coefficients(4)
    t = 1e-3
    tau = t ** (7.0 / 9.0)
    for eta in (20.0, 30.0, 45.0):
        x = eta * t ** (2.0 / 9.0) + t
        scaled = hdo.evaluate(x, t, 3, outer).value * t ** (1.0 / 9.0)
        inner = hdi.inner_eval(hierarchy, eta, tau).value
        assert abs(scaled - inner) / abs(scaled) < 1e-3


def test_order_one_matches_outer_tau_slice(hierarchy):
    # far field of the numerical G_1 against the exact tau^1 slice of the
    # small-time series: -eta^(-3/2)/2 + (195/32) eta^(-6)
    profile = hdo.inner_limit_profile(hdo.coefficients(2))
    for eta in (10.0, 20.0):
        exact = sum(float(c) * eta ** float(e)
                    for e, c in profile[1].items())
        num = hierarchy.interpolate(1, eta)
        assert abs(num - exact) / abs(exact) < 1e-2


# ----------------------------------------------------------------- paths


def test_path_continuation_matches_direct(leading):
    etas, vals = hdi.continue_on_path([50.0, 30.0, 10.0], 0, CFG,
                                      nodes_last_leg=81)
    for eta, g in zip(etas[::20], vals[0, 0, ::20]):
        direct = leading.interpolate(0, eta)
        assert abs(g - direct) / abs(direct) < 1e-7


def test_wedge_enforced():
    with pytest.raises(ConfigurationError):
        hdi.solve_hierarchy(-3.0, 50.0, 2.0, 0, CFG, nodes=40)
    with pytest.raises(ConfigurationError):
        hdi.continue_on_path([50.0 * np.exp(-1.4j), 10.0], 0, CFG)
