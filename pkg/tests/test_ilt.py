import numpy as np
import pytest

from borelreg.config import SolverConfig
from borelreg.errors import (
    ConfigurationError,
    NoContractionError,
    TruncationError,
)
from borelreg.ilt import (
    GridFunction,
    NonlinearitySpec,
    laplace_convolve,
    laplace_evaluate,
    picard_solve,
)


def grid_fn(fn, p_max=2.0, m=200):
    return GridFunction.from_callable(fn, p_max, m)


# -------------------------------------------------------------- convolution


def test_convolve_constants():
    one = GridFunction.constant(1.0, 2.0, 100)
    conv = laplace_convolve(one, one)
    assert np.allclose(conv.values, one.grid, atol=1e-14)   # exactly p


def test_convolve_linear_beta_integral():
    f = grid_fn(lambda p: p, m=400)
    conv = laplace_convolve(f, f)
    exact = f.grid ** 3 / 6.0
    # trapezoid error for p*p is exactly -p h^2 / 6
    assert np.abs(conv.values - exact).max() <= f.p_max * f.spacing ** 2 / 6 * 1.01


def test_convolve_grid_mismatch():
    a = GridFunction.constant(1.0, 2.0, 100)
    b = GridFunction.constant(1.0, 2.0, 101)
    with pytest.raises(ConfigurationError):
        laplace_convolve(a, b)


def test_convolve_commutativity_randomized():
    rng = np.random.default_rng(20260810)
    for _ in range(1000):
        m = int(rng.integers(16, 64))
        p_max = float(rng.uniform(0.5, 4.0))
        fv = rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1)
        gv = rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1)
        f, g = GridFunction(p_max, fv), GridFunction(p_max, gv)
        a, b = laplace_convolve(f, g), laplace_convolve(g, f)
        scale = max(1.0, np.abs(a.values).max())
        assert np.abs(a.values - b.values).max() <= 1e-14 * scale


def test_convolve_associativity_randomized():
    # the trapezoid endpoint correction leaves a defect proportional to the
    # origin values, so associativity is exact on the natural class of
    # convolution factors vanishing at p = 0
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = int(rng.integers(24, 80))
        vals = rng.normal(size=(3, m + 1)) + 1j * rng.normal(size=(3, m + 1))
        vals[:, 0] = 0.0
        f, g, k = (GridFunction(2.0, v) for v in vals)
        lhs = laplace_convolve(laplace_convolve(f, g), k)
        rhs = laplace_convolve(f, laplace_convolve(g, k))
        scale = max(1.0, np.abs(lhs.values).max())
        assert np.abs(lhs.values - rhs.values).max() <= 1e-12 * scale


# -------------------------------------------------------------- picard


def test_linear_case_is_pure_integrating_factor():
    f_init = GridFunction.constant(1.0, 3.0, 96)
    res = picard_solve(f_init, NonlinearitySpec(), t_final=0.5, steps=10,
                       tol=1e-12)
    p = f_init.grid
    for i, t in enumerate(res.times):
        assert np.abs(res.values[i] - np.exp(-p ** 3 * t)).max() < 1e-12


def test_quadratic_nonlinearity_contracts():
    f_init = GridFunction.constant(1.0, 3.0, 64)
    kern = GridFunction.constant(0.1, 3.0, 64)
    spec = NonlinearitySpec(terms={(0, 1): kern})
    res = picard_solve(f_init, spec, t_final=0.1, steps=8, tol=1e-13)
    assert res.iterations >= 3
    assert all(r < 1.0 for r in res.contraction_ratios)
    # geometric decay of the update norms
    drops = [b / a for a, b in zip(res.update_norms, res.update_norms[1:])
             if a > 1e-15]
    assert max(drops) < 0.2


def test_fixed_point_satisfies_equation():
    f_init = GridFunction.constant(1.0, 3.0, 64)
    kern = GridFunction.constant(0.1, 3.0, 64)
    spec = NonlinearitySpec(terms={(0, 1): kern, (2, 0): kern})
    tol = 1e-11
    res = picard_solve(f_init, spec, t_final=0.1, steps=8, tol=tol)
    again = picard_solve(f_init, spec, t_final=0.1, steps=8, tol=tol * 0.99)
    assert np.abs(res.values - again.values).max() < 2 * tol


def test_grid_refinement_second_order():
    def fixed_point(m):
        f_init = GridFunction.constant(1.0, 3.0, m)
        kern = GridFunction.constant(0.1, 3.0, m)
        spec = NonlinearitySpec(terms={(0, 1): kern})
        res = picard_solve(f_init, spec, t_final=0.1, steps=8, tol=1e-13)
        return res.values[-1]

    f1, f2, f4 = fixed_point(32), fixed_point(64), fixed_point(128)
    c1 = np.abs(f1 - f4[::4]).max()
    c2 = np.abs(f2[::2] - f4[::2][::1][: len(f2)] if False else f2 - f4[::2]).max()
    assert 3.0 < c1 / c2 < 5.5


def test_forcing_enters_linear_solution():
    # with B = 0 and constant R: F = e^{-p^3 t} + (1 - e^{-p^3 t})/p^3 * R
    m, p_max = 128, 2.0
    f_init = GridFunction.constant(1.0, p_max, m)
    forcing = GridFunction.constant(0.5, p_max, m)
    res = picard_solve(f_init, NonlinearitySpec(forcing=forcing),
                       t_final=0.4, steps=64, tol=1e-12)
    p = f_init.grid[1:]
    t = res.times[-1]
    exact = np.exp(-p ** 3 * t) + 0.5 * (1 - np.exp(-p ** 3 * t)) / p ** 3
    assert np.abs(res.values[-1][1:] - exact).max() < 1e-4   # O(dt^2) in time


def test_no_contraction_reported():
    f_init = GridFunction.constant(5.0, 6.0, 64)
    kern = GridFunction.constant(1.0, 6.0, 64)
    spec = NonlinearitySpec(terms={(0, 2): kern})
    with pytest.raises(NoContractionError):
        picard_solve(f_init, spec, t_final=3.0, steps=24, tol=1e-12)


def test_regularity_witness_second_differences():
    # smooth kernels: second differences / h^2 stay uniformly bounded as the
    # grid refines (the fixed point is a regular function of p)
    def curvature(m):
        f_init = GridFunction.constant(1.0, 3.0, m)
        kern = grid_fn(lambda p: 0.1 * np.exp(-p), 3.0, m)
        spec = NonlinearitySpec(terms={(0, 1): kern})
        res = picard_solve(f_init, spec, t_final=0.1, steps=8, tol=1e-12)
        h = f_init.spacing
        return np.abs(np.diff(res.values[-1], 2)).max() / h ** 2

    c1, c2 = curvature(64), curvature(128)
    assert c2 < 2.0 * max(c1, 1.0)


# -------------------------------------------------------------- evaluation


def test_laplace_evaluate_constant():
    F = GridFunction.constant(1.0, 14.0, 600)
    for y in (2.0, 3.0, 2.0 + 1.0j):
        res = laplace_evaluate(F, y, tol=1e-8)
        assert complex(res) == pytest.approx(1.0 / y, abs=1e-7)


def test_laplace_evaluate_linear():
    F = grid_fn(lambda p: p, p_max=16.0, m=1600)
    res = laplace_evaluate(F, 2.5, tol=1e-8)
    assert res.value == pytest.approx(1 / 2.5 ** 2, abs=1e-8)


def test_laplace_evaluate_tail_guard():
    F = GridFunction.constant(1.0, 4.0, 64)
    with pytest.raises(TruncationError):
        laplace_evaluate(F, 0.5, tol=1e-10)


def test_evaluated_solution_satisfies_pde():
    # F = e^{-p^3 t}: f(y, t) obeys f_t = f_yyy to 1e-4 under central FD
    m, p_max = 900, 12.0
    t0, y0, d = 0.5, 3.0, 0.05

    def f(y, t):
        F = grid_fn(lambda p: np.exp(-p ** 3 * t), p_max, m)
        return laplace_evaluate(F, y, tol=1e-7).value.real

    ft = (f(y0, t0 + d) - f(y0, t0 - d)) / (2 * d)
    fyyy = (f(y0 + 2 * d, t0) - 2 * f(y0 + d, t0)
            + 2 * f(y0 - d, t0) - f(y0 - 2 * d, t0)) / (2 * d ** 3)
    assert abs(ft - fyyy) <= 1e-4
