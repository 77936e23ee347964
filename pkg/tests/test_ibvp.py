import math

import numpy as np
import pytest

from selfsim import ibvp
from selfsim import similarity as sim
from selfsim.analysis import compatibility_constant
from selfsim.errors import InvalidParams, RobinSingular


def _max_error(exact, n, dt, t_end=1.0, kind=ibvp.Kind.DIRICHLET, D=1.0):
    grid = ibvp.Grid1D(D, n)
    f = ibvp.crank_nicolson_solve(ibvp.problem_from_closed_form(exact, grid, t_end, dt, kind), save_every=10)
    return max(np.max(np.abs(row - exact(grid.x, t))) for t, row in zip(f.times, f.values))


# -- types ---------------------------------------------------------------

def test_grid_nodes():
    g = ibvp.Grid1D(2.0, 5)
    np.testing.assert_allclose(g.x, [-2, -1, 0, 1, 2])
    assert g.dx == 1.0 and g.index_of(0.4) == 2
    with pytest.raises(InvalidParams):
        ibvp.Grid1D(1.0, 2)
    with pytest.raises(InvalidParams):
        ibvp.Grid1D(0.0, 11)


def test_problem_validation():
    g = ibvp.Grid1D(1.0, 11)
    left, right = ibvp.homogeneous_dirichlet()
    with pytest.raises(InvalidParams):
        ibvp.IBVPProblem(g, np.zeros(10), left, right, 1.0, 0.1)
    with pytest.raises(InvalidParams):
        ibvp.IBVPProblem(g, np.zeros(11), left, right, 0.1, 1.0)
    with pytest.raises(InvalidParams):
        ibvp.IBVPProblem(g, np.zeros(11), right, left, 1.0, 0.1)


def test_tabulated_boundary():
    spec = ibvp.tabulated_boundary("left", "dirichlet", [0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
    np.testing.assert_allclose(spec([0.5, 1.5]), [1.0, 1.0])
    with pytest.warns(UserWarning):
        spec([3.0])
    with pytest.raises(InvalidParams):
        ibvp.tabulated_boundary("left", "dirichlet", [0.5, 1.0], [0.0, 1.0])
    with pytest.raises(InvalidParams):
        ibvp.tabulated_boundary("left", "dirichlet", [0.0, 1.0], [0.0, np.inf])


def test_thomas_against_dense_solve():
    rng = np.random.default_rng(3)
    n = 12
    a, c = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    b = 4 + rng.uniform(0, 1, n)
    d = rng.uniform(-1, 1, n)
    A = np.diag(b) + np.diag(a[1:], -1) + np.diag(c[:-1], 1)
    np.testing.assert_allclose(ibvp.thomas(a, b, c, d), np.linalg.solve(A, d), rtol=1e-12)


# -- solver --------------------------------------------------------------

def test_hermite_mode_reproduction():
    assert _max_error(ibvp.hermite_closed_form(), 401, 1e-3, t_end=2.0) < 5e-6


def test_second_order_convergence():
    errs = [_max_error(ibvp.hermite_closed_form(), n, dt) for n, dt in ((41, 0.02), (81, 0.01), (161, 0.005))]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


def test_first_sine_mode_decays_at_eigenvalue():
    D = 1.0
    grid = ibvp.Grid1D(D, 401)
    left, right = ibvp.homogeneous_dirichlet()
    p = ibvp.IBVPProblem(grid, np.sin(math.pi * (grid.x + D) / (2 * D)), left, right, 1.0, 1e-3)
    f = ibvp.crank_nicolson_solve(p, save_times=[0.5, 1.0])
    mid = grid.index_of(0.0)
    rate = math.log(f.at(0.5)[mid] / f.at(1.0)[mid]) / 0.5
    assert rate == pytest.approx((math.pi / (2 * D)) ** 2, rel=1e-5)


def test_zero_problem_stays_zero():
    grid = ibvp.Grid1D(1.0, 21)
    left, right = ibvp.homogeneous_dirichlet()
    f = ibvp.crank_nicolson_solve(ibvp.IBVPProblem(grid, np.zeros(21), left, right, 1.0, 0.01))
    assert np.all(f.values == 0)


def test_first_row_is_initial_data():
    grid = ibvp.Grid1D(1.0, 41)
    p = ibvp.problem_from_closed_form(ibvp.hermite_closed_form(), grid, 1.0, 0.01)
    f = ibvp.crank_nicolson_solve(p, save_times=[0.5])
    assert f.times[0] == 0.0 and f.times[-1] == pytest.approx(0.5)
    np.testing.assert_array_equal(f.values[0], p.initial)


@pytest.mark.parametrize("kind", [ibvp.Kind.NEUMANN, ibvp.Kind.ROBIN])
def test_derivative_boundaries_are_second_order(kind):
    exact = ibvp.gaussian_closed_form()
    errs = [_max_error(exact, n, dt, kind=kind) for n, dt in ((41, 0.02), (81, 0.01), (161, 0.005))]
    assert errs[-1] < 1e-4
    assert all(3.0 < errs[i] / errs[i + 1] < 5.0 for i in range(2)), errs


def test_kummer_consonant_transparency():
    c = compatibility_constant(1.0)
    assert _max_error(ibvp.kummer_closed_form(c), 401, 1e-3, t_end=20.0) < 5e-6


def test_accuracy_warning():
    grid = ibvp.Grid1D(1.0, 401)
    left, right = ibvp.homogeneous_dirichlet()
    with pytest.warns(ibvp.AccuracyWarning):
        ibvp.crank_nicolson_solve(ibvp.IBVPProblem(grid, np.zeros(401), left, right, 0.1, 0.01))


def test_maximum_principle():
    grid = ibvp.Grid1D(1.0, 51)
    dt = 0.5 * grid.dx**2
    p = ibvp.problem_from_closed_form(ibvp.hermite_closed_form(), grid, 0.5, dt)
    f = ibvp.crank_nicolson_solve(p)
    times = np.linspace(0, 0.5, 2001)
    lo = min(p.initial.min(), p.left(times).min(), p.right(times).min())
    hi = max(p.initial.max(), p.left(times).max(), p.right(times).max())
    assert f.values.min() >= lo - 1e-12 and f.values.max() <= hi + 1e-12


# -- boundary generators -------------------------------------------------

def test_consonant_dirichlet_values():
    left, right = ibvp.consonant_dirichlet(ibvp.hermite_closed_form(), 1.0)
    t = np.array([0.0, 0.7, 3.0])
    expected = (2 * t + 1) ** -1.5 * np.exp(-1 / (2 * (2 * t + 1)))
    np.testing.assert_allclose(right(t), expected, rtol=1e-14)
    np.testing.assert_allclose(left(t), -expected, rtol=1e-14)
    zl, zr = ibvp.consonant_dirichlet(ibvp.zero_closed_form(), 1.0)
    assert np.all(zl(t) == 0) and np.all(zr(t) == 0)


def test_kummer_dirichlet_is_its_boundary_trace():
    c = compatibility_constant(1.0)
    left, right = ibvp.consonant_dirichlet(ibvp.kummer_closed_form(c), 1.0)
    t = np.array([0.0, 2.0])
    np.testing.assert_allclose(right(t), sim.kummer_mode_exact(1.0, t, c), rtol=1e-14)
    assert right(np.array([0.0]))[0] == pytest.approx(math.exp(-0.5), rel=1e-13)


def test_consonant_neumann():
    left, right = ibvp.consonant_neumann(ibvp.hermite_closed_form(), 1.0)
    t = np.linspace(0, 5, 6)
    np.testing.assert_allclose(left(t), right(t), rtol=1e-14)
    zl, zr = ibvp.consonant_neumann(ibvp.constant_closed_form(2.0), 1.0)
    assert np.all(zl(t) == 0) and np.all(zr(t) == 0)
    gl, gr = ibvp.consonant_neumann(ibvp.gaussian_closed_form(), 1.0)
    s = t + 0.5
    by_hand = -1.0 / (2 * s) * np.exp(-1 / (4 * s)) / np.sqrt(4 * math.pi * s)
    np.testing.assert_allclose(gr(t), by_hand, rtol=1e-12)
    np.testing.assert_allclose(gl(t), -by_hand, rtol=1e-12)


def test_analytic_derivatives_match_differences():
    c = compatibility_constant(1.0)
    for exact in (ibvp.hermite_closed_form(), ibvp.kummer_closed_form(c), ibvp.gaussian_closed_form()):
        x = np.linspace(-3, 3, 13)
        fd = (exact(x + 1e-6, 0.8) - exact(x - 1e-6, 0.8)) / 2e-6
        np.testing.assert_allclose(exact.derivative(x, 0.8), fd, atol=1e-8)


def test_robin_gaussian_coefficient():
    left, right = ibvp.consonant_robin(ibvp.gaussian_closed_form(), 1.0)
    t = np.array([0.0, 1.0, 10.0])
    np.testing.assert_allclose(right(t), -1.0 / (2 * (t + 0.5)), rtol=1e-8)
    np.testing.assert_allclose(left(t), 1.0 / (2 * (t + 0.5)), rtol=1e-8)


def test_robin_even_mode_coefficient_vanishes():
    mode = sim.SelfSimilarMode(0, 1, 0.7)
    beta = ibvp.robin_coefficient(mode, 1.0, np.array([1e4, 1e6]), -1.0)
    assert abs(beta[1]) < abs(beta[0]) < 1e-3


def test_robin_odd_mode_is_singular():
    with pytest.raises(RobinSingular):
        ibvp.consonant_robin(ibvp.hermite_closed_form(), 1.0, horizon=1e40)


# -- diagnostics ---------------------------------------------------------

def test_compatibility_check():
    grid = ibvp.Grid1D(1.0, 401)
    c = compatibility_constant(1.0)
    left, right = ibvp.consonant_dirichlet(ibvp.kummer_closed_form(c), 1.0)
    gauss = np.exp(-grid.x**2 / 2)
    res = ibvp.compatibility_check(ibvp.IBVPProblem(grid, gauss, left, right, 1.0, 0.01))
    assert max(res) < 1e-12
    zl, zr = ibvp.homogeneous_dirichlet()
    res = ibvp.compatibility_check(ibvp.IBVPProblem(grid, gauss, zl, zr, 1.0, 0.01))
    assert res == pytest.approx((math.exp(-0.5), math.exp(-0.5)), rel=1e-14)
    assert ibvp.compatibility_check(ibvp.IBVPProblem(grid, np.zeros(401), zl, zr, 1.0, 0.01)) == (0.0, 0.0)


def test_mass_series_odd_solution():
    grid = ibvp.Grid1D(1.0, 401)
    f = ibvp.crank_nicolson_solve(ibvp.problem_from_closed_form(ibvp.hermite_closed_form(), grid, 5.0, 1e-3))
    ms = ibvp.mass_series(f)
    assert np.max(np.abs(ms.M)) < 1e-10
    assert np.max(ms.residual) < 1e-6
    assert len(ms.rows()) == f.times.size


def test_mass_decreases_with_absorbing_boundaries():
    grid = ibvp.Grid1D(1.0, 201)
    left, right = ibvp.homogeneous_dirichlet()
    f = ibvp.crank_nicolson_solve(ibvp.IBVPProblem(grid, np.exp(-grid.x**2 / 2), left, right, 2.0, 1e-3),
                                  save_every=20)
    assert np.all(np.diff(ibvp.mass_series(f).M) < 0)


def test_mass_balance_converges():
    res = []
    for n, dt in ((51, 4e-3), (101, 2e-3), (201, 1e-3)):
        grid = ibvp.Grid1D(1.0, n)
        p = ibvp.problem_from_closed_form(ibvp.gaussian_closed_form(), grid, 1.0, dt)
        ms = ibvp.mass_series(ibvp.crank_nicolson_solve(p, save_every=5))
        res.append(float(np.max(ms.residual[2:-2])))
    assert res[0] / res[1] > 3.0 and res[1] / res[2] > 3.0, res


def test_field_csv(tmp_path):
    grid = ibvp.Grid1D(1.0, 5)
    f = ibvp.SolutionField(grid, [0.0, 1.0], np.arange(10.0).reshape(2, 5))
    path = tmp_path / "field.csv"
    f.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 11
