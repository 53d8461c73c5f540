import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosoliton import Grid1D, Grid2D, random_field
from geosoliton.errors import GridMismatch, NonSolvableConstraint, NullModeConflict


@pytest.fixture
def grid():
    return Grid2D(32, 32)


def mode(g, a, b):
    X, Y = g.mesh()
    return np.exp(1j * (a * X + b * Y))


@pytest.mark.parametrize("n", [7, 6, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid2D(n, 16)
    with pytest.raises(ValueError):
        Grid1D(n)


def test_grid_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        Grid2D(16, 16, lx=0.0)


def test_shape_mismatch(grid):
    with pytest.raises(GridMismatch):
        grid.deriv_x(np.zeros((16, 32)))


@settings(max_examples=30, deadline=None)
@given(st.integers(-10, 10), st.integers(-10, 10))
def test_single_mode_derivatives(a, b):
    g = Grid2D(32, 32)
    f = mode(g, a, b)
    assert np.max(np.abs(g.deriv_x(f) - 1j * a * f)) < 1e-11
    assert np.max(np.abs(g.deriv_y(f) - 1j * b * f)) < 1e-11
    assert np.max(np.abs(g.laplacian(f) + (a * a + b * b) * f)) < 1e-9
    assert np.max(np.abs(g.deriv_z(f) - 0.5 * (1j * a + b) * f)) < 1e-11
    assert np.max(np.abs(g.deriv_zbar(f) - 0.5 * (1j * a - b) * f)) < 1e-11


def test_zero_field_is_fixed(grid):
    z = np.zeros(grid.shape)
    for op in (grid.deriv_x, grid.deriv_yy, grid.deriv_xxx, grid.laplacian):
        assert np.all(op(z) == 0)
    g, m = grid.antideriv_x(z)
    assert np.all(g == 0) and np.all(m == 0)


def test_real_input_stays_real(grid):
    f = random_field(grid, 1)
    assert np.isrealobj(grid.deriv_x(f))
    assert np.isrealobj(grid.antideriv_x(f)[0])


def test_antideriv_roundtrip_projects_xmean(grid):
    f = random_field(grid, 2, band=6)
    g, dropped = grid.antideriv_x(f)
    assert np.max(np.abs(grid.deriv_x(g) - (f - grid.xmean(f)[None, :]))) < 1e-12
    assert np.allclose(dropped, grid.xmean(f))
    assert np.max(np.abs(grid.xmean(g))) < 1e-14
    h, dy = grid.antideriv_y(f)
    assert np.max(np.abs(grid.deriv_y(h) - (f - grid.ymean(f)[:, None]))) < 1e-12


def test_invert_dzbar(grid):
    V0 = random_field(grid, 3, complex_values=True)
    V0 = V0 - grid.mean(V0)
    V = grid.invert_dzbar(grid.deriv_zbar(V0))
    assert np.max(np.abs(V - V0)) < 1e-12


def test_invert_dzbar_rejects_mean(grid):
    with pytest.raises(NonSolvableConstraint):
        grid.invert_dzbar(np.ones(grid.shape) + 0j)


def test_invert_poisson_like(grid):
    u0 = random_field(grid, 4)
    u0 = u0 - grid.mean(u0)
    rhs = 2.0 * grid.deriv_yy(u0) - 0.25 * grid.deriv_xx(u0)
    u, disc = grid.invert_poisson_like(2.0, -0.25, rhs)
    assert np.max(np.abs(u - u0)) < 1e-12
    assert disc < 1e-14


def test_poisson_null_mode_conflict(grid):
    # a_yy = a_xx = 1/4 in the hyperbolic form leaves the kx = ky line null
    X, Y = grid.mesh()
    rhs = np.cos(X + Y)
    with pytest.raises(NullModeConflict):
        grid.invert_poisson_like(1.0, -1.0, rhs)


def test_dealias_removes_high_modes(grid):
    f = np.cos(15 * grid.mesh()[0])
    assert np.max(np.abs(grid.dealias(f))) < 1e-14
    low = np.cos(3 * grid.mesh()[0])
    assert np.max(np.abs(grid.dealias(low) - low)) < 1e-14


def test_random_field_seeded():
    g = Grid2D(16, 16)
    a, b = random_field(g, 5), random_field(g, 5)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a)) == pytest.approx(1.0)
    c = random_field(g, 5, zero_xmean=True)
    assert np.max(np.abs(g.xmean(c))) < 1e-14


def test_grid1d_ops():
    g = Grid1D(64, 10.0)
    k0 = 2 * np.pi / 10.0 * 3
    f = np.sin(k0 * g.x)
    assert np.max(np.abs(g.deriv_x(f) - k0 * np.cos(k0 * g.x))) < 1e-12
    h, m = g.antideriv_x(f + 2.0)
    assert m == pytest.approx(2.0)
    assert np.max(np.abs(g.deriv_x(h) - f)) < 1e-12
    assert g.integrate(np.ones(64)) == pytest.approx(10.0)


def test_norms(grid):
    one = np.ones(grid.shape)
    assert grid.l2_norm(one) == pytest.approx(np.sqrt(grid.area))
    assert grid.linf_norm(-3 * one) == 3.0
    assert grid.integrate(one) == pytest.approx(grid.area)
