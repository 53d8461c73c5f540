import math

import numpy as np
import pytest

from geosoliton import Grid1D, Grid2D, random_field
from geosoliton.checks import strachan_line_data
from geosoliton.errors import (
    DegenerateSupport,
    ImaginaryLeak,
    NonPeriodicPhase,
    ProjectionLoss,
    ZeroGaugeParam,
)
from geosoliton.maps import (
    check_mnv_frame,
    check_mx_kp,
    check_mxi_nv,
    check_strachan_gauge,
    cubic_isolation_1d,
    gauge_from_strachan,
    gauge_to_strachan,
    lakshmanan_map_1d,
    mnv_map,
    mxxii_map,
    omega_2d,
)
from geosoliton.solvers import TimeSteppingConfig, solve_strachan


@pytest.fixture
def grid():
    return Grid2D(32, 32)


def test_lakshmanan_modulus_and_phase():
    g = Grid1D(64)
    k = 1.0 + 0.3 * np.cos(g.x)
    tau = 0.4 * np.sin(2 * g.x)
    q = lakshmanan_map_1d(g, k, tau).values
    assert np.allclose(np.abs(q), k / 2, atol=1e-14)
    # d/dx of the unwrapped phase is -tau
    phase = np.unwrap(np.angle(q))
    assert np.allclose(g.deriv_x(phase), -tau, atol=1e-10)


def test_lakshmanan_zero_and_mean():
    g = Grid1D(16)
    z = np.zeros(16)
    assert np.all(lakshmanan_map_1d(g, z, z).values == 0)
    with pytest.raises(ProjectionLoss):
        lakshmanan_map_1d(g, np.ones(16), np.ones(16))


def test_mnv_map_y_independent(grid):
    X, _ = grid.mesh()
    k = 0.3 * np.sin(X)
    rep = mnv_map(grid, k)
    assert np.max(np.abs(rep.diagnostics["m"])) < 1e-15
    assert np.allclose(rep.values, np.abs(k) / 2)
    assert np.all(mnv_map(grid, 0 * k).values == 0)


def test_mnv_map_rejects_ymean(grid):
    _, Y = grid.mesh()
    with pytest.raises(ProjectionLoss):
        mnv_map(grid, np.sin(Y))


def test_mxxii_map(grid):
    b = 1 / math.sqrt(2)  # 2 b^2 lx / 2 pi = 1
    X, _ = grid.mesh()
    k = 0.2 * np.sin(X)
    tau = k**2 / (4 * b * b)  # integrand k^2/b^2 - 4 tau vanishes
    rep = mxxii_map(grid, k, tau, b)
    assert np.allclose(rep.values, k / (2 * b) * np.exp(-2j * b * b * X))
    assert rep.diagnostics["linear_phase"] == pytest.approx(-1.0)


def test_mxxii_map_errors(grid):
    X, _ = grid.mesh()
    k = 0.2 * np.sin(X)
    with pytest.raises(ZeroGaugeParam):
        mxxii_map(grid, k, 0 * k, 0.0)
    with pytest.raises(ProjectionLoss):
        mxxii_map(grid, k, 0 * k, 1.0)
    b = 0.6
    with pytest.raises(NonPeriodicPhase) as exc:
        mxxii_map(grid, k, k**2 / (4 * b * b), b)
    assert exc.value.linear_phase == pytest.approx(-2 * b * b)
    assert np.allclose(exc.value.periodic_part, k / (2 * b))


def test_gauge_roundtrip(grid):
    q = random_field(grid, 0, 0.3, 3, complex_values=True)
    fwd = gauge_to_strachan(grid, q)
    back = gauge_from_strachan(grid, fwd.values)
    assert np.max(np.abs(back.values - q)) < 1e-14
    assert np.allclose(np.abs(fwd.values), np.abs(q))
    assert np.allclose(fwd.diagnostics["twist_rate"], 0.5 * grid.xmean(np.abs(q) ** 2))
    with pytest.raises(ProjectionLoss):
        gauge_to_strachan(grid, q, tol=1e-12)


def test_mx_kp_identity(grid):
    k = random_field(grid, 7, 0.3, 4, zero_xmean=True)
    r = check_mx_kp(grid, k, alpha2=-1.0)
    assert r["residual_linf"] < 1e-10


def test_mxi_nv_identity(grid):
    k = random_field(grid, 8, 0.3, 4, zero_xmean=True, zero_ymean=True)
    r = check_mxi_nv(grid, k, 1.0, 0.5)
    assert r["residual_linf"] < 1e-10
    assert r["diagnostics"]["nonlinear_part_l2"] > 0


def test_omega_2d(grid):
    z = np.zeros(grid.shape)
    assert np.all(omega_2d(grid, z, z, z + 0j) == 0)
    with pytest.raises(ImaginaryLeak):
        omega_2d(grid, 0.1j + z, z, z + 0j)
    with pytest.raises(KeyError):
        omega_2d(grid, z, z, z, variant="other")


def test_cubic_isolation_fits_zero_weight(grid):
    profile = 0.05 * (1.5 + np.cos(grid.x))
    gamma, at_fit, printed = cubic_isolation_1d(grid, profile)
    assert abs(gamma) < 1e-8
    assert at_fit < 1e-10
    assert printed > 1e-3


def test_mnv_frame_zero_and_degenerate(grid):
    z = np.zeros(grid.shape)
    assert check_mnv_frame(grid, z)["residual"] == 0.0
    # q vanishes on most of the domain
    X, _ = grid.mesh()
    k = np.where(np.abs(X - np.pi) < 0.5, np.cos(X - np.pi) - np.cos(0.5), 0.0)
    k = k - grid.xmean(k)[None, :]
    with pytest.raises(DegenerateSupport):
        check_mnv_frame(grid, k, eps=0.1)


def test_strachan_gauge_residual_tracks_self_residual():
    # the gauge factor exp(i phi / 2) has a wide spectrum; 32^2 resolves it
    g = Grid2D(32, 32)
    q0 = strachan_line_data(g, 0.05)
    tr = solve_strachan(g, q0, TimeSteppingConfig(dt=4e-3, n_steps=10, dealias=False))
    r = check_strachan_gauge(tr)
    ratio = max(m / s for m, s in zip(r["residual_l2"], r["self_residual_l2"]))
    assert ratio < 10
    assert r["diagnostics"]["twist"] > 0
