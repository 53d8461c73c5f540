import math

import numpy as np
import pytest

from geosoliton import Grid1D, Grid2D, random_field
from geosoliton.checks import nls_soliton, strachan_line_data
from geosoliton.errors import BlowupDetected, ImaginaryLeak, InsufficientSnapshots, ProjectionLoss
from geosoliton.solvers import (
    EQUATIONS,
    REGISTRY,
    TimeSteppingConfig,
    Trajectory,
    conserved,
    mnv_rhs,
    nv_lab_triple_residual,
    residual,
    solve_ds,
    solve_kdv,
    solve_kp,
    solve_mnv,
    solve_nls,
    solve_nv,
    solve_strachan,
    time_derivative,
)


@pytest.mark.parametrize("kw", [
    {"dt": 0.0, "n_steps": 1},
    {"dt": 0.1, "n_steps": 0},
    {"dt": 0.1, "n_steps": 1.5},
    {"dt": 0.1, "n_steps": 1, "snapshot_every": 0},
    {"dt": 0.1, "n_steps": 1, "scheme": "euler"},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TimeSteppingConfig(**kw)


def test_trajectory_times_must_increase():
    tr = Trajectory(Grid1D(8), "nls", {})
    tr.append(0.0, np.zeros(8), {})
    with pytest.raises(ValueError):
        tr.append(0.0, np.zeros(8), {})


def test_zero_data_stays_zero():
    g1, g2 = Grid1D(32), Grid2D(16, 16)
    cfg = TimeSteppingConfig(dt=1e-2, n_steps=3)
    z1, z2 = np.zeros(32), np.zeros(g2.shape)
    runs = [
        solve_nls(g1, z1 + 0j, cfg),
        solve_kdv(g1, z1, cfg),
        solve_kp(g2, z2, 1.0, cfg),
        solve_nv(g2, z2, 1.0, 1.0, cfg),
        solve_mnv(g2, z2, cfg),
        solve_ds(g2, z2 + 0j, cfg),
        solve_strachan(g2, z2 + 0j, cfg),
    ]
    for tr in runs:
        assert len(tr) == 4
        assert all(np.all(s == 0) for s in tr.states), tr.equation


@pytest.mark.parametrize("scheme", ["rk4_integrating_factor", "split_step"])
def test_nls_plane_wave(scheme):
    # q = a exp(i (j x + (2 a^2 - j^2) t)) solves the focusing equation exactly
    g = Grid1D(32, 2 * math.pi)
    a, j, dt, n = 0.7, 3, 1e-3, 200
    q0 = a * np.exp(1j * j * g.x)
    tr = solve_nls(g, q0, TimeSteppingConfig(dt=dt, n_steps=n, scheme=scheme, snapshot_every=n, dealias=False))
    exact = q0 * np.exp(1j * (2 * a * a - j * j) * n * dt)
    assert np.max(np.abs(tr.states[-1] - exact)) < 1e-10


def test_nls_soliton_short_run():
    g = Grid1D(256, 40.0)
    v = 4 * math.pi * 2 / 40.0  # exp(i v x / 2) stays periodic
    q0 = nls_soliton(g.x, 0.0, 1.0, v, 40.0)
    cfg = TimeSteppingConfig(dt=1e-3, n_steps=500, scheme="split_step", snapshot_every=500)
    tr = solve_nls(g, q0, cfg)
    assert np.max(np.abs(tr.states[-1] - nls_soliton(g.x, 0.5, 1.0, v, 40.0))) < 1e-6
    m = tr.conserved_series["mass"]
    assert abs(m[-1] - m[0]) < 1e-10 * m[0]


def test_nls_needs_1d_grid():
    with pytest.raises(TypeError):
        solve_nls(Grid2D(8, 8), np.zeros((8, 8)), TimeSteppingConfig(dt=0.1, n_steps=1))


def test_kdv_self_residual_and_integral():
    # a coarse grid keeps the fastest retained mode resolved by the
    # finite-difference time derivative
    g = Grid1D(16)
    q0 = 0.2 * np.sin(g.x) + 0.1 * np.cos(2 * g.x)
    errs = []
    for dt in (2e-3, 1e-3):
        tr = solve_kdv(g, q0, TimeSteppingConfig(dt=dt, n_steps=int(round(0.02 / dt))))
        errs.append(max(residual("kdv", tr)["l2"]))
    assert errs[0] / errs[1] > 12
    s = tr.conserved_series["integral"]
    assert abs(s[-1] - s[0]) < 1e-12


def test_blowup_is_detected():
    g = Grid1D(64)
    cfg = TimeSteppingConfig(dt=0.5, n_steps=50, scheme="rk4", dealias=False)
    with pytest.raises(BlowupDetected):
        solve_kdv(g, np.sin(g.x), cfg)


def test_split_step_needs_pointwise_phase():
    g = Grid2D(16, 16)
    cfg = TimeSteppingConfig(dt=1e-2, n_steps=1, scheme="split_step")
    with pytest.raises(ValueError):
        solve_kp(g, np.zeros(g.shape), 1.0, cfg)


def test_kp_rejects_xmean():
    g = Grid2D(16, 16)
    _, Y = g.mesh()
    with pytest.raises(ProjectionLoss):
        solve_kp(g, 0.1 * np.cos(Y), 1.0, TimeSteppingConfig(dt=1e-3, n_steps=1))


def test_kp_residual_and_conservation():
    g = Grid2D(16, 16)
    q0 = random_field(g, 0, 0.1, 2, zero_xmean=True)
    tr = solve_kp(g, q0, 1.0, TimeSteppingConfig(dt=1e-3, n_steps=10))
    assert max(residual("kp", tr)["l2"]) < 1e-7
    s = tr.conserved_series["integral"]
    assert abs(s[-1] - s[0]) < 1e-12


def test_nv_random_data_lose_line_means():
    g = Grid2D(16, 16)
    q0 = random_field(g, 0, 0.1, 3, zero_xmean=True, zero_ymean=True)
    with pytest.raises(ProjectionLoss):
        solve_nv(g, q0, 1.0, 1.0, TimeSteppingConfig(dt=1e-3, n_steps=10))


def test_nv_line_data():
    g = Grid2D(32, 32)
    X, Y = g.mesh()
    q0 = 0.1 * np.sin(X + 2 * Y) + 0.05 * np.cos(2 * X + 4 * Y)
    tr = solve_nv(g, q0, 1.0, 1.0, TimeSteppingConfig(dt=1e-3, n_steps=10))
    s = tr.conserved_series["integral"]
    assert abs(s[-1] - s[0]) < 1e-12


def test_mnv_reality_and_type():
    g = Grid2D(16, 16)
    q0 = random_field(g, 1, 0.1, 2)
    q0 = q0 - g.mean(q0)
    tr = solve_mnv(g, q0, TimeSteppingConfig(dt=1e-3, n_steps=5))
    assert tr.diagnostics["max_imag"] < 1e-10
    with pytest.raises(TypeError):
        solve_mnv(g, q0 + 0j, TimeSteppingConfig(dt=1e-3, n_steps=1))


def test_mnv_leak_tolerance_enforced():
    g = Grid2D(16, 16)
    q0 = random_field(g, 1, 0.1, 2)
    q0 = q0 - g.mean(q0)
    with pytest.raises(ImaginaryLeak):
        solve_mnv(g, q0, TimeSteppingConfig(dt=1e-3, n_steps=5, leak_tol=-1.0))


def test_mnv_rhs_linear_symbol():
    # for a single real mode the linear part is 1/4 (d_x^3 - 3 d_x d_y^2)
    g = Grid2D(16, 16)
    X, Y = g.mesh()
    q = 1e-8 * np.cos(2 * X + Y)
    out, leak = mnv_rhs(g, q)
    expect = 0.25 * (g.deriv_xxx(q) - 3 * g.deriv_x(g.deriv_yy(q)))
    assert np.max(np.abs(out - expect)) < 1e-12 * 1e8 * np.max(np.abs(q)) ** 2 + 1e-20
    assert leak < 1e-20


def test_ds_mass_conservation():
    g = Grid2D(32, 32)
    q0 = random_field(g, 2, 0.2, 2, complex_values=True)
    tr = solve_ds(g, q0, TimeSteppingConfig(dt=1e-3, n_steps=20, scheme="split_step", snapshot_every=20))
    m = tr.conserved_series["mass"]
    assert abs(m[-1] - m[0]) < 1e-12 * m[0]


def test_strachan_mass_and_residual():
    g = Grid2D(32, 32)
    q0 = strachan_line_data(g, 0.05)
    tr = solve_strachan(g, q0, TimeSteppingConfig(dt=1e-3, n_steps=8, dealias=False))
    m = tr.conserved_series["mass"]
    assert abs(m[-1] - m[0]) < 1e-10 * m[0]
    assert max(residual("strachan", tr)["l2"]) < 1e-8


def test_time_derivative_guards():
    g = Grid1D(8)
    tr = Trajectory(g, "nls", {})
    tr.append(0.0, np.zeros(8), {})
    tr.append(1.0, np.zeros(8), {})
    with pytest.raises(InsufficientSnapshots):
        time_derivative(tr)
    tr.append(3.0, np.zeros(8), {})
    with pytest.raises(ValueError):
        time_derivative(tr)


def test_time_derivative_fourth_order():
    g = Grid1D(8)
    tr = Trajectory(g, "x", {})
    for t in np.arange(7) * 0.1:
        tr.append(t, np.full(8, t**4), {})
    idx, d = time_derivative(tr)
    assert idx == [2, 3, 4]
    for i, v in zip(idx, d):
        assert np.allclose(v, 4 * tr.times[i] ** 3, atol=1e-12)


def test_residual_unknown_equation():
    g = Grid1D(8)
    tr = Trajectory(g, "x", {})
    for t in range(3):
        tr.append(float(t), np.zeros(8), {})
    with pytest.raises(KeyError):
        residual("foo", tr)


def test_nv_triple():
    g = Grid2D(32, 32)
    X, Y = g.mesh()
    q = 1e-2 * np.cos(X + 2 * Y)
    f = np.exp(1j * (2 * X - Y)) + 0.5 * np.cos(3 * Y)
    rel, _, _ = nv_lab_triple_residual(g, q, f)
    assert rel < 1e-12
    rel_printed, _, _ = nv_lab_triple_residual(g, q, f, constraint="printed")
    assert rel_printed > 1e-3
    assert nv_lab_triple_residual(g, 0 * q, f) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        nv_lab_triple_residual(g, q, f, constraint="other")


def test_conserved_names():
    g = Grid1D(16)
    c = conserved("nls", g, np.ones(16) + 0j)
    assert set(c) == {"mass", "momentum"}
    assert c["mass"] == pytest.approx(g.l)
    assert c["momentum"] == 0


def test_registry_matches_equations():
    assert set(EQUATIONS) - {"kdv"} <= set(REGISTRY)
    for eid, d in REGISTRY.items():
        assert d.id == eid and d.state_kind in ("real", "complex")
