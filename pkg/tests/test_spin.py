import numpy as np
import pytest

from geosoliton import Grid2D, random_field
from geosoliton.errors import NonUnit, NullModeConflict, ProjectionLoss, S3NotZero, ZeroGaugeParam
from geosoliton.frames import Signature
from geosoliton.spin import (
    SPIN_MODELS,
    ModelParams,
    admissible_spin_field,
    check_unit,
    ishimori_source,
    matrix_to_vec,
    norm2,
    omega_mx,
    omega_mxi,
    planar_spin_field,
    rhs_ishimori,
    rhs_lle2d,
    rhs_m1,
    rhs_mxvii,
    rhs_mxxii,
    triple,
    vec_to_matrix,
)


@pytest.fixture(scope="module")
def grid():
    return Grid2D(64, 64)


@pytest.fixture(scope="module")
def spin(grid):
    return admissible_spin_field(grid, seed=1, amplitude=0.2)


def _tangency(s, st):
    return float(np.max(np.abs(np.sum(s * st, axis=-1))))


def test_admissible_field_is_unit(spin):
    assert check_unit(spin) < 1e-14


def test_minkowski_norm():
    s = np.array([0.0, np.sinh(0.3), np.cosh(0.3)])
    assert norm2(s, Signature.MINKOWSKI) == pytest.approx(-1.0)
    with pytest.raises(NonUnit):
        check_unit(2 * np.array([1.0, 0, 0]))


def test_matrix_roundtrip():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(5, 3))
    assert np.allclose(matrix_to_vec(vec_to_matrix(s)), s)
    # a unit spin squares to the identity
    u = s / np.linalg.norm(s, axis=-1, keepdims=True)
    S = vec_to_matrix(u)
    assert np.allclose(S @ S, np.eye(2))


def test_model_params_reject_zero_gauge():
    with pytest.raises(ZeroGaugeParam):
        ModelParams(b_gauge=0.0)


def test_tangency(grid, spin):
    assert _tangency(spin, rhs_m1(grid, spin)[0]) < 1e-9
    assert _tangency(spin, rhs_lle2d(grid, spin)) < 1e-9
    params = ModelParams(alpha=1 / np.sqrt(2))
    assert _tangency(spin, rhs_ishimori(grid, spin, params)[0]) < 1e-9
    assert _tangency(spin, rhs_mxxii(grid, spin)[0]) < 1e-9
    planar = planar_spin_field(grid, seed=1)
    assert _tangency(planar, rhs_mxvii(grid, planar)[0]) < 1e-9


def test_ishimori_hyperbolic_null_modes(grid, spin):
    # with alpha = 1 the auxiliary operator vanishes on kx = +-2 ky
    with pytest.raises(NullModeConflict):
        rhs_ishimori(grid, spin, ModelParams(alpha=1.0))


def test_mxvii_needs_planar_spin(grid, spin):
    with pytest.raises(S3NotZero):
        rhs_mxvii(grid, spin)


def test_ishimori_source_trace_identity(grid, spin):
    src, leak = ishimori_source(grid, spin, 1.0)
    sx, sy = grid.deriv_x(spin), grid.deriv_y(spin)
    assert leak < 1e-12
    # tr(S [S_y, S_x]) = 4i S.(S_y ^ S_x); divided by 4i leaves the triple product
    assert np.max(np.abs(src - triple(spin, sy, sx))) < 1e-12


def test_y_independent_reductions(grid):
    X, _ = grid.mesh()
    th = 0.3 * np.sin(X)
    s = np.stack([np.sin(th), np.zeros_like(th), np.cos(th)], axis=-1)
    assert np.max(np.abs(rhs_m1(grid, s)[0])) < 1e-12
    assert np.max(np.abs(rhs_mxxii(grid, s)[0])) < 1e-12
    # the 2D LLE with no y dependence is the 1D Heisenberg model
    assert np.allclose(rhs_lle2d(grid, s), np.cross(s, grid.deriv_xx(s)), atol=1e-12)


@pytest.mark.parametrize("name", ["m1", "lle2d", "ishimori", "mxvii", "mxxii"])
def test_uniform_spin_is_static(grid, name):
    s = np.zeros(grid.shape + (3,))
    s[..., 0] = 1.0
    out = SPIN_MODELS[name]["rhs"](grid, s)
    st = out[0] if isinstance(out, tuple) else out
    assert np.max(np.abs(st)) < 1e-14


def test_m1_rejects_nonperiodic_u(grid):
    # a generic unit field has S.(S_x ^ S_y) with nonzero x-line means
    v = np.stack([random_field(grid, i, band=2) for i in range(3)], -1) + np.array([0, 0, 2.0])
    s = v / np.linalg.norm(v, axis=-1, keepdims=True)
    with pytest.raises(ProjectionLoss):
        rhs_m1(grid, s)


def test_planar_field(grid):
    s = planar_spin_field(grid, seed=2)
    assert check_unit(s) < 1e-14
    assert np.all(s[..., 2] == 0)


def test_omega_mx_zero_and_1d(grid):
    z = np.zeros(grid.shape)
    assert np.all(omega_mx(grid, z) == 0)
    X, _ = grid.mesh()
    k = 0.2 * np.sin(X)
    assert np.allclose(omega_mx(grid, k), 3 * k**2 + grid.deriv_xx(k), atol=1e-13)


def test_omega_mxi_zero(grid):
    z = np.zeros(grid.shape)
    om, diag = omega_mxi(grid, z)
    assert np.all(om == 0) and diag["v_reading_gap"] == 0


def test_omega_mxi_linear_part(grid):
    # the quadratic remainder relative to the linear part scales with amplitude
    base = random_field(grid, 3, 1.0, zero_xmean=True, zero_ymean=True)

    def rel(eps):
        k = eps * base
        q, _ = grid.antideriv_x(k)
        om, _ = omega_mxi(grid, k, alpha=1.0, beta=0.7)
        lin = grid.deriv_xxx(q) + 0.7 * grid.deriv_yyy(q)
        return np.max(np.abs(om - lin)) / np.max(np.abs(lin))

    r1, r2 = rel(1e-3), rel(5e-4)
    assert r1 < 1e-2
    assert r1 / r2 == pytest.approx(2.0, rel=1e-3)
