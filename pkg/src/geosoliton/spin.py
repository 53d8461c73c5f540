"""Right-hand sides of the (2+1)-dimensional spin models.

Spin fields are arrays of shape ``(nx, ny, 3)``.  Models written in the
2x2 matrix language are assembled with Pauli matrices and converted back
to vectors; the vector forms they reduce to are noted next to each
evaluator and are what the tests compare against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImaginaryLeak, NonUnit, ProjectionLoss, S3NotZero, ZeroGaugeParam
from .frames import Signature, as_signature

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

#: metric used for the spin normalisation, keyed by signature
_METRIC = {1: np.array([1.0, 1.0, 1.0]), -1: np.array([1.0, 1.0, -1.0])}


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 1.0
    beta: float = 1.0
    alpha2: float = 1.0
    b_gauge: float = 1.0
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.b_gauge == 0:
            raise ZeroGaugeParam("b_gauge must be nonzero")


def norm2(s, sig=Signature.EUCLIDEAN):
    """``S.S`` in the metric of the signature (``S1^2 + S2^2 - S3^2`` for E = -1)."""
    return np.sum(_METRIC[int(sig)] * np.asarray(s) ** 2, axis=-1)


def check_unit(s, sig=Signature.EUCLIDEAN, tol=1e-10):
    dev = float(np.max(np.abs(norm2(s, sig) - int(sig)))) if np.size(s) else 0.0
    if dev > tol:
        raise NonUnit(f"spin normalisation off by {dev:.3e}")
    return dev


def vec_to_matrix(s, sig=Signature.EUCLIDEAN, tol=None):
    """``S = sum_k S_k sigma_k``; with ``tol`` set the normalisation is checked first."""
    s = np.asarray(s)
    if tol is not None:
        check_unit(s, sig, tol)
    return np.einsum("...k,kij->...ij", s, SIGMA)


def matrix_to_vec(M):
    """Inverse of :func:`vec_to_matrix`: ``S_k = tr(M sigma_k) / 2`` (real part)."""
    return 0.5 * np.real(np.einsum("...ij,kji->...k", M, SIGMA))


def commutator(A, B):
    return A @ B - B @ A


def dot(a, b):
    return np.sum(a * b, axis=-1)


def triple(a, b, c):
    return dot(a, np.cross(b, c))


def _vec_deriv(grid, s, op):
    return getattr(grid, f"deriv_{op}")(s)


def _require_projection(discarded, tol, what):
    worst = float(np.max(np.abs(discarded))) if np.size(discarded) else 0.0
    if worst > tol:
        raise ProjectionLoss(f"{what}: discarded x-mean {worst:.3e}", discarded=discarded)


def _matrix_deriv(grid, M, op):
    return getattr(grid, f"deriv_{op}")(M)


# models ------------------------------------------------------------------------


def rhs_m1(grid, s, projection_tol=1e-8):
    """``S_t = (S ^ S_y + u S)_x`` with ``u_x = -S.(S_x ^ S_y)``.  Returns ``(S_t, u)``."""
    sx, sy = grid.deriv_x(s), grid.deriv_y(s)
    u, disc = grid.antideriv_x(-triple(s, sx, sy))
    _require_projection(disc, projection_tol, "M-I auxiliary field u")
    st = grid.deriv_x(np.cross(s, sy) + u[..., None] * s)
    return st, u


def rhs_lle2d(grid, s):
    """``S_t = S ^ (S_xx + S_yy)``."""
    return np.cross(s, grid.deriv_xx(s) + grid.deriv_yy(s))


def ishimori_source(grid, s, alpha):
    """``(alpha^2 / 4i) tr(S [S_y, S_x])`` evaluated with Pauli matrices.

    The trace equals ``4i S.(S_y ^ S_x)``, so the source is real; its
    imaginary part is returned as a diagnostic.
    """
    S = vec_to_matrix(s)
    Sx, Sy = vec_to_matrix(grid.deriv_x(s)), vec_to_matrix(grid.deriv_y(s))
    tr = np.trace(S @ commutator(Sy, Sx), axis1=-2, axis2=-1)
    src = alpha**2 * tr / 4j
    return src.real, float(np.max(np.abs(src.imag)))


def rhs_ishimori(grid, s, params=ModelParams(), null_tol=1e-10, leak_tol=1e-10):
    """Ishimori model in matrix form.

    ``i S_t + 1/2 [S, S_xx / 4 + alpha^2 S_yy] + i u_y S_x + i u_x S_y = 0``
    with ``alpha^2 u_yy - u_xx / 4`` equal to :func:`ishimori_source`.
    As vectors, ``S_t = -S ^ (S_xx / 4 + alpha^2 S_yy) - u_y S_x - u_x S_y``.
    Returns ``(S_t, u)``.
    """
    a = params.alpha
    src, leak = ishimori_source(grid, s, a)
    if leak > leak_tol:
        raise ImaginaryLeak(f"Ishimori source has imaginary part {leak:.3e}")
    u, _ = grid.invert_poisson_like(a**2, -0.25, src, tol=null_tol)
    S = vec_to_matrix(s)
    W = vec_to_matrix(0.25 * grid.deriv_xx(s) + a**2 * grid.deriv_yy(s))
    Sx, Sy = vec_to_matrix(grid.deriv_x(s)), vec_to_matrix(grid.deriv_y(s))
    ux, uy = grid.deriv_x(u)[..., None, None], grid.deriv_y(u)[..., None, None]
    # i S_t = -1/2 [S, W] - i u_y S_x - i u_x S_y
    St = -1j * (-0.5 * commutator(S, W)) - uy * Sx - ux * Sy
    return matrix_to_vec(St), u


def mxvii_potential(grid, s, tol=1e-10):
    """``V`` from ``V_zbar = (S_z . S_zbar)_z / 2``."""
    sz, szb = grid.deriv_z(s), grid.deriv_zbar(s)
    g = 0.5 * grid.deriv_z(np.sum(sz * szb, axis=-1))
    return grid.invert_dzbar(g, tol=tol)


def mxvii_coefficients(grid, s, V, sig=Signature.EUCLIDEAN):
    """``C1, C2`` and both readings of ``C3``.

    Returns ``(C1, C2, C3_closed, C3_printed)``; only the closed form
    ``E (3 S.S_xyy - S.S_xxx) / 4`` makes the right-hand side tangent.
    """
    E = int(as_signature(sig))
    sx, sy = grid.deriv_x(s), grid.deriv_y(s)
    sx2, sy2, sxsy = dot(sx, sx), dot(sy, sy), dot(sx, sy)
    Vb = np.conj(V)
    C1 = 3.0 / 16.0 * (sx2 + sy2 + 8 * Vb + 8 * V)
    C2 = 0.75 * (2j * Vb - 2j * V - sxsy)
    sxxx = grid.deriv_xxx(s)
    sxyy = grid.deriv_yy(sx)
    C3_closed = E * 0.25 * (3 * dot(s, sxyy) - dot(s, sxxx))
    C3_printed = -1.5 * (grid.deriv_x(Vb + V - 0.375 * sx2) + 0.5 * grid.deriv_y(sxsy))
    return C1, C2, C3_closed, C3_printed


def rhs_mxvii(grid, s, sig=Signature.EUCLIDEAN, tol=1e-10, leak_tol=1e-9):
    """Two-component model ``S_t = S_xxx/4 - 3 S_xyy/4 + C1 S_x + C2 S_y + C3 S``.

    Returns ``(S_t, V, diagnostics)`` where diagnostics hold the largest
    gap between the two printed forms of ``C3`` and the imaginary residue
    of ``C1, C2``.
    """
    s = np.asarray(s, dtype=float)
    if s.shape[-1] == 3 and np.any(s[..., 2] != 0):
        raise S3NotZero("the two-component model needs S3 == 0")
    if s.shape[-1] == 2:
        s = np.concatenate([s, np.zeros(s.shape[:-1] + (1,))], axis=-1)
    V = mxvii_potential(grid, s, tol)
    C1, C2, C3, C3p = mxvii_coefficients(grid, s, V, sig)
    leak = max(float(np.max(np.abs(C1.imag))), float(np.max(np.abs(C2.imag))))
    if leak > leak_tol:
        raise ImaginaryLeak(f"C1/C2 picked up an imaginary part {leak:.3e}")
    sx, sy = grid.deriv_x(s), grid.deriv_y(s)
    st = (
        0.25 * grid.deriv_xxx(s)
        - 0.75 * grid.deriv_yy(sx)
        + C1.real[..., None] * sx
        + C2.real[..., None] * sy
        + C3[..., None] * s
    )
    diag = {
        "c3_printed_gap": float(np.max(np.abs(np.real(C3p) - C3))),
        "imaginary_residue": leak,
    }
    return st, V, diag


def rhs_mxxii(grid, s, params=ModelParams(), projection_tol=1e-8):
    """Matrix form ``-i S_t = ([S, S_y] + 2i u S)_x / 2 + i V1 S_x / 2 - 2i b^2 S_y``.

    ``u_x = -S.(S_x ^ S_y)`` and ``V1_x = (S_x^2)_y / (4 b^2)``.  As vectors,
    ``S_t = -(S ^ S_y + u S)_x - V1 S_x / 2 + 2 b^2 S_y``.
    Returns ``(S_t, u, V1)``.
    """
    b = params.b_gauge
    if b == 0:
        raise ZeroGaugeParam("b must be nonzero")
    sx, sy = grid.deriv_x(s), grid.deriv_y(s)
    u, du = grid.antideriv_x(-triple(s, sx, sy))
    _require_projection(du, projection_tol, "M-XXII auxiliary field u")
    V1, dv = grid.antideriv_x(grid.deriv_y(dot(sx, sx)) / (4 * b * b))
    _require_projection(dv, projection_tol, "M-XXII auxiliary field V1")
    S = vec_to_matrix(s)
    Sx, Sy = vec_to_matrix(sx), vec_to_matrix(sy)
    inner = commutator(S, Sy) + 2j * u[..., None, None] * S
    rhs = 0.5 * _matrix_deriv(grid, inner, "x") + 0.5j * V1[..., None, None] * Sx - 2j * b * b * Sy
    St = 1j * rhs
    return matrix_to_vec(St), u, V1


def omega_mx(grid, k, alpha2=1.0, projection_tol=1e-8):
    """``omega = 3 k^2 + k_xx + 3 alpha^2 w`` with ``w_xx = k_yy`` (zero x-mean)."""
    w, disc = grid.invert_dxx(grid.deriv_yy(k))
    scale = max(1.0, grid.linf_norm(k))
    _require_projection(disc, projection_tol * scale, "M-X auxiliary field w")
    return 3 * k**2 + grid.deriv_xx(k) + 3 * alpha2 * w


def omega_mxi(grid, k, alpha=1.0, beta=1.0, projection_tol=1e-8, tol=1e-10):
    """``omega = alpha q_xxx + beta q_yyy - 3 alpha (v q)_x - 3 beta (w q)_y``.

    ``q`` is the zero-mean x-antiderivative of ``k``; ``v_y = q_x`` and
    ``w_x = q_y``.  Returns ``(omega, diagnostics)``; the diagnostics compare
    ``v`` with the alternative reading ``v_y = k``.
    """
    from .errors import NonSolvableConstraint

    q, disc = grid.antideriv_x(k)
    scale = max(1.0, grid.linf_norm(k))
    _require_projection(disc, projection_tol * scale, "M-XI potential q")
    qx, qy = grid.deriv_x(q), grid.deriv_y(q)
    ymean = float(np.max(np.abs(grid.ymean(qx))))
    if ymean > tol * scale:
        raise NonSolvableConstraint(f"v_y = q_x has a y-mean obstruction {ymean:.3e}")
    v, _ = grid.antideriv_y(qx)
    v_alt, _ = grid.antideriv_y(k)
    w, dw = grid.antideriv_x(qy)
    _require_projection(dw, projection_tol * scale, "M-XI auxiliary field w")
    omega = (
        alpha * grid.deriv_xxx(q)
        + beta * grid.deriv_yyy(q)
        - 3 * alpha * grid.deriv_x(v * q)
        - 3 * beta * grid.deriv_y(w * q)
    )
    return omega, {"v_reading_gap": float(np.max(np.abs(v - v_alt)))}


# test fields ----------------------------------------------------------------------


def _periodic_rotation(theta_vec):
    from .frames import expm_so3

    a, b, c = theta_vec[..., 0], theta_vec[..., 1], theta_vec[..., 2]
    O = np.zeros(theta_vec.shape[:-1] + (3, 3))
    O[..., 0, 1], O[..., 0, 2], O[..., 1, 2] = a, b, c
    O[..., 1, 0], O[..., 2, 0], O[..., 2, 1] = -a, -b, -c
    return expm_so3(O)


def admissible_spin_field(grid, seed=0, amplitude=0.3, band=2):
    """Seeded smooth unit field ``S(x, y) = R(y) T(x - c(y))``.

    ``T`` is a closed curve on the sphere, ``R(y)`` a periodic rotation and
    ``c(y)`` a periodic shift.  For such fields the line means of
    ``S.(S_x ^ S_y)`` vanish and ``S_x^2`` has a y-independent line mean, so
    the nonlocal fields of M-I and M-XXII are periodic.
    """
    rng = np.random.default_rng(seed)
    ax, ay = 2 * np.pi / grid.lx, 2 * np.pi / grid.ly

    def series(t, omega, n):
        out = np.zeros(np.shape(t) + (n,))
        for j in range(1, band + 1):
            c = rng.normal(size=(2, n))
            out += np.cos(j * omega * t)[..., None] * c[0] + np.sin(j * omega * t)[..., None] * c[1]
        return out

    X, Y = grid.mesh()
    shift = amplitude * series(grid.y, ay, 1)[:, 0] / band
    xs = X - shift[None, :]
    T = np.array([0.0, 0.0, 1.0]) + amplitude * series(xs, ax, 3) / band
    T /= np.linalg.norm(T, axis=-1, keepdims=True)
    R = _periodic_rotation(amplitude * series(grid.y, ay, 3) / band)
    S = np.einsum("yij,xyj->xyi", R, T)
    return S / np.linalg.norm(S, axis=-1, keepdims=True)


def planar_spin_field(grid, seed=0, amplitude=0.5, band=3):
    """Seeded unit field ``(cos theta, sin theta, 0)`` with smooth periodic ``theta``."""
    from .spectral import random_field

    theta = random_field(grid, seed, amplitude, band)
    return np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=-1)


SPIN_MODELS = {
    "m1": {"rhs": rhs_m1, "params": {}},
    "lle2d": {"rhs": rhs_lle2d, "params": {}},
    "ishimori": {"rhs": rhs_ishimori, "params": {"alpha": "real, nonzero"}},
    "mxvii": {"rhs": rhs_mxvii, "params": {"sig": "+1 or -1"}},
    "mxxii": {"rhs": rhs_mxxii, "params": {"b_gauge": "real, nonzero"}},
    "mx": {"rhs": omega_mx, "params": {"alpha2": "real"}},
    "mxi": {"rhs": omega_mxi, "params": {"alpha": "real", "beta": "real"}},
}
