"""Immersed surfaces over a periodic parameter box.

A :class:`SurfacePatch` is ``r = r_per(x, y) + lin_x * x + lin_y * y`` with a
periodic part differentiated spectrally, or a patch with closed-form
derivatives (used for charts that are not periodic, such as a spherical band).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateImmersion, GaugeViolation, SingularMetric
from .frames import CurvatureData3, FrameField, Signature, build_C, matrix_norm
from .spectral import Grid2D

_DERIV_KEYS = ("r_x", "r_y", "r_xx", "r_xy", "r_yy")


def _dot(a, b):
    return np.sum(a * b, axis=-1)


@dataclass
class SurfacePatch:
    grid: Grid2D
    r_per: np.ndarray | None = None
    lin_x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    lin_y: np.ndarray = field(default_factory=lambda: np.zeros(3))
    analytic: dict | None = None
    name: str = "surface"

    def __post_init__(self):
        if self.r_per is None and self.analytic is None:
            raise ValueError("a patch needs a periodic part or closed-form derivatives")
        if self.analytic is not None:
            missing = [k for k in ("r",) + _DERIV_KEYS if k not in self.analytic]
            if missing:
                raise ValueError(f"closed-form patch is missing {missing}")
        r = self.position()
        if not np.all(np.isfinite(r)):
            raise DegenerateImmersion("surface samples are not finite")
        r_x, r_y = self.derivatives()[:2]
        self.min_area_element = float(np.min(np.linalg.norm(np.cross(r_x, r_y), axis=-1)))
        if self.min_area_element < 1e-12:
            raise DegenerateImmersion(f"r_x ^ r_y vanishes (min norm {self.min_area_element:.3e})")

    @property
    def periodic(self):
        return self.r_per is not None

    def position(self):
        if self.analytic is not None:
            return self.analytic["r"]
        X, Y = self.grid.mesh()
        return self.r_per + X[..., None] * self.lin_x + Y[..., None] * self.lin_y

    def derivatives(self):
        """``(r_x, r_y, r_xx, r_xy, r_yy)``."""
        if self.analytic is not None:
            return tuple(self.analytic[k] for k in _DERIV_KEYS)
        g, r = self.grid, self.r_per
        return (
            g.deriv_x(r) + self.lin_x,
            g.deriv_y(r) + self.lin_y,
            g.deriv_xx(r),
            g.deriv_xy(r),
            g.deriv_yy(r),
        )


# oracle surfaces --------------------------------------------------------------------


def plane(grid):
    return SurfacePatch(grid, np.zeros(grid.shape + (3,)), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), name="plane")


def torus(grid, R=2.0, rho=0.5):
    """``(R + rho cos v)(cos u, sin u, 0) + (0, 0, rho sin v)``, ``(u, v) = 2 pi (x/lx, y/ly)``."""
    if not R > rho > 0:
        raise DegenerateImmersion("torus needs R > rho > 0")
    X, Y = grid.mesh()
    u, v = 2 * math.pi * X / grid.lx, 2 * math.pi * Y / grid.ly
    r = np.stack([(R + rho * np.cos(v)) * np.cos(u), (R + rho * np.cos(v)) * np.sin(u), rho * np.sin(v)], axis=-1)
    return SurfacePatch(grid, r, name=f"torus:{R:g},{rho:g}")


def torus_closed_forms(grid, R=2.0, rho=0.5):
    """Closed-form ``E, F, G, L, M, N`` of :func:`torus`.

    ``r_x ^ r_y`` points outward, along ``(cos v cos u, cos v sin u, sin v)``.
    """
    X, Y = grid.mesh()
    v = 2 * math.pi * Y / grid.ly
    su, sv = 2 * math.pi / grid.lx, 2 * math.pi / grid.ly
    w = R + rho * np.cos(v)
    return {
        "e_form": (w * su) ** 2,
        "f_form": np.zeros_like(w),
        "g_form": np.full_like(w, (rho * sv) ** 2),
        "l_form": -w * np.cos(v) * su**2,
        "m_form": np.zeros_like(w),
        "n_form": np.full_like(w, -rho * sv**2),
    }


CYLINDER_PROFILES = {"circle": 0.0, "oval": 0.3}


def cylinder(grid, profile="circle"):
    """Generalised cylinder ``(X(x), Y(x), y)`` over a closed unit-speed plane curve.

    The curve has tangent angle ``theta = s + (eps/2) sin 2s`` with
    ``s = 2 pi x / lx``, hence curvature ``kappa = (2 pi / lx)(1 + eps cos 2s)``;
    the two-fold symmetry closes it.  Returns ``(patch, kappa)``.
    """
    eps = CYLINDER_PROFILES[profile]
    s = 2 * math.pi * grid.x / grid.lx
    theta = s + 0.5 * eps * np.sin(2 * s)
    kappa = (2 * math.pi / grid.lx) * (1 + eps * np.cos(2 * s))
    from .spectral import Grid1D

    g1 = Grid1D(grid.nx, grid.lx)
    cx, dcx = g1.antideriv_x(np.cos(theta))
    cy, dcy = g1.antideriv_x(np.sin(theta))
    if max(abs(dcx), abs(dcy)) > 1e-12:
        raise DegenerateImmersion("profile curve does not close")
    r = np.zeros(grid.shape + (3,))
    r[..., 0] = cx[:, None]
    r[..., 1] = cy[:, None]
    patch = SurfacePatch(grid, r, lin_y=np.array([0, 0, 1.0]), name=f"cylinder:{profile}")
    return patch, np.broadcast_to(kappa[:, None], grid.shape).copy()


def graph(grid, h):
    """``(x, y, h(x, y))`` for a periodic height field ``h``."""
    h = np.asarray(h, dtype=float)
    grid.check(h)
    r = np.zeros(grid.shape + (3,))
    r[..., 2] = h
    return SurfacePatch(grid, r, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), name="graph")


def sphere_band(grid, R=1.0, half_width=1.0):
    """Mercator chart of a sphere of radius ``R`` with closed-form derivatives.

    ``x`` is longitude scaled to ``2 pi``; ``eta = half_width (2 y / ly - 1)``
    is the Mercator latitude coordinate, so the metric is conformal with
    factor ``(R sech eta)^2`` times the scale factors.
    """
    X, Y = grid.mesh()
    a = 2 * math.pi / grid.lx
    b = 2 * half_width / grid.ly
    u = a * X
    eta = half_width * (2 * Y / grid.ly - 1)
    sh, th = 1 / np.cosh(eta), np.tanh(eta)
    cu, su = np.cos(u), np.sin(u)
    r = R * np.stack([sh * cu, sh * su, th], axis=-1)
    # d/deta: sech' = -sech tanh, tanh' = sech^2
    r_u = R * np.stack([-sh * su, sh * cu, 0 * sh], axis=-1)
    r_e = R * np.stack([-sh * th * cu, -sh * th * su, sh**2], axis=-1)
    r_uu = R * np.stack([-sh * cu, -sh * su, 0 * sh], axis=-1)
    r_ue = R * np.stack([sh * th * su, -sh * th * cu, 0 * sh], axis=-1)
    d_shth = sh * (sh**2 - th**2)  # d(sech tanh)/deta
    r_ee = R * np.stack([-d_shth * cu, -d_shth * su, -2 * sh**2 * th], axis=-1)
    analytic = {
        "r": r,
        "r_x": a * r_u,
        "r_y": b * r_e,
        "r_xx": a * a * r_uu,
        "r_xy": a * b * r_ue,
        "r_yy": b * b * r_ee,
        "scale": (a, b),
        "eta": eta,
    }
    return SurfacePatch(grid, analytic=analytic, name=f"sphere_band:{R:g}")


def from_name(grid, spec, height=None):
    """Oracle surface from ``"plane"``, ``"torus:R,rho"``, ``"cylinder:profile"`` or ``"graph[:path]"``.

    ``graph:path`` reads the height field from a snapshot; plain ``"graph"``
    takes it from ``height``.
    """
    kind, _, arg = spec.partition(":")
    if kind == "plane":
        return plane(grid)
    if kind == "torus":
        R, rho = (float(t) for t in arg.split(",")) if arg else (2.0, 0.5)
        return torus(grid, R, rho)
    if kind == "cylinder":
        return cylinder(grid, arg or "circle")[0]
    if kind == "graph":
        if arg:
            from .io import read_snapshot

            height = read_snapshot(arg).values
        if height is None:
            raise ValueError("graph surfaces need a height field")
        return graph(grid, height)
    raise ValueError(f"unknown surface {spec!r}")


# forms ------------------------------------------------------------------------------


@dataclass
class FundamentalForms:
    grid: Grid2D
    e_form: np.ndarray
    f_form: np.ndarray
    g_form: np.ndarray
    l_form: np.ndarray
    m_form: np.ndarray
    n_form: np.ndarray
    n_vec: np.ndarray
    r_x: np.ndarray
    r_y: np.ndarray
    metric_derivs: dict | None = None  # closed-form d_k g_ij when available

    @property
    def metric(self):
        return np.stack([np.stack([self.e_form, self.f_form], -1), np.stack([self.f_form, self.g_form], -1)], -2)

    @property
    def second(self):
        return np.stack([np.stack([self.l_form, self.m_form], -1), np.stack([self.m_form, self.n_form], -1)], -2)


def fundamental_forms(p):
    r_x, r_y, r_xx, r_xy, r_yy = p.derivatives()
    cross = np.cross(r_x, r_y)
    norm = np.linalg.norm(cross, axis=-1)
    if np.min(norm) < 1e-12:
        raise DegenerateImmersion(f"r_x ^ r_y vanishes (min norm {np.min(norm):.3e})")
    n = cross / norm[..., None]
    E, F, G = _dot(r_x, r_x), _dot(r_x, r_y), _dot(r_y, r_y)
    md = None
    if p.analytic is not None:
        md = {
            "e_x": 2 * _dot(r_xx, r_x),
            "e_y": 2 * _dot(r_xy, r_x),
            "f_x": _dot(r_xx, r_y) + _dot(r_x, r_xy),
            "f_y": _dot(r_xy, r_y) + _dot(r_x, r_yy),
            "g_x": 2 * _dot(r_xy, r_y),
            "g_y": 2 * _dot(r_yy, r_y),
        }
    return FundamentalForms(
        p.grid, E, F, G, _dot(n, r_xx), _dot(n, r_xy), _dot(n, r_yy), n, r_x, r_y, md
    )


def _inverse_metric(ff, tol=1e-14):
    det = ff.e_form * ff.g_form - ff.f_form**2
    scale = np.max(np.abs(ff.e_form)) * np.max(np.abs(ff.g_form))
    if np.min(det) <= tol * max(scale, 1.0):
        raise SingularMetric(f"metric determinant reaches {np.min(det):.3e}")
    ginv = np.empty(det.shape + (2, 2))
    ginv[..., 0, 0] = ff.g_form / det
    ginv[..., 0, 1] = ginv[..., 1, 0] = -ff.f_form / det
    ginv[..., 1, 1] = ff.e_form / det
    return ginv


def _metric_derivatives(ff):
    """``dg[k, i, j] = d g_ij / d x^k``."""
    if ff.metric_derivs is not None:
        m = ff.metric_derivs
        ex, ey, fx, fy, gx, gy = (m[k] for k in ("e_x", "e_y", "f_x", "f_y", "g_x", "g_y"))
    else:
        d = ff.grid
        ex, ey = d.deriv_x(ff.e_form), d.deriv_y(ff.e_form)
        fx, fy = d.deriv_x(ff.f_form), d.deriv_y(ff.f_form)
        gx, gy = d.deriv_x(ff.g_form), d.deriv_y(ff.g_form)
    return np.array([[[ex, fx], [fx, gx]], [[ey, fy], [fy, gy]]])


@dataclass
class ChristoffelField:
    """``gamma[k, i, j]`` holds Gamma^{k+1}_{(i+1)(j+1)}."""

    gamma: np.ndarray

    def __call__(self, k, i, j):
        """One-based access, ``ch(1, 1, 2)`` is Gamma^1_12."""
        return self.gamma[k - 1, i - 1, j - 1]


def christoffel(ff):
    """Christoffel symbols of the second kind from the metric and its derivatives."""
    ginv = _inverse_metric(ff)
    dg = _metric_derivatives(ff)
    gam = np.zeros((2, 2, 2) + ff.e_form.shape)
    for k in range(2):
        for i in range(2):
            for j in range(i, 2):
                acc = 0.0
                for l in range(2):
                    acc = acc + 0.5 * ginv[..., k, l] * (dg[i, l, j] + dg[j, i, l] - dg[l, i, j])
                gam[k, i, j] = acc
                gam[k, j, i] = acc
    return ChristoffelField(gam)


def weingarten(ff):
    """``p_i = -b_1j g^ji`` and ``q_i = -b_2j g^ji``; returns ``(p1, p2, q1, q2)``."""
    ginv = _inverse_metric(ff)
    b = ff.second
    p = [-(b[..., 0, 0] * ginv[..., 0, i] + b[..., 0, 1] * ginv[..., 1, i]) for i in range(2)]
    q = [-(b[..., 1, 0] * ginv[..., 0, i] + b[..., 1, 1] * ginv[..., 1, i]) for i in range(2)]
    return p[0], p[1], q[0], q[1]


def gauss_weingarten_matrices(ff, ch=None):
    """``A`` and ``B`` with ``Z_x = A Z``, ``Z_y = B Z`` for ``Z = (r_x, r_y, n)``."""
    if ch is None:
        ch = christoffel(ff)
    p1, p2, q1, q2 = weingarten(ff)
    shape = ff.e_form.shape + (3, 3)
    A, B = np.zeros(shape), np.zeros(shape)
    A[..., 0, :] = np.stack([ch(1, 1, 1), ch(2, 1, 1), ff.l_form], -1)
    A[..., 1, :] = np.stack([ch(1, 1, 2), ch(2, 1, 2), ff.m_form], -1)
    A[..., 2, :2] = np.stack([p1, p2], -1)
    B[..., 0, :] = np.stack([ch(1, 1, 2), ch(2, 1, 2), ff.m_form], -1)
    B[..., 1, :] = np.stack([ch(1, 2, 2), ch(2, 2, 2), ff.n_form], -1)
    B[..., 2, :2] = np.stack([q1, q2], -1)
    return A, B


def _d(grid, f, k):
    return grid.deriv_x(f) if k == 0 else grid.deriv_y(f)


def gauss_codazzi_residual(p, ff=None):
    """Gauss, Codazzi and matrix-form residuals of a periodic patch.

    ``ff`` may be passed to test forms that do not come from ``p`` (for
    example a tampered second form).  Gauss uses
    ``R^l_ijk = b_ij b^l_k - b_ik b^l_j`` with the curvature tensor
    ``d_k G^l_ij - d_j G^l_ik + G^s_ij G^l_ks - G^s_ik G^l_js``; Codazzi uses
    ``d_k b_ij - d_j b_ik = G^s_ik b_sj - G^s_ij b_sk``.  Each group reports
    the max-norm residual and the same relative to the largest term.
    """
    if not p.periodic:
        raise ValueError("Gauss-Codazzi residuals need a periodic patch")
    if ff is None:
        ff = fundamental_forms(p)
    g = ff.grid
    ch = christoffel(ff)
    G = ch.gamma
    ginv = _inverse_metric(ff)
    b = np.moveaxis(ff.second, (-2, -1), (0, 1))
    gi = np.moveaxis(ginv, (-2, -1), (0, 1))
    b_up = np.einsum("lm...,km...->lk...", gi, b)  # b^l_k
    dG = np.array([[[[_d(g, G[l, i, j], k) for k in range(2)] for j in range(2)] for i in range(2)] for l in range(2)])
    db = np.array([[[_d(g, b[i, j], k) for k in range(2)] for j in range(2)] for i in range(2)])

    gauss_abs = gauss_scale = 0.0
    for l in range(2):
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    if j == k:
                        continue
                    curv = dG[l, i, j, k] - dG[l, i, k, j]
                    quad = sum(G[s, i, j] * G[l, k, s] - G[s, i, k] * G[l, j, s] for s in range(2))
                    rhs = b[i, j] * b_up[l, k] - b[i, k] * b_up[l, j]
                    gauss_abs = max(gauss_abs, float(np.max(np.abs(curv + quad - rhs))))
                    gauss_scale = max(gauss_scale, *(float(np.max(np.abs(t))) for t in (curv, quad, rhs)))

    cod_abs = cod_scale = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                if j == k:
                    continue
                lhs = db[i, j, k] - db[i, k, j]
                rhs = sum(G[s, i, k] * b[s, j] - G[s, i, j] * b[s, k] for s in range(2))
                cod_abs = max(cod_abs, float(np.max(np.abs(lhs - rhs))))
                cod_scale = max(cod_scale, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))

    A, B = gauss_weingarten_matrices(ff, ch)
    M = g.deriv_y(A) - g.deriv_x(B) + A @ B - B @ A
    mat_abs = matrix_norm(M)
    mat_scale = max(matrix_norm(g.deriv_y(A)), matrix_norm(A @ B), 1e-300)

    def rel(a, s):
        return a / s if s > 0 else 0.0

    return {
        "gauss": gauss_abs,
        "codazzi": cod_abs,
        "matrix": mat_abs,
        "gauss_relative": rel(gauss_abs, gauss_scale),
        "codazzi_relative": rel(cod_abs, cod_scale),
        "matrix_relative": rel(mat_abs, mat_scale),
    }


# trihedral ----------------------------------------------------------------------------


#: the weight of L in k; printed as one half, whereas e1_x = L e2 for unit-speed x-lines
K_FROM_L = 0.5


@dataclass
class Trihedral:
    frame: FrameField
    k: np.ndarray
    tau: np.ndarray
    diagnostics: dict


def trihedral(p, tol=1e-8):
    """``e1 = r_x / sqrt(E)``, ``e2 = n``, ``e3 = e1 ^ e2`` with ``k = L/2``, ``tau = M / sqrt(G)``.

    Requires ``E = 1`` and ``F = 0`` within ``tol``.  ``diagnostics`` holds
    the residual of ``(e_j)_x = C(k, tau) (e_j)`` for the returned ``k``
    (``sfe_residual``) and for ``k = L`` (``sfe_residual_k_equals_l``).
    """
    ff = fundamental_forms(p)
    e_dev = float(np.max(np.abs(ff.e_form - 1)))
    f_dev = float(np.max(np.abs(ff.f_form)))
    if e_dev > tol or f_dev > tol:
        raise GaugeViolation(
            f"trihedral needs E = 1 and F = 0 (|E - 1| = {e_dev:.3e}, |F| = {f_dev:.3e})",
            e_deviation=e_dev,
            f_deviation=f_dev,
        )
    e1 = ff.r_x / np.sqrt(ff.e_form)[..., None]
    e2 = ff.n_vec
    e3 = np.cross(e1, e2)
    triad = np.stack([e1, e2, e3], axis=-2)
    frame = FrameField(triad, Signature.EUCLIDEAN)
    k = K_FROM_L * ff.l_form
    tau = ff.m_form / np.sqrt(ff.g_form)
    diag = {"e_deviation": e_dev, "f_deviation": f_dev, "orthonormality": frame.orthonormality_error()}
    if p.periodic:
        tx = p.grid.deriv_x(triad)
        for key, kk in (("sfe_residual", k), ("sfe_residual_k_equals_l", ff.l_form)):
            C = build_C(CurvatureData3(kk, tau, Signature.EUCLIDEAN))
            diag[key] = float(np.max(np.abs(tx - C @ triad)))
    return Trihedral(frame, k, tau, diag)
