"""Moving frames of curves in the plane and in space.

Matrix fields are arrays of shape ``(..., n, n)`` whose leading axes follow
the grid.  A frame is stored row-wise, ``F[..., i, :] = e_{i+1}``, so that
the frame equations read ``F_x = C F``, ``F_y = D F`` and ``F_t = G F``.

The y-direction matrix uses the antisymmetric layout

    D = [[0, m3, -m2], [-E m3, 0, m1], [E m2, -m1, 0]]

for which the entries of ``C_y - D_x + [C, D] = 0`` reduce to

    m1_x = tau_y + E k m2
    m2_x = tau m3 - k m1
    m3_x = k_y - tau m2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import (
    NoConvergence,
    NonTangentInput,
    ProjectionLoss,
    UnsupportedSignature,
)


class Signature(IntEnum):
    """Spin normalisation ``S.S = E``."""

    EUCLIDEAN = 1
    MINKOWSKI = -1


def as_signature(sig):
    try:
        return Signature(int(sig))
    except (TypeError, ValueError):
        raise ValueError(f"signature must be +1 or -1, got {sig!r}") from None


@dataclass(frozen=True)
class CurvatureData3:
    k: np.ndarray
    tau: np.ndarray
    sig: Signature = Signature.EUCLIDEAN


@dataclass(frozen=True)
class DCoefficients:
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray


@dataclass(frozen=True)
class GCoefficients:
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray


@dataclass(frozen=True)
class FrameField:
    """Row-stacked triad (or dyad) field, ``triad[..., i, :] = e_{i+1}``."""

    triad: np.ndarray
    sig: Signature = Signature.EUCLIDEAN

    @property
    def e1(self):
        return self.triad[..., 0, :]

    @property
    def e2(self):
        return self.triad[..., 1, :]

    @property
    def e3(self):
        if self.triad.shape[-2] < 3:
            raise AttributeError("planar frame has no e3")
        return self.triad[..., 2, :]

    def gram(self):
        return self.triad @ np.swapaxes(self.triad, -1, -2)

    def orthonormality_error(self):
        n = self.triad.shape[-1]
        return float(np.max(np.abs(self.gram() - np.eye(n)))) if self.triad.size else 0.0


# matrix builders -------------------------------------------------------------


def _zeros_like_matrix(f, n):
    f = np.asarray(f)
    dtype = np.result_type(f, float)
    return np.zeros(f.shape + (n, n), dtype=dtype)


def build_C(cd):
    k, tau, E = np.asarray(cd.k), np.asarray(cd.tau), int(cd.sig)
    C = _zeros_like_matrix(np.broadcast_to(k, np.broadcast(k, tau).shape), 3)
    C[..., 0, 1] = k
    C[..., 1, 0] = -E * k
    C[..., 1, 2] = tau
    C[..., 2, 1] = -tau
    return C


def _rotation_generator(a1, a2, a3, sig):
    E = int(sig)
    shape = np.broadcast(a1, a2, a3).shape
    M = np.zeros(shape + (3, 3), dtype=np.result_type(a1, a2, a3, float))
    M[..., 0, 1] = a3
    M[..., 0, 2] = -np.asarray(a2)
    M[..., 1, 0] = -E * np.asarray(a3)
    M[..., 1, 2] = a1
    M[..., 2, 0] = E * np.asarray(a2)
    M[..., 2, 1] = -np.asarray(a1)
    return M


def build_D(dc, sig=Signature.EUCLIDEAN):
    return _rotation_generator(dc.m1, dc.m2, dc.m3, sig)


def build_G(gc, sig=Signature.EUCLIDEAN):
    return _rotation_generator(gc.w1, gc.w2, gc.w3, sig)


def build_planar(a, sig=Signature.EUCLIDEAN):
    """The 2x2 generator ``[[0, a], [-E a, 0]]`` (C, D or G of a plane curve)."""
    a = np.asarray(a)
    M = np.zeros(a.shape + (2, 2), dtype=np.result_type(a, float))
    M[..., 0, 1] = a
    M[..., 1, 0] = -int(sig) * a
    return M


# zero curvature ----------------------------------------------------------------


def _matrix_deriv(grid, M, axis):
    op = {"x": grid.deriv_x, "y": grid.deriv_y}[axis]
    return op(M)


def zero_curvature_residual(grid, A, B, d1="x", d2="y"):
    """``d2(A) - d1(B) + [A, B]`` entrywise.

    With ``A = C`` and ``B = D`` the defaults give ``C_y - D_x + [C, D]``.
    """
    grid.check(A, B)
    if np.shape(A) != np.shape(B):
        raise ValueError("matrix fields must have the same shape")
    return _matrix_deriv(grid, A, d2) - _matrix_deriv(grid, B, d1) + A @ B - B @ A


def matrix_norm(R):
    """Largest pointwise Frobenius norm of a matrix field."""
    return float(np.max(np.sqrt(np.sum(np.abs(R) ** 2, axis=(-2, -1))))) if np.size(R) else 0.0


@dataclass
class MSolveReport:
    coefficients: DCoefficients
    iterations: int
    last_delta: float
    matrix_residual: float
    discarded: float
    history: list = field(default_factory=list)


def solve_m_coefficients(
    grid,
    cd,
    tol=1e-12,
    max_iter=50,
    relaxation=1.0,
    projection_tol=1e-8,
):
    """Picard iteration for ``m1, m2, m3`` given curvature and torsion.

    Starting from zero, each sweep applies the zero-x-mean antiderivative to
    the three right-hand sides above.  Iteration stops once the L-infinity
    change between sweeps drops below ``tol``.  The per-line x-means that the
    antiderivative had to drop are checked against ``projection_tol``: data
    for which they stay large admit no periodic ``D`` at all.
    """
    if not 0 < relaxation <= 1:
        raise ValueError("relaxation must lie in (0, 1]")
    k, tau, E = np.asarray(cd.k), np.asarray(cd.tau), int(cd.sig)
    grid.check(k, tau)
    tau_y = grid.deriv_y(tau)
    k_y = grid.deriv_y(k)
    m1 = np.zeros_like(k, dtype=float)
    m2 = np.zeros_like(m1)
    m3 = np.zeros_like(m1)
    history = []
    delta = np.inf
    for it in range(1, max_iter + 1):
        n1, d1 = grid.antideriv_x(tau_y + E * k * m2)
        n2, d2 = grid.antideriv_x(tau * m3 - k * m1)
        n3, d3 = grid.antideriv_x(k_y - tau * m2)
        delta = max(
            float(np.max(np.abs(n1 - m1))),
            float(np.max(np.abs(n2 - m2))),
            float(np.max(np.abs(n3 - m3))),
        )
        history.append(delta)
        w = relaxation
        m1, m2, m3 = (1 - w) * m1 + w * n1, (1 - w) * m2 + w * n2, (1 - w) * m3 + w * n3
        if delta < tol:
            break
    else:
        raise NoConvergence(max_iter, delta)
    discarded = max(float(np.max(np.abs(d))) for d in (d1, d2, d3))
    if discarded > projection_tol:
        raise ProjectionLoss(
            f"x-antiderivatives dropped a mean of {discarded:.3e}; "
            "these curvature data admit no periodic m-coefficients",
            discarded=discarded,
        )
    dc = DCoefficients(m1, m2, m3)
    R = zero_curvature_residual(grid, build_C(cd), build_D(dc, cd.sig))
    return MSolveReport(dc, it, delta, matrix_norm(R), discarded, history)


def curve2d_m(grid, k, tol=1e-10):
    """``m = antideriv_x(k_y)`` for a plane curve; returns ``(m, discarded)``.

    Raises :class:`ProjectionLoss` if the x-mean of ``k_y`` exceeds ``tol``
    relative to ``max|k_y|``.
    """
    ky = grid.deriv_y(k)
    m, disc = grid.antideriv_x(ky)
    scale = max(float(np.max(np.abs(ky))), 1.0)
    worst = float(np.max(np.abs(disc)))
    if worst > tol * scale:
        raise ProjectionLoss(f"k_y has x-mean {worst:.3e}", discarded=disc)
    return m, disc


# exponentials of rotation generators -------------------------------------------


def expm_so3(Omega):
    """Matrix exponential of an antisymmetric 3x3 field by Rodrigues' formula."""
    Omega = np.asarray(Omega, dtype=float)
    a = Omega[..., 0, 1]
    b = Omega[..., 0, 2]
    c = Omega[..., 1, 2]
    th2 = a * a + b * b + c * c
    th = np.sqrt(th2)
    small = th2 < 1e-12
    safe = np.where(small, 1.0, th)
    s1 = np.where(small, 1.0 - th2 / 6.0 + th2 * th2 / 120.0, np.sin(safe) / safe)
    s2 = np.where(small, 0.5 - th2 / 24.0 + th2 * th2 / 720.0, (1.0 - np.cos(safe)) / safe**2)
    O2 = Omega @ Omega
    return np.eye(3) + s1[..., None, None] * Omega + s2[..., None, None] * O2


def _is_antisymmetric(M, tol=1e-12):
    scale = max(1.0, float(np.max(np.abs(M)))) if np.size(M) else 1.0
    return float(np.max(np.abs(M + np.swapaxes(M, -1, -2)))) <= tol * scale


_GAUSS = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)


def magnus4_step(C1, C2, h):
    """Fourth-order Magnus generator from the two Gauss-node values."""
    return 0.5 * h * (C1 + C2) + (np.sqrt(3.0) / 12.0) * h * h * (C2 @ C1 - C1 @ C2)


def propagate(C_at, F0, h, nsteps, x0=0.0):
    """Integrate ``F' = C(x) F`` with Magnus-4 steps; returns all ``nsteps + 1`` frames.

    ``C_at(x)`` must return an antisymmetric generator (leading batch axes allowed).
    """
    F = np.asarray(F0, dtype=float)
    out = np.empty((nsteps + 1,) + F.shape)
    out[0] = F
    for s in range(nsteps):
        x = x0 + s * h
        Om = magnus4_step(C_at(x + _GAUSS[0] * h), C_at(x + _GAUSS[1] * h), h)
        F = expm_so3(Om) @ F
        out[s + 1] = F
    return out


def _line_interpolant(values, length):
    """Trigonometric interpolant of periodic samples along the first axis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    coef = np.fft.rfft(values, axis=0) / n
    j = np.arange(coef.shape[0])
    w = np.where((j == 0) | ((n % 2 == 0) & (j == n // 2)), 1.0, 2.0)
    kk = 2.0 * np.pi * j / length

    def at(x):
        ph = np.exp(1j * kk * x) * w
        return np.real(np.tensordot(ph, coef, axes=(0, 0)))

    return at


def reconstruct_frame_x(k_line, tau_line, initial, length, sig=Signature.EUCLIDEAN, substeps=1):
    """Integrate the Frenet equations along one x-line.

    ``k_line`` and ``tau_line`` are periodic samples over ``[0, length)``.
    Each grid cell is crossed with ``substeps`` Magnus-4 steps using the
    trigonometric interpolant of the data at the Gauss nodes.  Returns a
    :class:`FrameField` with ``n * substeps + 1`` frames; the last one sits at
    ``x = length``.
    """
    if as_signature(sig) != Signature.EUCLIDEAN:
        raise UnsupportedSignature("frame reconstruction is only defined for E = +1")
    k_line = np.asarray(k_line, dtype=float)
    tau_line = np.asarray(tau_line, dtype=float)
    n = k_line.shape[0]
    kf = _line_interpolant(k_line, length)
    tf = _line_interpolant(tau_line, length)

    def C_at(x):
        return build_C(CurvatureData3(kf(x), tf(x)))

    F = propagate(C_at, np.asarray(initial, dtype=float), length / (n * substeps), n * substeps)
    return FrameField(F, Signature.EUCLIDEAN)


def evolve_frame_step(frame, G, dt):
    """One exponential-map step ``F <- exp(G dt) F`` for an E = +1 frame."""
    if frame.sig != Signature.EUCLIDEAN:
        raise UnsupportedSignature("frame evolution is only defined for E = +1")
    G = np.asarray(G, dtype=float)
    if not _is_antisymmetric(G):
        raise ValueError("generator is not antisymmetric")
    return FrameField(expm_so3(G * dt) @ frame.triad, frame.sig)


def connection_from_frames(grid, frames):
    """``(F_x F^T, F_y F^T)`` for a periodic E = +1 frame field of shape ``(nx, ny, 3, 3)``."""
    Ft = np.swapaxes(frames, -1, -2)
    return grid.deriv_x(frames) @ Ft, grid.deriv_y(frames) @ Ft


# M-0 decomposition ---------------------------------------------------------------


def m0_decompose(s_t, s_x, s_y, basis, tol=1e-10):
    """Expand spin derivatives in ``(e2, e3)`` of an orthonormal basis with ``e1 = S``.

    Returns a dict with arrays ``a, b, c`` of shape ``(..., 2)`` holding the
    coefficients along ``e2`` and ``e3``, and ``residual`` (largest
    reconstruction error of the three expansions).
    """
    if basis.sig != Signature.EUCLIDEAN:
        raise UnsupportedSignature("M-0 decomposition needs an orthonormal basis")
    e1, e2, e3 = basis.e1, basis.e2, basis.e3
    out = {}
    residual = 0.0
    for name, v in (("a", s_t), ("b", s_x), ("c", s_y)):
        v = np.asarray(v, dtype=float)
        along = np.sum(v * e1, axis=-1)
        scale = max(1.0, float(np.max(np.abs(v)))) if v.size else 1.0
        if v.size and float(np.max(np.abs(along))) > tol * scale:
            raise NonTangentInput(
                f"derivative '{name}' has a component {np.max(np.abs(along)):.3e} along S"
            )
        c2 = np.sum(v * e2, axis=-1)
        c3 = np.sum(v * e3, axis=-1)
        out[name] = np.stack([c2, c3], axis=-1)
        rec = c2[..., None] * e2 + c3[..., None] * e3
        if v.size:
            residual = max(residual, float(np.max(np.abs(rec - v))))
    out["residual"] = residual
    return out


# compatible curvature data ---------------------------------------------------------


def compatible_curvature(grid, amplitude=0.1, seed=0, band=3):
    """Seeded random curvature and torsion that admit periodic m-coefficients.

    Generic periodic ``k, tau`` do not: the x-monodromy of the Frenet system
    has to be the identity on every line.  Fields that are odd in x (sine
    series) satisfy this automatically, because ``C(-x) = -C(x)`` makes the
    frame along each line retrace itself.  Both fields are random sine-cosine
    products with ``|jx|, |jy| <= band`` scaled to ``max|.| == amplitude``.
    """
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh()
    ax = 2.0 * np.pi / grid.lx
    ay = 2.0 * np.pi / grid.ly

    def odd_field():
        f = np.zeros(grid.shape)
        for a in range(1, band + 1):
            for b in range(0, band + 1):
                f += rng.normal() * np.sin(a * ax * X) * np.cos(b * ay * Y + rng.uniform(0, 2 * np.pi))
        return amplitude * f / np.max(np.abs(f))

    k = odd_field()
    return CurvatureData3(k, odd_field(), Signature.EUCLIDEAN)
