"""Fourier machinery on doubly periodic rectangles.

Fields are plain numpy arrays whose first two axes are (x, y); any trailing
axes (vector components, matrix entries) are carried along untouched.  A
:class:`Grid2D` owns the wavenumbers and supplies every differential and
anti-differential operator used elsewhere in the package.

Conventions
-----------
* ``x_j = j * lx / nx`` for ``j = 0 .. nx-1`` (same for y).
* ``d/dz = (d/dx - i d/dy) / 2`` and ``d/dzbar = (d/dx + i d/dy) / 2``.
* Odd-order derivatives zero the unmatched Nyquist mode.
* The x-antiderivative is the zero-x-mean one; the per-line mean of the
  integrand that had to be dropped is returned next to the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, NonSolvableConstraint, NullModeConflict

#: relative tolerance for solvability checks of constraint inversions
DEFAULT_TOL = 1e-10


def _wavenumbers(n, length):
    return 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)


def _odd(k):
    k = k.copy()
    k[len(k) // 2] = 0.0
    return k


def _expand(symbol, f):
    """Broadcast a symbol over trailing component axes of ``f``."""
    extra = f.ndim - symbol.ndim
    return symbol.reshape(symbol.shape + (1,) * extra)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on ``[0, lx) x [0, ly)``."""

    nx: int
    ny: int
    lx: float = 2.0 * np.pi
    ly: float = 2.0 * np.pi

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        for name in ("lx", "ly"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dx * self.nx != self.lx or self.dy * self.ny != self.ly:
            raise ValueError("domain length is not an exact multiple of the spacing")

    # geometry --------------------------------------------------------------
    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def area(self):
        return self.lx * self.ly

    @cached_property
    def x(self):
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self):
        return np.arange(self.ny) * self.dy

    def mesh(self):
        """Coordinate arrays ``X, Y`` of shape ``(nx, ny)``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self):
        return _wavenumbers(self.nx, self.lx)[:, None]

    @cached_property
    def ky(self):
        return _wavenumbers(self.ny, self.ly)[None, :]

    @cached_property
    def kx_odd(self):
        return _odd(_wavenumbers(self.nx, self.lx))[:, None]

    @cached_property
    def ky_odd(self):
        return _odd(_wavenumbers(self.ny, self.ly))[None, :]

    @cached_property
    def dealias_mask(self):
        jx = np.abs(np.fft.fftfreq(self.nx, 1.0 / self.nx))[:, None]
        jy = np.abs(np.fft.fftfreq(self.ny, 1.0 / self.ny))[None, :]
        return (jx <= self.nx // 3) & (jy <= self.ny // 3)

    def check(self, *fields):
        for f in fields:
            if np.shape(f)[:2] != self.shape:
                raise GridMismatch(
                    f"field of shape {np.shape(f)} does not live on a {self.shape} grid"
                )

    # transforms ------------------------------------------------------------
    def fft(self, f):
        self.check(f)
        return np.fft.fft2(f, axes=(0, 1))

    def ifft(self, fh, real=False):
        out = np.fft.ifft2(fh, axes=(0, 1))
        return out.real if real else out

    def apply_symbol(self, f, symbol, real_symbol_parity=True):
        """Multiply ``f`` by ``symbol`` in Fourier space.

        The result is returned real when ``f`` is real and the symbol maps
        real fields to real fields (``real_symbol_parity``).
        """
        fh = self.fft(f)
        out = self.ifft(fh * _expand(symbol, fh))
        if real_symbol_parity and np.isrealobj(f):
            return out.real
        return out

    # derivatives -------------------------------------------------------------
    def deriv_x(self, f):
        return self.apply_symbol(f, 1j * self.kx_odd * np.ones_like(self.ky))

    def deriv_y(self, f):
        return self.apply_symbol(f, 1j * self.ky_odd * np.ones_like(self.kx))

    def deriv_xx(self, f):
        return self.apply_symbol(f, -(self.kx**2) * np.ones_like(self.ky))

    def deriv_yy(self, f):
        return self.apply_symbol(f, -(self.ky**2) * np.ones_like(self.kx))

    def deriv_xy(self, f):
        return self.apply_symbol(f, -self.kx_odd * self.ky_odd)

    def deriv_xxx(self, f):
        return self.apply_symbol(f, -1j * self.kx_odd**3 * np.ones_like(self.ky))

    def deriv_yyy(self, f):
        return self.apply_symbol(f, -1j * self.ky_odd**3 * np.ones_like(self.kx))

    def laplacian(self, f):
        return self.apply_symbol(f, -(self.kx**2) - self.ky**2)

    @cached_property
    def dz_symbol(self):
        return 0.5 * (1j * self.kx_odd + self.ky_odd)

    @cached_property
    def dzbar_symbol(self):
        return 0.5 * (1j * self.kx_odd - self.ky_odd)

    def deriv_z(self, f):
        """``(f_x - i f_y) / 2``; always complex."""
        return self.apply_symbol(f, self.dz_symbol, real_symbol_parity=False)

    def deriv_zbar(self, f):
        """``(f_x + i f_y) / 2``; always complex."""
        return self.apply_symbol(f, self.dzbar_symbol, real_symbol_parity=False)

    # inverses ----------------------------------------------------------------
    def xmean(self, f):
        """Per-y-line average over x (shape ``(ny, ...)``)."""
        self.check(f)
        return np.mean(f, axis=0)

    def ymean(self, f):
        self.check(f)
        return np.mean(f, axis=1)

    def mean(self, f):
        self.check(f)
        return np.mean(f, axis=(0, 1))

    def antideriv_x(self, f):
        """Zero-x-mean antiderivative along x.

        Returns ``(g, discarded_mean)`` with ``deriv_x(g) == f - xmean(f)``
        (up to the Nyquist mode) and ``discarded_mean == xmean(f)``.
        """
        self.check(f)
        fh = np.fft.fft(f, axis=0)
        k = self.kx_odd[:, 0]
        inv = np.zeros_like(k, dtype=complex)
        nz = k != 0
        inv[nz] = 1.0 / (1j * k[nz])
        gh = fh * inv.reshape((-1,) + (1,) * (f.ndim - 1))
        g = np.fft.ifft(gh, axis=0)
        if np.isrealobj(f):
            g = g.real
        return g, np.mean(f, axis=0)

    def antideriv_y(self, f):
        """Zero-y-mean antiderivative along y; returns ``(g, ymean(f))``."""
        self.check(f)
        fh = np.fft.fft(f, axis=1)
        k = self.ky_odd[0]
        inv = np.zeros_like(k, dtype=complex)
        nz = k != 0
        inv[nz] = 1.0 / (1j * k[nz])
        gh = fh * inv.reshape((1, -1) + (1,) * (f.ndim - 2))
        g = np.fft.ifft(gh, axis=1)
        if np.isrealobj(f):
            g = g.real
        return g, np.mean(f, axis=1)

    def invert_dzbar(self, g, tol=DEFAULT_TOL):
        """Zero-mean ``V`` with ``deriv_zbar(V) == g``.

        Raises :class:`NonSolvableConstraint` when the mean of ``g`` is not
        negligible relative to ``max|g|``.
        """
        self.check(g)
        scale = float(np.max(np.abs(g))) if np.size(g) else 0.0
        m = np.abs(self.mean(g))
        if np.any(m > tol * max(scale, np.finfo(float).tiny)) and scale > 0:
            raise NonSolvableConstraint(
                f"d/dzbar right-hand side has mean {np.max(m):.3e} (max |g| = {scale:.3e})"
            )
        sym = self.dzbar_symbol
        inv = np.zeros_like(sym)
        nz = sym != 0
        inv[nz] = 1.0 / sym[nz]
        return self.apply_symbol(g, inv, real_symbol_parity=False)

    def invert_dz(self, g, tol=DEFAULT_TOL):
        """Zero-mean ``W`` with ``deriv_z(W) == g`` (conjugate of :meth:`invert_dzbar`)."""
        return np.conj(self.invert_dzbar(np.conj(g), tol=tol))

    def invert_poisson_like(self, a_yy, a_xx, rhs, tol=DEFAULT_TOL):
        """Solve ``a_yy u_yy + a_xx u_xx = rhs`` for zero-mean ``u``.

        Returns ``(u, discarded)`` where ``discarded`` is the largest rhs
        amplitude sitting on a null mode of the operator (the mean mode
        included).  Raises :class:`NullModeConflict` if that amplitude is
        above ``tol`` relative to the largest rhs amplitude.
        """
        sym = -a_yy * self.ky**2 - a_xx * self.kx**2
        return self._invert_symbol(sym, rhs, tol)

    def invert_dxx(self, rhs, tol=None):
        """Zero-x-mean ``w`` with ``w_xx = rhs``; returns ``(w, xmean(rhs))``.

        No error is raised here: callers decide what projection loss they
        tolerate.
        """
        self.check(rhs)
        sym = -(self.kx**2) * np.ones_like(self.ky)
        inv = np.zeros_like(sym)
        nz = sym != 0
        inv[nz] = 1.0 / sym[nz]
        return self.apply_symbol(rhs, inv), self.xmean(rhs)

    def _invert_symbol(self, sym, rhs, tol):
        self.check(rhs)
        rh = self.fft(rhs)
        amp = np.abs(rh) / (self.nx * self.ny)
        scale = float(np.max(amp)) if amp.size else 0.0
        smax = float(np.max(np.abs(sym)))
        null = np.abs(sym) <= 1e-12 * smax
        null_amp = float(np.max(np.where(_expand(null, amp), amp, 0.0)))
        if scale > 0 and null_amp > tol * scale:
            raise NullModeConflict(
                f"rhs carries amplitude {null_amp:.3e} on a null mode of the operator"
            )
        inv = np.zeros_like(sym, dtype=complex)
        inv[~null] = 1.0 / sym[~null]
        uh = rh * _expand(inv, rh)
        u = self.ifft(uh)
        if np.isrealobj(rhs):
            u = u.real
        return u, null_amp

    # misc --------------------------------------------------------------------
    def dealias(self, f):
        """Two-thirds-rule truncation."""
        return self.apply_symbol(f, self.dealias_mask.astype(float))

    def integrate(self, f):
        """Spectrally exact quadrature of a periodic field (mean times area)."""
        return self.mean(f) * self.area

    def l2_norm(self, f):
        """Continuous L2 norm, ``sqrt(integral |f|^2)``."""
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.dx * self.dy))

    def linf_norm(self, f):
        return float(np.max(np.abs(f))) if np.size(f) else 0.0

    def interpolate_x(self, f, x_new):
        """Evaluate the trigonometric interpolant of ``f`` at arbitrary x.

        ``x_new`` is one-dimensional; the result has shape ``(len(x_new), ny, ...)``.
        """
        self.check(f)
        fh = np.fft.fft(f, axis=0) / self.nx
        k = _wavenumbers(self.nx, self.lx)
        k = k.copy()
        nyq = self.nx // 2
        phase = np.exp(1j * np.outer(np.asarray(x_new), k))
        # split the Nyquist coefficient symmetrically so real data stays real
        phase[:, nyq] = np.cos(k[nyq] * np.asarray(x_new))
        out = np.tensordot(phase, fh, axes=(1, 0))
        return out.real if np.isrealobj(f) else out


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[0, l)``."""

    n: int
    l: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not self.l > 0:
            raise ValueError("l must be positive")
        if self.dx * self.n != self.l:
            raise ValueError("domain length is not an exact multiple of the spacing")

    @property
    def shape(self):
        return (self.n,)

    @property
    def dx(self):
        return self.l / self.n

    @cached_property
    def x(self):
        return np.arange(self.n) * self.dx

    @cached_property
    def k(self):
        return _wavenumbers(self.n, self.l)

    @cached_property
    def k_odd(self):
        return _odd(self.k)

    @cached_property
    def dealias_mask(self):
        j = np.abs(np.fft.fftfreq(self.n, 1.0 / self.n))
        return j <= self.n // 3

    def check(self, *fields):
        for f in fields:
            if np.shape(f)[:1] != self.shape:
                raise GridMismatch(f"field of shape {np.shape(f)} does not live on a {self.shape} grid")

    def apply_symbol(self, f, symbol, real_symbol_parity=True):
        self.check(f)
        fh = np.fft.fft(f, axis=0)
        out = np.fft.ifft(fh * _expand(symbol, fh), axis=0)
        if real_symbol_parity and np.isrealobj(f):
            return out.real
        return out

    def deriv_x(self, f):
        return self.apply_symbol(f, 1j * self.k_odd)

    def deriv_xx(self, f):
        return self.apply_symbol(f, -(self.k**2))

    def antideriv_x(self, f):
        """Zero-mean antiderivative; returns ``(g, mean(f))``."""
        self.check(f)
        inv = np.zeros_like(self.k_odd, dtype=complex)
        nz = self.k_odd != 0
        inv[nz] = 1.0 / (1j * self.k_odd[nz])
        return self.apply_symbol(f, inv), np.mean(f, axis=0)

    def dealias(self, f):
        return self.apply_symbol(f, self.dealias_mask.astype(float))

    def mean(self, f):
        self.check(f)
        return np.mean(f, axis=0)

    def integrate(self, f):
        return self.mean(f) * self.l

    def l2_norm(self, f):
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.dx))

    def linf_norm(self, f):
        return float(np.max(np.abs(f))) if np.size(f) else 0.0


def random_field(
    grid,
    seed=None,
    amplitude=1.0,
    band=4,
    *,
    zero_xmean=False,
    zero_ymean=False,
    complex_values=False,
    rng=None,
):
    """Seeded band-limited Gaussian random field.

    Fourier coefficients with ``|jx|, |jy| <= band`` are drawn from a unit
    normal distribution; the field is scaled so that ``max|f| == amplitude``.
    ``zero_xmean`` removes every ``jx == 0`` mode, so each y-line has zero
    x-mean (likewise ``zero_ymean``).
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    if isinstance(grid, Grid1D):
        nx, ny = grid.n, 1
    else:
        nx, ny = grid.shape
    coeff = np.zeros((nx, ny), dtype=complex)
    jx = np.fft.fftfreq(nx, 1.0 / nx)
    jy = np.fft.fftfreq(ny, 1.0 / ny) if ny > 1 else np.zeros(1)
    keep = (np.abs(jx)[:, None] <= band) & (np.abs(jy)[None, :] <= band)
    keep &= (np.abs(jx)[:, None] < nx // 2) & (np.abs(jy)[None, :] < max(ny // 2, 1))
    if zero_xmean:
        keep &= jx[:, None] != 0
    if zero_ymean:
        keep &= jy[None, :] != 0
    n_keep = int(keep.sum())
    coeff[keep] = rng.normal(size=n_keep) + 1j * rng.normal(size=n_keep)
    f = np.fft.ifft2(coeff)
    if not complex_values:
        f = f.real
    peak = np.max(np.abs(f))
    if peak > 0:
        f = f * (amplitude / peak)
    if isinstance(grid, Grid1D):
        f = f[:, 0]
    return f
