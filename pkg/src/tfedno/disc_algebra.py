"""Galerkin products of Zernike-represented functions.

The three kernels return, for all |m| <= M and n <= N,

    product    <zeta_mn, v1 v2>
    grad_dot   <zeta_mn, grad_H v1 . grad_H v2>
    lap_times  <zeta_mn, (Lap_H v1) v2>

Each factor is synthesised on the Gauss x FFT grid with the radial weight
split as sigma^(1/3) per factor, multiplied pointwise (an exact azimuthal
convolution, since n_theta covers the doubled band), and projected.  With
Ng >= (3N+M)/2 + 1 the radial sums are exact.  Products are bilinear (no
complex conjugation); for real fields this coincides with the usual dot
product.  All kernels broadcast over leading batch axes.
"""
from __future__ import annotations

import numpy as np

from .disc_basis import DiscQuadrature, build_quadrature


class ProductWorkspace:
    """Scaled basis tables for the product kernels. Not thread-safe."""

    def __init__(self, M, N, quad: DiscQuadrature | None = None):
        if quad is None:
            quad = build_quadrature(M, N)
        if (quad.M, quad.N) != (M, N):
            raise ValueError("quadrature truncation does not match workspace")
        if 2 * quad.Ng - 1 < 3 * N + M:
            raise ValueError("quadrature too coarse for exact products")
        if quad.n_theta < 3 * M + 1:
            raise ValueError("n_theta too small for alias-free products")
        self.M, self.N = M, N
        self.quad = quad
        w3 = quad.sigma ** (1.0 / 3.0)
        self._scaled = {k: getattr(quad, k) * w3 for k in ("val", "drho", "over_rho", "lap")}

    @property
    def shape(self):
        return self.quad.shape

    def _grid(self, c, table):
        c = self.quad.check_coeffs(c)
        ang = np.einsum("...mn,mni->...mi", c, self._scaled[table])
        if table == "over_rho":
            ang = ang * (1j * self.quad.mvals)[:, None]
        return self.quad.synthesize(ang)

    def _project(self, g):
        ang = self.quad.analyze(g) * 0.5
        return np.einsum("...mi,mni->...mn", ang, self._scaled["val"])

    def values(self, c):
        return self._grid(c, "val")

    def gradient(self, c):
        return self._grid(c, "drho"), self._grid(c, "over_rho")

    def product(self, a, b):
        return self._project(self._grid(a, "val") * self._grid(b, "val"))

    def grad_dot(self, a, b):
        ar, at = self.gradient(a)
        br, bt = self.gradient(b)
        return self._project(ar * br + at * bt)

    def lap_times(self, a, b):
        return self._project(self._grid(a, "lap") * self._grid(b, "val"))


def product(a, b, ws: ProductWorkspace):
    return ws.product(a, b)


def grad_dot(a, b, ws: ProductWorkspace):
    return ws.grad_dot(a, b)


def lap_times(a, b, ws: ProductWorkspace):
    return ws.lap_times(a, b)


def convolve_direct(a, b):
    """O(M^2) reference for the azimuthal convolution of two angular spectra.

    ``a`` and ``b`` have shape (..., 2M+1, Ng); the result keeps |m| <= M.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    M = (a.shape[-2] - 1) // 2
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for m in range(-M, M + 1):
        for m1 in range(-M, M + 1):
            m2 = m - m1
            if -M <= m2 <= M:
                out[..., m + M, :] += a[..., m1 + M, :] * b[..., m2 + M, :]
    return out


def product_direct(a, b, ws: ProductWorkspace):
    """``product`` with the azimuthal convolution done as an explicit double sum."""
    tab = ws._scaled["val"]
    sa = np.einsum("...mn,mni->...mi", ws.quad.check_coeffs(a), tab)
    sb = np.einsum("...mn,mni->...mi", ws.quad.check_coeffs(b), tab)
    return np.einsum("...mi,mni->...mn", 0.5 * convolve_direct(sa, sb), tab)
