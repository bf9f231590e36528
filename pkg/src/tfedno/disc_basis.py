"""Zernike polynomials on the unit disc.

Coefficient arrays are stored dense with shape ``(..., 2M+1, N+1)``; entry
``[..., m + M, n]`` multiplies

    zeta_mn(rho, theta) = mu_mn * P_n^(0,|m|)(2 rho^2 - 1) * rho^|m| * exp(i m theta)

with ``mu_mn = sqrt(1 + |m| + 2n)``.  The family is orthonormal for the inner
product ``<v, w> = (1/pi) int conj(v) w rho drho dtheta``.

Sample grids have shape ``(..., Ng, n_theta)``: Gauss-Legendre nodes in
``xi = 2 rho^2 - 1`` by equispaced angles ``theta_j = 2 pi j / n_theta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def jacobi(n, alpha, beta, x):
    """P_n^(alpha, beta)(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    return jacobi_table(n, alpha, beta, x)[n]


def jacobi_table(nmax, alpha, beta, x):
    """All of P_0..P_nmax at x, stacked along a new leading axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    a, b = alpha, beta
    out[1] = (a + 1) + (a + b + 2) * (x - 1) / 2
    for n in range(2, nmax + 1):
        s = 2 * n + a + b
        c1 = 2 * n * (n + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c3 = 2 * (n + a - 1) * (n + b - 1) * s
        out[n] = (c2 * out[n - 1] - c3 * out[n - 2]) / c1
    return out


def jacobi_eval(m, n, x):
    """P_n^(0,|m|)(x), the radial Jacobi factor of zeta_mn."""
    return jacobi(n, 0, abs(m), x)


def _jacobi_deriv_table(nmax, beta, x, order):
    # d^k/dx^k P_n^(0,b) = (n+b+1)_k / 2^k * P_{n-k}^(k, b+k)
    x = np.asarray(x, dtype=float)
    out = np.zeros((nmax + 1,) + x.shape)
    if nmax < order:
        return out
    shifted = jacobi_table(nmax - order, order, beta + order, x)
    for n in range(order, nmax + 1):
        rising = np.prod([n + beta + 1 + i for i in range(order)], dtype=float)
        out[n] = rising / 2**order * shifted[n - order]
    return out


def mu(m, n):
    return np.sqrt(1.0 + abs(m) + 2 * n)


def zernike_eval(m, n, rho, theta):
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    radial = mu(m, n) * jacobi_eval(m, n, 2 * rho**2 - 1) * rho ** abs(m)
    return radial * np.exp(1j * m * theta)


def eigenvalue_L(m, n):
    """Eigenvalue of L u = -rho^-1 d_rho[rho (1-rho^2) d_rho u] - rho^-2 d_theta^2 u."""
    d = abs(m) + 2 * n
    return d * (d + 2)


def apply_L(c):
    c = np.asarray(c)
    M = (c.shape[-2] - 1) // 2
    N = c.shape[-1] - 1
    m = np.arange(-M, M + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    return c * eigenvalue_L(m, n)


def _legendre_pair(n, x):
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, p0


def gauss_legendre(n, tol=1e-15, maxiter=100):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on the Legendre recurrence, started from Chebyshev
    points.  Nodes are returned in increasing order.
    """
    if n < 1:
        raise ValueError("need at least one node")
    k = np.arange(1, n + 1)
    x = -np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(maxiter):
        pn, pnm1 = _legendre_pair(n, x)
        dx = pn / (n * (x * pn - pnm1) / (x * x - 1))
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    pn, pnm1 = _legendre_pair(n, x)
    dp = n * (x * pn - pnm1) / (x * x - 1)
    return x, 2.0 / ((1 - x * x) * dp * dp)


def default_ntheta(M):
    target = max(2 * (2 * M + 1), 8)
    return 1 << (target - 1).bit_length()


def default_ng(M, N):
    return -(-(3 * N + M) // 2) + 1


@dataclass(frozen=True, eq=False)
class DiscQuadrature:
    """Tensor quadrature on the disc plus Zernike basis tables at its nodes.

    Radial tables have shape ``(2M+1, N+1, Ng)`` and carry ``mu_mn``:

    * ``val``      zeta radial factor  mu P rho^|m|
    * ``drho``     its rho-derivative
    * ``over_rho`` mu P rho^(|m|-1), so that rho^-1 d_theta zeta = i m over_rho e^{im theta}
    * ``lap``      radial factor of the horizontal Laplacian of zeta
    """

    M: int
    N: int
    Ng: int
    n_theta: int
    xi: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)

    @cached_property
    def rho(self):
        return np.sqrt((1 + self.xi) / 2)

    @cached_property
    def theta(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def mvals(self):
        return np.arange(-self.M, self.M + 1)

    @property
    def shape(self):
        return (2 * self.M + 1, self.N + 1)

    @property
    def grid_shape(self):
        return (self.Ng, self.n_theta)

    @cached_property
    def _tables(self):
        M, N = self.M, self.N
        xi, rho = self.xi, self.rho
        shape = (2 * M + 1, N + 1, self.Ng)
        val = np.empty(shape)
        drho = np.empty(shape)
        over_rho = np.empty(shape)
        lap = np.empty(shape)
        per_abs = {}
        n = np.arange(N + 1)[:, None]
        for a in range(M + 1):
            mun = np.sqrt(1.0 + a + 2 * n)
            P = jacobi_table(N, 0, a, xi)
            dP = _jacobi_deriv_table(N, a, xi, 1)
            d2P = _jacobi_deriv_table(N, a, xi, 2)
            ra = rho**a
            ram1 = rho ** (a - 1.0)
            per_abs[a] = (
                mun * P * ra,
                mun * (4 * rho * ra * dP + a * ram1 * P),
                mun * P * ram1,
                mun * ra * (16 * rho**2 * d2P + 8 * (a + 1) * dP),
            )
        for i, m in enumerate(range(-M, M + 1)):
            val[i], drho[i], over_rho[i], lap[i] = per_abs[abs(m)]
        return {"val": val, "drho": drho, "over_rho": over_rho, "lap": lap}

    @property
    def val(self):
        return self._tables["val"]

    @property
    def drho(self):
        return self._tables["drho"]

    @property
    def over_rho(self):
        return self._tables["over_rho"]

    @property
    def lap(self):
        return self._tables["lap"]

    def check_coeffs(self, c):
        c = np.asarray(c)
        if c.shape[-2:] != self.shape:
            raise ValueError(f"coefficient shape {c.shape[-2:]} does not match {self.shape}")
        return c

    def check_samples(self, v):
        v = np.asarray(v)
        if v.shape[-2:] != self.grid_shape:
            raise ValueError(f"sample shape {v.shape[-2:]} does not match {self.grid_shape}")
        return v

    # -- spectral <-> grid -------------------------------------------------

    def synthesize(self, ang):
        """Angular spectrum ``(..., 2M+1, Ng)`` to samples ``(..., Ng, n_theta)``."""
        ang = np.asarray(ang)
        full = np.zeros(ang.shape[:-2] + (self.Ng, self.n_theta), dtype=complex)
        full[..., self.mvals % self.n_theta] = np.swapaxes(ang, -1, -2)
        return np.fft.ifft(full, axis=-1) * self.n_theta

    def analyze(self, samples):
        """Samples to angular spectrum ``(..., 2M+1, Ng)``: (1/n_theta) sum v e^{-im theta}."""
        samples = np.asarray(samples)
        if np.isrealobj(samples):
            half = np.fft.rfft(samples, axis=-1)[..., : self.M + 1] / self.n_theta
            half = np.swapaxes(half, -1, -2)
            ang = np.empty(half.shape[:-2] + (2 * self.M + 1, self.Ng), dtype=complex)
            ang[..., self.M :, :] = half
            ang[..., : self.M, :] = np.conj(half[..., :0:-1, :])
            ang[..., self.M, :] = ang[..., self.M, :].real
            return ang
        full = np.fft.fft(samples, axis=-1) / self.n_theta
        return np.swapaxes(full[..., self.mvals % self.n_theta], -1, -2)

    def to_grid(self, c, table="val"):
        c = self.check_coeffs(c)
        tab = self._tables[table]
        ang = np.einsum("...mn,mni->...mi", c, tab)
        if table == "over_rho":
            ang = ang * (1j * self.mvals)[:, None]
        return self.synthesize(ang)

    def project(self, samples):
        """Zernike coefficients a_mn = <zeta_mn, v> of grid samples."""
        samples = self.check_samples(samples)
        ang = self.analyze(samples) * (0.5 * self.sigma)
        return np.einsum("...mi,mni->...mn", ang, self.val)

    def integrate(self, samples):
        """(1/pi) * integral over the disc, i.e. <1, v>."""
        samples = self.check_samples(samples)
        return 0.5 * np.einsum("...ij,i->...", samples, self.sigma) / self.n_theta


def build_quadrature(M, N, Ng=None, n_theta=None):
    if M < 0 or N < 0:
        raise ValueError("truncations must be nonnegative")
    Ng = default_ng(M, N) if Ng is None else Ng
    n_theta = default_ntheta(M) if n_theta is None else n_theta
    if n_theta < 2 * M + 1:
        raise ValueError("n_theta must be at least 2M+1")
    xi, sigma = gauss_legendre(Ng)
    return DiscQuadrature(M, N, Ng, n_theta, xi, sigma)


def eval_field(c, rho, theta):
    """Sum_mn c_mn zeta_mn at arbitrary points (rho, theta), broadcast together."""
    c = np.asarray(c)
    M = (c.shape[-2] - 1) // 2
    N = c.shape[-1] - 1
    rho, theta = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float))
    xi = 2 * rho**2 - 1
    out = np.zeros(c.shape[:-2] + rho.shape, dtype=complex)
    n = np.arange(N + 1).reshape((-1,) + (1,) * rho.ndim)
    for a in range(M + 1):
        radial = np.sqrt(1.0 + a + 2 * n) * jacobi_table(N, 0, a, xi) * rho**a
        for m in {a, -a}:
            coef = c[..., m + M, :]
            out = out + np.tensordot(coef, radial, axes=([-1], [0])) * np.exp(1j * m * theta)
    return out


def coeffs_zero(M, N):
    return np.zeros((2 * M + 1, N + 1), dtype=complex)


def coeffs_unit(M, N, m, n):
    c = coeffs_zero(M, N)
    c[m + M, n] = 1.0
    return c


def reflect_conj(c):
    """c[-m, n] -> conj(c[m, n]); equals c exactly for a real field."""
    return np.conj(np.asarray(c)[..., ::-1, :])


def boundary_values(c):
    """Angular Fourier coefficients of the field and of d_rho field at rho = 1.

    Uses zeta_mn(1) = mu_mn and d_rho zeta_mn(1) = mu_mn (2n(n+|m|+1) + |m|).
    """
    c = np.asarray(c)
    M = (c.shape[-2] - 1) // 2
    N = c.shape[-1] - 1
    a = np.abs(np.arange(-M, M + 1))[:, None]
    n = np.arange(N + 1)[None, :]
    muv = np.sqrt(1.0 + a + 2 * n)
    return (c * muv).sum(-1), (c * muv * (2 * n * (n + a + 1) + a)).sum(-1)


def resize(c, M, N):
    """Zero-pad or truncate a coefficient array to (M, N)."""
    c = np.asarray(c)
    M0 = (c.shape[-2] - 1) // 2
    N0 = c.shape[-1] - 1
    out = np.zeros(c.shape[:-2] + (2 * M + 1, N + 1), dtype=complex)
    k = min(M, M0)
    nn = min(N, N0)
    out[..., M - k : M + k + 1, : nn + 1] = c[..., M0 - k : M0 + k + 1, : nn + 1]
    return out
