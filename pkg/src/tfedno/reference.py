"""Bessel-function oracles and the closed-form DNO test case."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disc_basis import DiscQuadrature, coeffs_zero, gauss_legendre


def bessel_j_table(mmax, x):
    """J_0 .. J_mmax at x (x >= 0), by Miller's backward recurrence.

    Normalised with J_0 + 2 sum_k J_2k = 1.  Returns shape (mmax+1,) + x.shape.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j requires x >= 0")
    flat = x.ravel()
    out = np.zeros((mmax + 1, flat.size))
    zero = flat == 0
    out[0, zero] = 1.0
    # two-term ascending series where 2k/x would overflow the recurrence
    tiny = (flat > 0) & (flat < 1e-6)
    if np.any(tiny):
        half = flat[tiny] / 2
        for m in range(mmax + 1):
            out[m, tiny] = half**m / math.factorial(m) * (1 - half * half / (m + 1))
    zero |= tiny
    xs = flat[~zero]
    if xs.size:
        xmax = float(xs.max())
        start = int(max(mmax, xmax) + 30 + 3 * math.sqrt(max(xmax, 1.0)))
        start += start % 2
        jp1 = np.zeros_like(xs)
        jk = np.full_like(xs, 1e-300)
        acc = np.zeros_like(xs)
        res = np.zeros((mmax + 1, xs.size))
        for k in range(start, 0, -1):
            jm1 = 2 * k / xs * jk - jp1
            jp1, jk = jk, jm1
            kk = k - 1
            if kk <= mmax:
                res[kk] = jk
            if kk > 0 and kk % 2 == 0:
                acc += 2 * jk
            big = np.abs(jk) > 1e250
            if np.any(big):
                jk[big] *= 1e-250
                jp1[big] *= 1e-250
                acc[big] *= 1e-250
                res[:, big] *= 1e-250
        acc += jk
        out[:, ~zero] = res / acc
    return out.reshape((mmax + 1,) + x.shape)


def bessel_j(m, x):
    """J_m(x) for integer m (negative orders by reflection)."""
    m = int(m)
    val = bessel_j_table(abs(m), x)[abs(m)]
    return (-1) ** m * val if m < 0 else val


def bessel_jprime(m, x):
    m = abs(int(m))
    t = bessel_j_table(m + 1, x)
    if m == 0:
        return -t[1]
    return 0.5 * (t[m - 1] - t[m + 1])


def _refine(m, lo, hi):
    """Bisect every bracket [lo_i, hi_i] of J_m' at once, then one Newton polish."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = bessel_jprime(m, lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = bessel_jprime(m, mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo <= 4e-16 * hi):
            break
    x = 0.5 * (lo + hi)
    # Newton with J_m'' = -J_m'/x - (1 - m^2/x^2) J_m
    d1 = bessel_jprime(m, x)
    d2 = -d1 / x - (1 - m * m / (x * x)) * bessel_j(m, x)
    xn = x - d1 / np.where(d2 != 0, d2, 1.0)
    ok = (d2 != 0) & (lo <= xn) & (xn <= hi)
    ok &= np.abs(bessel_jprime(m, np.where(ok, xn, x))) <= np.abs(d1)
    return np.where(ok, xn, x)


_ZERO_CACHE: dict[int, np.ndarray] = {}


def _jprime_zeros(m, count):
    if m < 0 or count < 1:
        raise ValueError("need m >= 0 and n >= 1")
    have = _ZERO_CACHE.get(m)
    if have is not None and len(have) >= count:
        return have[:count]
    # McMahon: a'_mn ~ (n + m/2 - 3/4) pi for large n; scan a little beyond it
    upper = (count + m / 2 + 0.25) * math.pi + 2 * m + 10
    x0 = max(0.5, 0.9 * math.sqrt(m * (m + 2))) if m else 0.5
    xs = np.arange(x0, upper, 0.05)
    vals = bessel_jprime(m, xs)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(idx) < count:
        raise RuntimeError(f"failed to bracket {count} zeros of J'_{m}")
    zeros = _refine(m, xs[idx], xs[idx + 1])
    zeros.setflags(write=False)
    _ZERO_CACHE[m] = zeros
    return zeros[:count]


def bessel_jprime_zero(m, n):
    """n-th positive zero a_mn of J_m'."""
    return float(_jprime_zeros(abs(int(m)), int(n))[-1])


def bessel_jprime_zeros(m, count):
    return _jprime_zeros(abs(int(m)), int(count)).copy()


@dataclass(frozen=True)
class BesselMode:
    m: int
    n: int

    @property
    def a(self):
        return bessel_jprime_zero(self.m, self.n)

    def __call__(self, rho, theta):
        return bessel_j(self.m, self.a * np.asarray(rho)) * np.cos(self.m * np.asarray(theta))

    def gradient(self, rho, theta):
        """(d_rho, rho^-1 d_theta) of J_m(a rho) cos(m theta)."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        a = self.a
        dr = a * bessel_jprime(self.m, a * rho) * np.cos(self.m * theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            dt = np.where(rho > 0, -self.m * bessel_j(self.m, a * rho) / rho, 0.0) * np.sin(self.m * theta)
        if self.m == 1:
            dt = np.where(rho > 0, dt, -0.5 * a * np.sin(theta))
        return dr, dt


class Surface:
    """A surface shape amp * mode with analytic value and horizontal gradient."""

    def __init__(self, mode, amp=1.0):
        self.mode = mode
        self.amp = amp

    def __call__(self, rho, theta):
        return self.amp * self.mode(rho, theta)

    def gradient(self, rho, theta):
        dr, dt = self.mode.gradient(rho, theta)
        return self.amp * dr, self.amp * dt


def sup_on_dense_grid(fun, nrho=200, ntheta=256):
    rho = np.linspace(0.0, 1.0, nrho)
    theta = 2 * np.pi * np.arange(ntheta) / ntheta
    R, T = np.meshgrid(rho, theta, indexing="ij")
    return float(np.max(fun(R, T)))


@dataclass(eq=False)
class ExactDnoCase:
    """Dirichlet data q and exact Neumann data for the separable solution."""

    mprime: int
    nprime: int
    eta: Surface
    h: float
    scale: float  # cosh(a ||eta + h||_inf)
    q: np.ndarray = field(repr=False)
    neumann: np.ndarray = field(repr=False)

    @property
    def a(self):
        return bessel_jprime_zero(self.mprime, self.nprime)

    def _parts(self, rho, theta):
        a, m = self.a, self.mprime
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        eta = self.eta(rho, theta)
        er, et = self.eta.gradient(rho, theta)
        jm = bessel_j(m, a * rho)
        c = np.cosh(a * (eta + self.h)) / self.scale
        s = np.sinh(a * (eta + self.h)) / self.scale
        return a, m, rho, theta, er, et, jm, c, s

    def q_at(self, rho, theta):
        a, m, rho, theta, er, et, jm, c, s = self._parts(rho, theta)
        return jm * np.cos(m * theta) * c

    def neumann_at(self, rho, theta):
        """[-grad_H phi . grad_H eta + phi_z']  on z' = eta."""
        a, m, rho, theta, er, et, jm, c, s = self._parts(rho, theta)
        phi_r = a * bessel_jprime(m, a * rho) * np.cos(m * theta) * c
        with np.errstate(divide="ignore", invalid="ignore"):
            phi_t = np.where(rho > 0, -m * jm / rho, 0.0) * np.sin(m * theta) * c
        phi_z = a * jm * np.cos(m * theta) * s
        return -(phi_r * er + phi_t * et) + phi_z


def exact_dno_case(mprime, nprime, eta: Surface, h, quad: DiscQuadrature) -> ExactDnoCase:
    if mprime < 0 or nprime < 1:
        raise ValueError("need m' >= 0 and n' >= 1")
    depth = -sup_on_dense_grid(lambda r, t: -eta(r, t))
    if not h > max(-depth, 0.0):
        raise ValueError("depth h must exceed max(-eta)")
    a = bessel_jprime_zero(mprime, nprime)
    top = sup_on_dense_grid(lambda r, t: eta(r, t) + h)
    case = ExactDnoCase(mprime, nprime, eta, float(h), math.cosh(a * top), None, None)
    R, T = np.meshgrid(quad.rho, quad.theta, indexing="ij")
    case.q = quad.project(case.q_at(R, T))
    case.neumann = quad.project(case.neumann_at(R, T))
    return case


def bessel_project(g, m, n_modes, n_rho=400, n_theta=None):
    """Coefficients beta_{m, n}, n = 1..n_modes, of g(rho, theta) on J_m(a_mn rho) e^{i m theta}.

    Radial integrals use an n_rho-point Gauss-Legendre rule on [0, 1].
    """
    n_theta = n_theta or max(8, 4 * (abs(m) + 1))
    x, w = gauss_legendre(n_rho)
    rho = 0.5 * (x + 1)
    wr = 0.5 * w
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(rho, theta, indexing="ij")
    gm = (np.asarray(g(R, T)) * np.exp(-1j * m * T)).mean(axis=1) * 2 * np.pi
    a = bessel_jprime_zeros(m, n_modes)
    Jm = bessel_j(abs(m), np.outer(a, rho))
    norm = 2 * np.pi * (Jm**2 * rho * wr).sum(axis=1)
    return (Jm * gm * rho * wr).sum(axis=1) / norm


def bessel_series(beta, m, rho, theta):
    a = bessel_jprime_zeros(m, len(beta))
    rho = np.asarray(rho, dtype=float)
    Jm = bessel_j(abs(m), a.reshape((-1,) + (1,) * rho.ndim) * rho)
    return np.tensordot(beta, Jm, axes=(0, 0)) * np.exp(1j * m * np.asarray(theta))


def correction_factor(mprime, nprime):
    if mprime > 0:
        return (2 * nprime * (mprime + nprime + 1) / mprime + 1) * math.sqrt(
            (1 + mprime + 2 * nprime) / (1 + mprime)
        )
    return (2 * nprime * (nprime + 1) / 4) * math.sqrt((1 + 2 * nprime) / 3)


def corrected_zernike(mprime, nprime, M=None, N=None):
    """Coefficients of g = zeta_{m'n'} - h_{m'}, which has d_rho g = 0 on rho = 1."""
    if mprime < 0 or nprime < 0 or (mprime == 0 and nprime < 1):
        raise ValueError("invalid (m', n') for the corrected Zernike function")
    M = mprime if M is None else M
    N = max(nprime, 1) if N is None else N
    if M < mprime or N < max(nprime, 1):
        raise ValueError("truncation too small for (m', n')")
    c = coeffs_zero(M, N)
    c[M + mprime, nprime] += 1.0
    c[M + mprime, 0 if mprime > 0 else 1] -= correction_factor(mprime, nprime)
    return c


def zernike_coeffs_on(fun, quad: DiscQuadrature):
    R, T = np.meshgrid(quad.rho, quad.theta, indexing="ij")
    return quad.project(fun(R, T))

