"""Transformed field expansion of the Dirichlet-Neumann operator.

With the surface z' = eps f flattened to z = 0, the potential is expanded as
u = sum eps^k u_k and each u_k solves  -Lap u_k = s_k  on the flat cylinder
with u_k = delta_k0 q on top, d_z u_k = 0 on the bottom and
d_rho u_k = chi_k on the wall.  With S = h + z, u' = u_{k-1}, u'' = u_{k-2}
and horizontal operators grad, Lap:

    s_k = 2/h f Lap u' - S/h (2 grad f . grad u'_z + u'_z Lap f)
        + 1/h^2 f^2 Lap u'' - S f/h^2 (2 grad f . grad u''_z + u''_z Lap f)
        + S/h^2 |grad f|^2 (2 u''_z + S u''_zz)

    chi_k = 1/h [ -f d_rho u' + S (d_rho f) u'_z ]   at rho = 1

    G_k = (u_k)_z - f G_{k-1} / h + |grad f|^2 (u_{k-2})_z
          - delta_k1 grad f . grad q - delta_k2 f grad f . grad q / h      at z = 0

and  G[eps f] q = sum_k eps^k G_k.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .disc_algebra import ProductWorkspace
from .disc_basis import boundary_values
from .poisson import BoundaryData, CylinderField, PoissonPlan, residual, solve


class ExpansionError(FloatingPointError):
    def __init__(self, k, what):
        super().__init__(f"non-finite {what} at order k={k}")
        self.k = k


@dataclass(eq=False)
class DnoExpansion:
    f: np.ndarray
    q: np.ndarray
    h: float
    fields: list = field(repr=False)
    terms: list = field(repr=False)
    residuals: list = field(default_factory=list)

    @property
    def K(self):
        return len(self.terms) - 1

    def partial_sums(self, eps):
        """Sum_{k<=K'} eps^k G_k for every K' = 0..K."""
        out = []
        acc = np.zeros_like(self.terms[0])
        for k, g in enumerate(self.terms):
            acc = acc + eps**k * g
            out.append(acc)
        return out


def _check(ws, plan, *arrays):
    if (ws.M, ws.N) != (plan.M, plan.N):
        raise ValueError("workspace and plan truncations differ")
    for a in arrays:
        if a is not None:
            ws.quad.check_coeffs(a)


class _SurfaceCache:
    """Products of f with itself, reused at every order."""

    def __init__(self, f, ws):
        self.f = f
        self.f2 = ws.product(f, f)
        self.gradf2 = ws.grad_dot(f, f)


def compute_rk(f, u_km1: CylinderField, u_km2: CylinderField | None, plan, ws, cache=None):
    """Source of -Lap u_k, as per-node disc coefficients (a CylinderField)."""
    _check(ws, plan, f)
    cache = _SurfaceCache(f, ws) if cache is None else cache
    h = plan.h
    g = plan.grid
    S = (h + g.z)[:, None, None]
    u1 = u_km1.slices
    u1z = np.moveaxis(u_km1.gamma @ g.D.T, -1, 0)
    out = 2.0 / h * ws.lap_times(u1, f)
    out -= S / h * (2.0 * ws.grad_dot(f, u1z) + ws.lap_times(f, u1z))
    if u_km2 is not None:
        u2 = u_km2.slices
        u2z = np.moveaxis(u_km2.gamma @ g.D.T, -1, 0)
        u2zz = np.moveaxis(u_km2.gamma @ g.D2.T, -1, 0)
        out += ws.lap_times(u2, cache.f2) / h**2
        inner = 2.0 * ws.grad_dot(f, u2z) + ws.lap_times(f, u2z)
        out -= S / h**2 * ws.product(f, inner)
        out += S / h**2 * ws.product(cache.gradf2, 2.0 * u2z + S * u2zz)
    return CylinderField.from_slices(out, h)


def _convolve_angular(a, b, M):
    """Product of two truncated angular Fourier series, kept to |m| <= M."""
    n = 1 << (4 * M + 1).bit_length()
    idx = np.arange(-M, M + 1) % n
    fa = np.zeros(a.shape[:-1] + (n,), dtype=complex)
    fb = np.zeros(b.shape[:-1] + (n,), dtype=complex)
    fa[..., idx] = a
    fb[..., idx] = b
    prod = np.fft.ifft(np.fft.fft(fa, axis=-1) * np.fft.fft(fb, axis=-1), axis=-1)
    return prod[..., idx]


def compute_chik(f, u_km1: CylinderField, plan):
    """Lateral Neumann data chi_k, shape (2M+1, J+1)."""
    h = plan.h
    g = plan.grid
    S = h + g.z
    f_b, f_rb = boundary_values(f)
    u_b, u_rb = boundary_values(u_km1.slices)  # (J+1, 2M+1)
    uz_b = g.D @ u_b
    term1 = _convolve_angular(f_b[None, :], u_rb, plan.M)
    term2 = _convolve_angular(f_rb[None, :], uz_b, plan.M) * S[:, None]
    return ((-term1 + term2) / h).T


def dno_term(k, f, u_k: CylinderField, G_km1, u_km2: CylinderField | None, q, plan, ws, cache=None):
    """G_k[f] q as disc coefficients."""
    _check(ws, plan, f, q)
    cache = _SurfaceCache(f, ws) if cache is None else cache
    h = plan.h
    D_top = plan.grid.D[-1]
    G = u_k.gamma @ D_top
    if G_km1 is not None:
        G = G - ws.product(f, G_km1) / h
    if u_km2 is not None:
        G = G + ws.product(cache.gradf2, u_km2.gamma @ D_top)
    if k == 1:
        G = G - ws.grad_dot(f, q)
    elif k == 2:
        G = G - ws.product(f, ws.grad_dot(f, q)) / h
    return G


def tfe_expand(f, q, K, plan: PoissonPlan, ws: ProductWorkspace, check_residual=True) -> DnoExpansion:
    """Run the three-term recurrence to order K."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    _check(ws, plan, f, q)
    f = np.asarray(f, dtype=complex)
    q = np.asarray(q, dtype=complex)
    cache = _SurfaceCache(f, ws)
    zero_top = np.zeros_like(q)
    zero_rhs = np.zeros((2 * plan.M + 1, plan.N + 1, plan.J + 1), dtype=complex)
    bc0 = BoundaryData(q)
    u0 = solve(plan, zero_rhs, bc0)
    fields = [u0]
    terms = [dno_term(0, f, u0, None, None, q, plan, ws, cache)]
    res = [residual(plan, u0, zero_rhs, bc0)] if check_residual else []
    for k in range(1, K + 1):
        u1 = fields[k - 1]
        u2 = fields[k - 2] if k >= 2 else None
        rhs = compute_rk(f, u1, u2, plan, ws, cache)
        chi = compute_chik(f, u1, plan)
        if not (np.all(np.isfinite(rhs.gamma)) and np.all(np.isfinite(chi))):
            raise ExpansionError(k, "source term")
        bc = BoundaryData(zero_top, chi)
        uk = solve(plan, rhs.gamma, bc)
        if check_residual:
            res.append(residual(plan, uk, rhs.gamma, bc))
        fields.append(uk)
        Gk = dno_term(k, f, uk, terms[k - 1], u2, q, plan, ws, cache)
        if not np.all(np.isfinite(Gk)):
            raise ExpansionError(k, "DNO term")
        terms.append(Gk)
    return DnoExpansion(f, q, plan.h, fields, terms, res)


def dno_sum(exp: DnoExpansion, eps):
    """Horner evaluation of sum_k eps^k G_k."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    acc = np.zeros_like(exp.terms[0])
    for g in reversed(exp.terms):
        acc = acc * eps + g
    return acc


def divergence_flag(exp: DnoExpansion, eps, start=5, run=3):
    """True when ||eps^k G_k|| grows for ``run`` consecutive orders beyond k = ``start``."""
    norms = [abs(eps) ** k * np.linalg.norm(g) for k, g in enumerate(exp.terms)]
    streak = 0
    for k in range(max(start, 1) + 1, len(norms)):
        streak = streak + 1 if norms[k] > norms[k - 1] else 0
        if streak >= run:
            return True
    return False
