"""Spectral Poisson solver on the flat cylinder  D x (-h, 0).

Solves  -Lap w = r  with  w = q on z = 0,  w_z = 0 on z = -h  and
w_rho = chi on rho = 1.  The basis is zeta_mn(rho, theta) ell_j(z); for each
azimuthal order m the Galerkin system is the Sylvester equation

    A(m) Gamma Sigma + Gamma Sigma~ = G(m),

which is diagonalised by A(m) = W D^2 W^T, Sigma = R^T R, Sigma~ = R~^T R~
and the SVD R R~^-1 = U Lam V^T:

    (W^T Gamma R^T U)_nj = (W^T G R^-1 U)_nj / (D^2_n + Lam_j^-2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vertical_basis import VerticalGrid, build_vertical_grid


class SolverError(RuntimeError):
    pass


@dataclass(eq=False)
class CylinderField:
    """Coefficients of zeta_mn(rho, theta) ell_j(z); ``gamma[m + M, n, j]``."""

    gamma: np.ndarray
    h: float

    @property
    def M(self):
        return (self.gamma.shape[0] - 1) // 2

    @property
    def N(self):
        return self.gamma.shape[1] - 1

    @property
    def J(self):
        return self.gamma.shape[2] - 1

    @property
    def slices(self):
        """Per-z-node disc coefficients, shape (J+1, 2M+1, N+1)."""
        return np.moveaxis(self.gamma, -1, 0)

    @classmethod
    def from_slices(cls, slices, h):
        return cls(np.ascontiguousarray(np.moveaxis(np.asarray(slices), 0, -1)), h)

    @classmethod
    def zeros(cls, M, N, J, h):
        return cls(np.zeros((2 * M + 1, N + 1, J + 1), dtype=complex), h)


@dataclass(eq=False)
class BoundaryData:
    """Dirichlet data on top (disc coefficients) and nodal lateral Neumann data.

    ``lateral[m + M, j]`` is the m-th angular Fourier coefficient of chi at
    z_j on rho = 1; ``None`` means homogeneous.
    """

    dirichlet_top: np.ndarray
    lateral: np.ndarray | None = None


def stiffness_A(m, N):
    a = abs(m)
    n = np.arange(N + 1)
    muv = np.sqrt(1.0 + a + 2 * n)
    g = np.minimum.outer(n, n)
    return 2 * np.outer(muv, muv) * (2 * g * (g + a + 1) + a)


@dataclass(eq=False)
class PoissonPlan:
    M: int
    N: int
    J: int
    h: float
    grid: VerticalGrid = field(repr=False)
    W: np.ndarray = field(repr=False)  # (2M+1, N+1, N+1)
    D2: np.ndarray = field(repr=False)  # (2M+1, N+1)
    A: np.ndarray = field(repr=False)  # (2M+1, N+1, N+1)
    U: np.ndarray = field(repr=False)
    Lam: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    Rinv_U: np.ndarray = field(repr=False)

    @property
    def denominators(self):
        return self.D2[:, :, None] + self.Lam[None, None, :] ** -2.0

    def mu(self):
        a = np.abs(np.arange(-self.M, self.M + 1))[:, None]
        return np.sqrt(1.0 + a + 2 * np.arange(self.N + 1)[None, :])


def build_plan(M, N, J, h, grid: VerticalGrid | None = None):
    if min(M, N, J) < 1:
        raise ValueError("M, N, J must be at least 1")
    grid = build_vertical_grid(J, h) if grid is None else grid
    if grid.J != J or grid.h != h:
        raise ValueError("vertical grid does not match plan")
    per_abs = {}
    for a in range(M + 1):
        A = stiffness_A(a, N)
        d2, W = np.linalg.eigh(A)
        per_abs[a] = (A, np.maximum(d2, 0.0), W)
    ms = np.abs(np.arange(-M, M + 1))
    A = np.stack([per_abs[a][0] for a in ms])
    D2 = np.stack([per_abs[a][1] for a in ms])
    W = np.stack([per_abs[a][2] for a in ms])
    try:
        RRt = grid.R @ np.linalg.inv(grid.Rtilde)
        U, lam, Vt = np.linalg.svd(RRt)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"vertical factorisation failed for J={J}") from exc
    if not np.all(lam > 0) or not np.all(np.isfinite(lam)):
        raise SolverError(f"R Rtilde^-1 has non-positive singular values for J={J}")
    Rinv_U = np.linalg.solve(grid.R, U)
    return PoissonPlan(M, N, J, float(h), grid, W, D2, A, U, lam, Vt.T, Rinv_U)


def _as_gamma(w, plan):
    g = w.gamma if isinstance(w, CylinderField) else np.asarray(w)
    if g.shape != (2 * plan.M + 1, plan.N + 1, plan.J + 1):
        raise ValueError(f"field shape {g.shape} does not match plan truncation")
    return g


def _load(plan: PoissonPlan, rhs, bc: BoundaryData):
    """G(m) = E(m) Sigma_hat + K(m), shape (2M+1, N+1, J)."""
    g = plan.grid
    E = _as_gamma(rhs, plan)
    q = np.asarray(bc.dirichlet_top)
    if q.shape != (2 * plan.M + 1, plan.N + 1):
        raise ValueError("Dirichlet data does not match plan truncation")
    Sh = g.Sigma_hat
    St = g.Sigma_tilde_full
    G = (E @ Sh).astype(complex)
    # known top-row coefficients moved to the right-hand side
    G -= np.einsum("mnk,mk,j->mnj", plan.A, q, Sh[plan.J])
    G -= q[:, :, None] * St[plan.J][None, None, :]
    if bc.lateral is not None:
        chi = np.asarray(bc.lateral)
        if chi.shape != (2 * plan.M + 1, plan.J + 1):
            raise ValueError("lateral data does not match plan truncation")
        G += 2 * plan.mu()[:, :, None] * (chi @ Sh)[:, None, :]
    return G


def solve(plan: PoissonPlan, rhs, bc: BoundaryData) -> CylinderField:
    E = _as_gamma(rhs, plan)
    for arr in (E, bc.dirichlet_top, bc.lateral):
        if arr is not None and not np.all(np.isfinite(arr)):
            raise ValueError("non-finite Poisson input")
    G = _load(plan, E, bc)
    P = plan.Rinv_U
    Wt = np.swapaxes(plan.W, -1, -2)
    Y = (Wt @ G @ P) / plan.denominators
    gamma = np.empty((2 * plan.M + 1, plan.N + 1, plan.J + 1), dtype=complex)
    gamma[:, :, : plan.J] = plan.W @ Y @ P.T
    gamma[:, :, plan.J] = bc.dirichlet_top
    return CylinderField(gamma, plan.h)


def residual(plan: PoissonPlan, w, rhs, bc: BoundaryData) -> float:
    """max_m ||A Gamma Sigma + Gamma Sigma~ - G||_F / max(1, ||G||_F)."""
    g = plan.grid
    Gam = _as_gamma(w, plan)[:, :, : plan.J]
    G = _load(plan, rhs, bc)
    lhs = plan.A @ Gam @ g.Sigma + Gam @ g.Sigma_tilde
    num = np.linalg.norm(lhs - G, axis=(1, 2))
    den = np.maximum(1.0, np.linalg.norm(G, axis=(1, 2)))
    return float(np.max(num / den))


def dz_top(plan_or_grid, w):
    """Disc coefficients of w_z at z = 0 (last row of the differentiation matrix)."""
    grid = plan_or_grid.grid if isinstance(plan_or_grid, PoissonPlan) else plan_or_grid
    gamma = w.gamma if isinstance(w, CylinderField) else np.asarray(w)
    return gamma @ grid.D[-1]
