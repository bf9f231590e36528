"""Chebyshev-Lobatto Lagrange basis on [-h, 0]."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .disc_basis import gauss_legendre


def cheb_lobatto_nodes(J, h):
    if J < 1:
        raise ValueError("J must be at least 1")
    if not h > 0:
        raise ValueError("depth h must be positive")
    z = -0.5 * h * (1 + np.cos(np.pi * np.arange(J + 1) / J))
    z[0], z[-1] = -h, 0.0
    return z


def barycentric_weights(J):
    w = (-1.0) ** np.arange(J + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def diff_matrix(z, w=None):
    """Lagrange differentiation matrix on nodes z (negative-sum diagonal)."""
    z = np.asarray(z, dtype=float)
    w = barycentric_weights(len(z) - 1) if w is None else w
    dz = z[:, None] - z[None, :]
    np.fill_diagonal(dz, 1.0)
    D = (w[None, :] / w[:, None]) / dz
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def interp_matrix(z, w, x):
    """Rows give (ell_0(x_i), ..., ell_J(x_i)) by the barycentric formula."""
    x = np.asarray(x, dtype=float)
    diff = x[:, None] - z[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    t = w[None, :] / diff
    L = t / t.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return L


def _qr_positive(A):
    Q, R = np.linalg.qr(A)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, R * s[:, None]


@dataclass(frozen=True, eq=False)
class VerticalGrid:
    """Nodes, differentiation matrix and Gauss-rule factors on [-h, 0].

    ``E`` / ``Etilde`` are the (J+1)-point Gauss samples of ell_j and ell_j'
    (times sqrt of the weights) over all J+1 Lagrange indices; the Poisson
    solve uses the first J columns.  ``Sigma_hat[j, j'] = int ell_j ell_j'``
    for j <= J, j' < J and ``Sigma_tilde_full[j, j'] = int ell_j' ell_j''``
    likewise.
    """

    J: int
    h: float
    z: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    E_full: np.ndarray = field(repr=False)
    Etilde_full: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    Rtilde: np.ndarray = field(repr=False)

    @property
    def E(self):
        return self.E_full[:, : self.J]

    @property
    def Etilde(self):
        return self.Etilde_full[:, : self.J]

    @property
    def Sigma_hat(self):
        return self.E_full.T @ self.E

    @property
    def Sigma(self):
        return self.E.T @ self.E

    @property
    def Sigma_tilde_full(self):
        return self.Etilde_full.T @ self.Etilde

    @property
    def Sigma_tilde(self):
        return self.Etilde.T @ self.Etilde

    @property
    def D2(self):
        return self.D @ self.D

    def interp(self, x):
        return interp_matrix(self.z, barycentric_weights(self.J), x)


def quadrature_factors(J, h):
    """E, Etilde (first J columns), their positive-diagonal R factors and Sigma_hat."""
    g = build_vertical_grid(J, h)
    return g.E, g.Etilde, g.R, g.Rtilde, g.Sigma_hat


def gauss_rule(J, h):
    """(J+1)-point Gauss-Legendre nodes and weights on [-h, 0]."""
    x, s = gauss_legendre(J + 1)
    return 0.5 * h * (x - 1), 0.5 * h * s


def build_vertical_grid(J, h):
    z = cheb_lobatto_nodes(J, h)
    w = barycentric_weights(J)
    D = diff_matrix(z, w)
    xg, wg = gauss_rule(J, h)
    sg = np.sqrt(wg)
    L = interp_matrix(z, w, xg)
    E_full = L * sg[:, None]
    Etilde_full = (L @ D) * sg[:, None]
    _, R = _qr_positive(E_full[:, :J])
    _, Rt = _qr_positive(Etilde_full[:, :J])
    for name, T in (("R", R), ("Rtilde", Rt)):
        d = np.abs(np.diag(T))
        if d.min() <= 1e-13 * d.max():
            raise np.linalg.LinAlgError(f"{name} is numerically singular for J={J}")
    return VerticalGrid(J, float(h), z, D, E_full, Etilde_full, R, Rt)
