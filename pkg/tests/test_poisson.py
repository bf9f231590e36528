import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfedno.disc_basis import build_quadrature, coeffs_unit
from tfedno.poisson import BoundaryData, CylinderField, build_plan, dz_top, residual, solve, stiffness_A
from tfedno.experiments import separable_error


def zeros(plan):
    return np.zeros((2 * plan.M + 1, plan.N + 1, plan.J + 1), dtype=complex)


def manufactured(plan, w, r, chi):
    """rhs, boundary data and the nodal target for callables w, r of (rho, theta, z) and chi of (theta, z)."""
    quad = build_quadrature(plan.M, plan.N)
    R, T = np.meshgrid(quad.rho, quad.theta, indexing="ij")
    z = plan.grid.z
    rhs = np.stack([quad.project(r(R, T, zj) + 0 * R) for zj in z], axis=-1)
    target = np.stack([quad.project(w(R, T, zj) + 0 * R) for zj in z], axis=-1)
    nt = 4 * plan.M + 8
    th = 2 * np.pi * np.arange(nt) / nt
    lat = np.zeros((2 * plan.M + 1, plan.J + 1), dtype=complex)
    for j, zj in enumerate(z):
        ang = np.fft.fft(chi(th, zj) + 0 * th) / nt
        lat[:, j] = ang[np.arange(-plan.M, plan.M + 1) % nt]
    return rhs, BoundaryData(target[:, :, -1].copy(), lat), target


def test_stiffness_examples():
    assert stiffness_A(0, 3)[0, 0] == 0
    assert stiffness_A(1, 3)[0, 0] == pytest.approx(4)
    assert stiffness_A(0, 3)[1, 1] == pytest.approx(24)
    assert np.array_equal(stiffness_A(2, 4), stiffness_A(-2, 4))


def test_stiffness_matches_gradient_quadrature():
    # A(m)_{n'n} = (1/pi) int grad zeta_{mn'} . conj(grad zeta_{mn})
    M, N = 3, 5
    quad = build_quadrature(M, N)
    for m in range(M + 1):
        A = stiffness_A(m, N)
        dr, ot = [], []
        for n in range(N + 1):
            c = coeffs_unit(M, N, m, n)
            dr.append(quad.to_grid(c, "drho"))
            ot.append(quad.to_grid(c, "over_rho"))
        for a in range(N + 1):
            for b in range(N + 1):
                val = quad.integrate(dr[a] * np.conj(dr[b]) + ot[a] * np.conj(ot[b]))
                assert val.real == pytest.approx(A[a, b], abs=1e-10 * max(1, abs(A[a, b])))


@given(st.integers(0, 8), st.integers(0, 12))
def test_stiffness_spd(m, N):
    A = stiffness_A(m, N)
    assert np.array_equal(A, A.T)
    ev = np.linalg.eigvalsh(A)
    scale = max(1.0, ev.max())
    if m == 0:
        assert ev.min() > -1e-12 * scale
        assert np.sum(ev < 1e-9 * scale) == 1
    else:
        assert ev.min() > 0


def test_plan_invariants(small_plan):
    p = small_plan
    assert p.W.shape == (2 * p.M + 1, p.N + 1, p.N + 1)
    assert p.Lam.shape == (p.J,)
    eye = np.eye(p.N + 1)
    for i in range(2 * p.M + 1):
        W = p.W[i]
        assert np.max(np.abs(W.T @ W - eye)) < 1e-12
        A = p.A[i]
        assert np.linalg.norm(A - W @ np.diag(p.D2[i]) @ W.T) <= 1e-12 * np.linalg.norm(A)
    RRt = p.grid.R @ np.linalg.inv(p.grid.Rtilde)
    assert np.linalg.norm(RRt - p.U @ np.diag(p.Lam) @ p.V.T) <= 1e-12 * np.linalg.norm(RRt)
    assert np.all(p.Lam > 0)
    assert np.all(p.denominators > 0)
    assert np.all(np.diff(p.D2, axis=1) >= 0)


def test_plan_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_plan(0, 4, 4, 1.0)
    with pytest.raises(ValueError):
        build_plan(2, 4, 0, 1.0)


def test_constant_solution(small_plan):
    p = small_plan
    bc = BoundaryData(1.7 * coeffs_unit(p.M, p.N, 0, 0))
    w = solve(p, zeros(p), bc)
    target = zeros(p)
    target[p.M, 0] = 1.7
    assert np.max(np.abs(w.gamma - target)) < 1e-12
    assert residual(p, w, zeros(p), bc) < 1e-11


@pytest.mark.parametrize("J", [2, 5, 12])
def test_quadratic_in_depth(J):
    h = 0.9
    p = build_plan(3, 6, J, h)
    rhs, bc, target = manufactured(p, lambda r, t, z: (z + h) ** 2, lambda r, t, z: -2.0, lambda t, z: 0.0)
    w = solve(p, rhs, bc)
    assert np.max(np.abs(w.gamma - target)) < 1e-11
    assert residual(p, w, rhs, bc) < 1e-11


def test_harmonic_with_lateral_flux():
    # rho^3 e^{3i theta} is harmonic with d_rho = 3 e^{3 i theta} on the wall
    p = build_plan(4, 6, 6, 1.1)
    rhs, bc, target = manufactured(
        p, lambda r, t, z: r**3 * np.exp(3j * t), lambda r, t, z: 0.0, lambda t, z: 3 * np.exp(3j * t)
    )
    w = solve(p, rhs, bc)
    assert np.max(np.abs(w.gamma - target)) < 1e-11


def test_polynomial_with_all_terms():
    # w = x (z + h)^2 + rho^2 exercises rhs, lateral flux and the top data together
    h = 0.7
    p = build_plan(3, 6, 8, h)

    def w(r, t, z):
        return r * np.cos(t) * (z + h) ** 2 + r**2

    def r_(r, t, z):
        return -(2 * r * np.cos(t) + 4)

    def chi(t, z):
        return np.cos(t) * (z + h) ** 2 + 2

    rhs, bc, target = manufactured(p, w, r_, chi)
    sol = solve(p, rhs, bc)
    assert np.max(np.abs(sol.gamma - target)) < 1e-11
    assert residual(p, sol, rhs, bc) < 1e-11


def test_separable_bessel_solution():
    p = build_plan(4, 42, 20, 1.0)
    err, res = separable_error(p, 3, 2)
    assert err <= 1e-8
    assert res <= 1e-11


def test_separable_error_decays_with_N():
    grid_plan = build_plan(4, 10, 16, 1.0)
    errs = [separable_error(build_plan(4, n, 16, 1.0, grid=grid_plan.grid), 3, 2)[0] for n in (3, 6, 9)]
    assert errs[0] > 10 * errs[1] > 100 * errs[2]


def test_residual_examples(small_plan, rng):
    p = small_plan
    zero_bc = BoundaryData(np.zeros((2 * p.M + 1, p.N + 1), dtype=complex))
    assert residual(p, CylinderField.zeros(p.M, p.N, p.J, p.h), zeros(p), zero_bc) == 0
    rhs = rng.standard_normal(zeros(p).shape) + 1j * rng.standard_normal(zeros(p).shape)
    lat = rng.standard_normal((2 * p.M + 1, p.J + 1))
    bc = BoundaryData(rng.standard_normal((2 * p.M + 1, p.N + 1)) + 0j, lat)
    w = solve(p, rhs, bc)
    assert residual(p, w, rhs, bc) < 1e-11
    bumped = w.gamma.copy()
    bumped[p.M + 1, 2, 3] += 1.0
    assert residual(p, bumped, rhs, bc) > 1e-3


def test_top_row_is_dirichlet_data(small_plan, rng):
    p = small_plan
    q = rng.standard_normal((2 * p.M + 1, p.N + 1)) + 1j * rng.standard_normal((2 * p.M + 1, p.N + 1))
    w = solve(p, zeros(p), BoundaryData(q))
    assert np.array_equal(w.gamma[:, :, -1], q)


@given(st.integers(-6, 6), st.integers(0, 2**31 - 1))
def test_per_mode_decoupling(m0, seed):
    p = build_plan(6, 8, 6, 1.0)
    rng = np.random.default_rng(seed)
    rhs = zeros(p)
    rhs[p.M + m0] = rng.standard_normal((p.N + 1, p.J + 1))
    q = np.zeros((2 * p.M + 1, p.N + 1), dtype=complex)
    q[p.M + m0] = rng.standard_normal(p.N + 1)
    lat = np.zeros((2 * p.M + 1, p.J + 1), dtype=complex)
    lat[p.M + m0] = rng.standard_normal(p.J + 1)
    w = solve(p, rhs, BoundaryData(q, lat))
    others = np.delete(w.gamma, p.M + m0, axis=0)
    assert np.max(np.abs(others)) <= 1e-13


def test_variational_operator_symmetric(small_plan):
    p, g = small_plan, small_plan.grid
    for i in range(2 * p.M + 1):
        S = np.kron(g.Sigma, p.A[i]) + np.kron(g.Sigma_tilde, np.eye(p.N + 1))
        assert np.max(np.abs(S - S.T)) <= 1e-12 * np.abs(S).max()


def test_linearity(small_plan, rng):
    p = small_plan
    shape = zeros(p).shape

    def data():
        return (rng.standard_normal(shape), BoundaryData(rng.standard_normal(shape[:2]) + 0j,
                                                        rng.standard_normal((shape[0], p.J + 1))))

    (r1, b1), (r2, b2) = data(), data()
    w = solve(p, 2 * r1 - r2, BoundaryData(2 * b1.dirichlet_top - b2.dirichlet_top, 2 * b1.lateral - b2.lateral))
    ref = 2 * solve(p, r1, b1).gamma - solve(p, r2, b2).gamma
    assert np.max(np.abs(w.gamma - ref)) < 1e-10 * np.abs(ref).max()


def test_dz_top_of_flat_mode():
    # w = J-free check: q = zeta_10 gives d_z w at the top equal to tanh-like positive multiple of q
    p = build_plan(2, 16, 16, 0.5)
    q = coeffs_unit(2, 16, 1, 0)
    g = dz_top(p, solve(p, zeros(p), BoundaryData(q)))
    assert g[3, 0].real > 0
    assert math.isclose(np.vdot(q, g).real, np.linalg.norm(g) * np.linalg.norm(q), rel_tol=0.2)


def test_solve_rejects_bad_inputs(small_plan):
    p = small_plan
    q = np.zeros((2 * p.M + 1, p.N + 1), dtype=complex)
    with pytest.raises(ValueError):
        solve(p, np.zeros((1, 2, 3)), BoundaryData(q))
    with pytest.raises(ValueError):
        solve(p, zeros(p), BoundaryData(q[:, :-1]))
    with pytest.raises(ValueError):
        solve(p, zeros(p), BoundaryData(q, np.zeros((2 * p.M + 1, p.J))))
    bad = zeros(p)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        solve(p, bad, BoundaryData(q))
