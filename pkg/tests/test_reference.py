import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfedno.disc_basis import boundary_values, build_quadrature, eval_field
from tfedno.reference import (
    BesselMode,
    Surface,
    bessel_j,
    bessel_j_table,
    bessel_jprime,
    bessel_jprime_zero,
    bessel_jprime_zeros,
    bessel_project,
    bessel_series,
    corrected_zernike,
    exact_dno_case,
    zernike_coeffs_on,
)

special = pytest.importorskip("scipy.special")


def bisect(fun, lo, hi, tol=1e-15):
    flo = fun(lo)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if np.sign(fun(mid)) == np.sign(flo):
            lo, flo = mid, fun(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_bessel_examples():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    root = bisect(lambda x: bessel_j(0, x), 2.0, 3.0)
    assert root == pytest.approx(2.404826, abs=1e-6)
    assert abs(bessel_j(0, root)) < 1e-14


def test_bessel_matches_scipy():
    x = np.linspace(0.0, 60.0, 1201)
    table = bessel_j_table(40, x)
    for m in range(41):
        assert np.max(np.abs(table[m] - special.jv(m, x))) <= 1e-13
    assert np.max(np.abs(bessel_j(-3, x) + special.jv(3, x))) <= 1e-13
    assert np.max(np.abs(bessel_jprime(4, x) - special.jvp(4, x))) <= 1e-13
    with pytest.raises(ValueError):
        bessel_j(0, -1.0)


@given(st.integers(0, 30), st.floats(0.0, 60.0))
def test_bessel_recurrence(m, x):
    t = bessel_j_table(m + 2, x)
    assert np.all(np.isfinite(t)) and np.all(np.abs(t) <= 1.0)
    assert abs(x * (t[m] + t[m + 2]) - 2 * (m + 1) * t[m + 1]) <= 1e-12 * max(1.0, x)


def test_jprime_zero_examples():
    assert bessel_jprime_zero(1, 1) == pytest.approx(1.841184, abs=1e-6)
    assert bessel_jprime_zero(0, 1) == pytest.approx(3.831706, abs=1e-6)
    assert isinstance(bessel_jprime_zero(2, 3), float)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 17, 40, 64])
def test_jprime_zeros_match_scipy_and_residual(m):
    zs = bessel_jprime_zeros(m, 64)
    ref = special.jnp_zeros(m, 64)
    assert np.max(np.abs(zs - ref) / ref) < 1e-13
    assert np.max(np.abs(bessel_jprime(m, zs))) <= 1e-12
    assert np.all(np.diff(zs) > 0)


def test_zero_cache_is_not_mutable():
    zs = bessel_jprime_zeros(3, 5)
    zs[0] = -1.0
    assert bessel_jprime_zero(3, 1) > 0
    with pytest.raises(ValueError):
        bessel_jprime_zero(2, 0)


def test_bessel_mode_gradient():
    mode = BesselMode(2, 1)
    rho = np.linspace(0.1, 1.0, 7)
    th = np.linspace(0.0, 6.0, 7)
    dr, dt = mode.gradient(rho, th)
    d = 1e-6
    fd_r = (mode(rho + d, th) - mode(rho - d, th)) / (2 * d)
    fd_t = (mode(rho, th + d) - mode(rho, th - d)) / (2 * d * rho)
    assert np.max(np.abs(dr - fd_r)) < 1e-8
    assert np.max(np.abs(dt - fd_t)) < 1e-8
    # walls: d_rho vanishes at rho = 1
    assert np.max(np.abs(mode.gradient(np.ones(5), th[:5])[0])) < 1e-12


def test_exact_case_flat_surface():
    quad = build_quadrature(4, 30)
    mode = BesselMode(1, 1)
    h = 0.8
    case = exact_dno_case(3, 2, Surface(mode, 0.0), h, quad)
    a = bessel_jprime_zero(3, 2)
    assert np.max(np.abs(case.neumann - a * math.tanh(a * h) * case.q)) < 1e-12
    R, T = np.meshgrid(quad.rho, quad.theta, indexing="ij")
    assert np.max(np.abs(case.q_at(R, T) - bessel_j(3, a * R) * np.cos(3 * T))) < 1e-14


@pytest.mark.parametrize("pair", [(2, 1), (3, 2), (5, 1)])
def test_exact_case_has_zero_flux(pair):
    quad = build_quadrature(32, 42, Ng=80)
    case = exact_dno_case(pair[0], pair[1], Surface(BesselMode(1, 1), 0.2), 1.0, quad)
    R, T = np.meshgrid(quad.rho, quad.theta, indexing="ij")
    assert abs(quad.integrate(case.neumann_at(R, T))) <= 1e-10


def test_exact_case_rejects_shallow_depth():
    quad = build_quadrature(2, 4)
    with pytest.raises(ValueError):
        exact_dno_case(1, 1, Surface(BesselMode(1, 1), 0.9), 0.5, quad)
    with pytest.raises(ValueError):
        exact_dno_case(1, 0, Surface(BesselMode(1, 1), 0.1), 1.0, quad)


def test_bessel_project_examples():
    beta = bessel_project(lambda r, t: bessel_j(0, bessel_jprime_zero(0, 1) * r), 0, 6)
    assert beta[0] == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(beta[1:])) <= 1e-10
    assert abs(bessel_project(lambda r, t: np.ones_like(r), 0, 3)[0]) <= 1e-10
    a = bessel_jprime_zero(2, 3)
    beta = bessel_project(lambda r, t: bessel_j(2, a * r) * np.exp(2j * t), 2, 5)
    assert beta[2] == pytest.approx(1.0, abs=1e-10)


def test_bessel_series_round_trip():
    beta = np.array([0.5, -0.25, 0.125])
    rho = np.linspace(0, 1, 9)
    th = np.zeros(9)
    g = bessel_series(beta, 1, rho, th)
    again = bessel_project(lambda r, t: bessel_series(beta, 1, r, t), 1, 3)
    assert np.max(np.abs(again - beta)) < 1e-10
    assert g.shape == rho.shape


def _drho_at_wall(c, m):
    # radial profile of the e^{i m theta} component is a polynomial of degree <= 2N + |m|
    rho = np.cos(np.linspace(0, np.pi / 2, 60)) ** 2
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    vals = np.array([eval_field(c, r * np.ones_like(th), th) for r in rho])
    comp = (vals * np.exp(-1j * m * th)).mean(axis=1)
    deg = 2 * (c.shape[1] - 1) + abs(m)
    p = np.polynomial.Polynomial.fit(rho, comp.real, deg)
    return p.deriv()(1.0)


def test_corrected_zernike_examples():
    c = corrected_zernike(1, 1)
    assert c[2, 1] == 1.0
    assert c[2, 0] == pytest.approx(-7 * math.sqrt(2))
    for mp, npr in [(1, 1), (0, 1), (0, 3), (2, 2), (4, 3)]:
        c = corrected_zernike(mp, npr)
        M = (c.shape[0] - 1) // 2
        assert abs(boundary_values(c)[1][M + mp]) <= 1e-11
        assert abs(_drho_at_wall(c, mp)) <= 1e-9 * np.abs(c).max()
    with pytest.raises(ValueError):
        corrected_zernike(0, 0)
    with pytest.raises(ValueError):
        corrected_zernike(3, 1, M=2)


def test_zernike_and_bessel_views_agree():
    # the Zernike projection of a Neumann Bessel mode reproduces it on the disc
    mode = BesselMode(2, 2)
    quad = build_quadrature(2, 40)
    c = zernike_coeffs_on(mode, quad)
    rho = np.linspace(0, 1, 11)
    th = np.linspace(0, 6, 11)
    assert np.max(np.abs(eval_field(c, rho, th) - mode(rho, th))) < 1e-12
    beta = bessel_project(lambda r, t: eval_field(c, r, t), 2, 4)
    assert beta[1] == pytest.approx(0.5, abs=1e-10)
