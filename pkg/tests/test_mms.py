"""Manufactured solution: sources and forcing work against independent oracles."""

import numpy as np
import pytest
import sympy as sp

from ns1d import ConfigurationError, FluidParams, Grid1D
from ns1d.experiments import convergence_study, mms_level, mms_residual
from ns1d.solver import make_mms

CASES = [(1.0, 2.0, 0.0), (0.6, 1.4, 0.0), (0.25, 3.0, 0.0), (1.5, 1.7, 0.05)]


def symbolic_fields(alpha, gamma, half_width, amp=sp.Rational(1, 10), eps=0, theta=sp.Rational(1, 4)):
    x, t = sp.symbols("x t", real=True)
    k = sp.pi / half_width
    rho = 2 + amp * sp.cos(k * x) * sp.exp(-t)
    u = amp * sp.sin(k * x) * sp.exp(-t)
    mu = rho**alpha + eps * rho**theta
    s_rho = sp.diff(rho, t) + sp.diff(rho * u, x)
    s_m = sp.diff(rho * u, t) + sp.diff(rho * u**2 + rho**gamma, x) - sp.diff(mu * sp.diff(u, x), x)
    return x, t, rho, u, s_rho, s_m


def random_points(n=100, seed=3, half_width=1.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, n), rng.uniform(0, 3, n)


@pytest.mark.parametrize("alpha,gamma,eps", CASES)
def test_sources_match_sympy(alpha, gamma, eps):
    p = FluidParams(alpha=alpha, gamma=gamma, rho_bar=2.0, eps_reg=eps, theta=0.25)
    mms = make_mms(Grid1D(1.0, 16), p)
    x, t, _, _, s_rho, s_m = symbolic_fields(sp.nsimplify(alpha), sp.nsimplify(gamma), 1,
                                             eps=sp.nsimplify(eps))
    f_rho = sp.lambdify((x, t), s_rho, "numpy")
    f_m = sp.lambdify((x, t), s_m, "numpy")
    xs, ts = random_points()
    np.testing.assert_allclose(mms.s_rho(xs, ts), f_rho(xs, ts), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(mms.s_m(xs, ts), f_m(xs, ts), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("alpha,gamma,eps", CASES)
def test_sources_match_finite_differences(alpha, gamma, eps):
    p = FluidParams(alpha=alpha, gamma=gamma, rho_bar=2.0, eps_reg=eps)
    mms = make_mms(Grid1D(2.0, 16), p)
    h = 1e-4

    def mu(r):
        return r**alpha + eps * r**p.theta

    def dx(f, x, t):
        return (f(x + h, t) - f(x - h, t)) / (2 * h)

    def dt(f, x, t):
        return (f(x, t + h) - f(x, t - h)) / (2 * h)

    m = lambda x, t: mms.rho(x, t) * mms.u(x, t)
    flux = lambda x, t: mms.rho(x, t) * mms.u(x, t) ** 2 + mms.rho(x, t) ** gamma
    visc = lambda x, t: mu(mms.rho(x, t)) * dx(mms.u, x, t)

    xs, ts = random_points(half_width=2.0, seed=5)
    fd_rho = dt(mms.rho, xs, ts) + dx(m, xs, ts)
    fd_m = dt(m, xs, ts) + dx(flux, xs, ts) - dx(visc, xs, ts)
    np.testing.assert_allclose(mms.s_rho(xs, ts), fd_rho, atol=1e-6)
    np.testing.assert_allclose(mms.s_m(xs, ts), fd_m, atol=1e-6)


@pytest.mark.parametrize("alpha,gamma", [(1.0, 2.0), (0.6, 1.4), (0.25, 3.0), (2.0, 1.5)])
def test_source_work_matches_symbolic_balance(alpha, gamma):
    # W = d/dt[combined density] + d/dx[alpha H2 + H1] + mu u_x^2 + alpha c (rho^b)_x^2
    a, g = sp.nsimplify(alpha), sp.nsimplify(gamma)
    rb = 2
    x, t, rho, u, _, _ = symbolic_fields(a, g, 1)
    w = u + rho ** (a - 2) * sp.diff(rho, x)
    rpsi = (rho**g - rb**g - g * rb ** (g - 1) * (rho - rb)) / (g - 1)
    dens = a * rho * w**2 / 2 + rho * u**2 / 2 + (a + 1) * rpsi
    dp = rho**g - rb**g
    h1 = rho * u**3 / 2 + u * rpsi + u * dp - rho**a * u * sp.diff(u, x)
    h2 = rho * u * w**2 / 2 + u * rpsi + u * dp
    b = (a + g - 1) / 2
    diss = rho**a * sp.diff(u, x) ** 2 + a * 4 * g / (g + a - 1) ** 2 * sp.diff(rho**b, x) ** 2
    work = sp.diff(dens, t) + sp.diff(a * h2 + h1, x) + diss
    f = sp.lambdify((x, t), work, "numpy")

    p = FluidParams(alpha=alpha, gamma=gamma, rho_bar=2.0)
    mms = make_mms(Grid1D(1.0, 16), p)
    xs, ts = random_points(seed=9)
    np.testing.assert_allclose(mms.source_work(xs, ts), f(xs, ts), rtol=1e-10, atol=1e-13)


def test_boundary_and_decay():
    p = FluidParams(alpha=1, gamma=2, rho_bar=2)
    mms = make_mms(Grid1D(3.0, 16), p)
    assert abs(mms.u(3.0, 0.4)) < 1e-16 and abs(mms.u(-3.0, 0.4)) < 1e-16
    assert mms.rho(np.linspace(-3, 3, 101), 0.0).min() > 0
    xs = np.linspace(-3, 3, 11)
    assert np.max(np.abs(mms.s_rho(xs, 50.0))) < 1e-20
    assert np.max(np.abs(mms.s_m(xs, 50.0))) < 1e-20


def test_source_work_rejects_regularized():
    mms = make_mms(Grid1D(1, 16), FluidParams(alpha=1, gamma=2, eps_reg=1e-3))
    with pytest.raises(ConfigurationError):
        mms.source_work(0.0, 0.0)


def test_finest_level_beats_coarsest():
    p = FluidParams(alpha=1, gamma=2, rho_bar=2)
    coarse = mms_level(p, 64)
    fine = mms_level(p, 256)
    assert fine["err_rho"] < coarse["err_rho"]
    assert fine["dt"] == pytest.approx(coarse["dt"] / 4, rel=0.02)


def test_exact_pair_residual_refines():
    p = FluidParams(alpha=0.6, gamma=1.4, rho_bar=2)
    r = [mms_residual(p, Grid1D(1.0, n), 0.5 / n) for n in (64, 128, 256)]
    assert r[0] / r[1] >= 1.8 and r[1] / r[2] >= 1.8


@pytest.mark.parametrize("alpha,gamma", [(1.0, 2.0), (0.25, 1.5), (1.5, 3.0)])
def test_convergence_order(alpha, gamma):
    out = convergence_study(FluidParams(alpha=alpha, gamma=gamma, rho_bar=2.0), levels=3, n0=64)
    assert out.passed, out.measured


def test_convergence_needs_three_levels():
    with pytest.raises(ConfigurationError):
        convergence_study(FluidParams(alpha=1, gamma=2), levels=2)
