import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ns1d import Grid1D, NumericalError, PreconditionError
from ns1d.calculus import (
    FloorCounter,
    TridiagonalSystem,
    central_gradient,
    power_gradient,
    solve_tridiagonal,
    trapezoid_integral,
)


def random_dominant(rng, n):
    lower = rng.uniform(-1, 1, n)
    upper = rng.uniform(-1, 1, n)
    diag = (np.abs(lower) + np.abs(upper) + rng.uniform(0.01, 2, n)) * rng.choice([-1, 1], n)
    return TridiagonalSystem(lower, diag, upper, rng.normal(size=n))


def dense_elimination(a, b):
    # Gaussian elimination with partial pivoting, independent of the Thomas kernel
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    n = b.size
    for k in range(n):
        piv = k + np.argmax(np.abs(a[k:, k]))
        a[[k, piv]] = a[[piv, k]]
        b[[k, piv]] = b[[piv, k]]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            a[i, k:] -= f * a[k, k:]
            b[i] -= f * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x


class TestCentralGradient:
    def test_constant(self):
        g = Grid1D(2, 16)
        assert np.all(central_gradient(np.full(16, 3.3), g) == 0)

    def test_linear_exact(self):
        g = Grid1D(2, 16)
        grad = central_gradient(np.asarray(g.x), g)
        np.testing.assert_allclose(grad, 1.0, rtol=1e-13)

    def test_quadratic_exact_interior(self):
        g = Grid1D(2.0, 40)  # dx = 0.1
        x = np.asarray(g.x)
        grad = central_gradient(x**2, g)
        i = np.argmin(np.abs(x - 1.05))
        assert grad[i] == pytest.approx(2 * x[i], rel=1e-13)
        np.testing.assert_allclose(grad[1:-1], 2 * x[1:-1], rtol=1e-12, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(PreconditionError):
            central_gradient(np.zeros(5), Grid1D(1, 8))

    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_linearity(self, a, b):
        g = Grid1D(3, 32)
        x = np.asarray(g.x)
        f, h = np.sin(x), x**3
        lhs = central_gradient(a * f + b * h, g)
        rhs = a * central_gradient(f, g) + b * central_gradient(h, g)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-10)

    def test_telescoping_refinement(self):
        # int over interior of f' minus boundary difference is O(dx)
        errs = []
        for n in (64, 128, 256, 512):
            g = Grid1D(1.0, n)
            f = np.exp(np.asarray(g.x))
            grad = central_gradient(f, g)
            err = abs(np.sum(grad[1:-1]) * g.dx - (math.e - 1 / math.e))
            errs.append(err)
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        assert min(ratios) >= 1.8


class TestPowerGradient:
    def test_constant(self):
        g = Grid1D(1, 16)
        for beta in (-0.5, 0, 0.5, 1, 2.5):
            assert np.all(power_gradient(np.full(16, 2.0), beta, g) == 0)

    def test_beta_one_is_central(self):
        g = Grid1D(1, 33)
        rho = np.exp(np.asarray(g.x))
        np.testing.assert_array_equal(power_gradient(rho, 1, g), central_gradient(rho, g))

    def test_exp_profile_converges(self):
        errs = []
        for n in (65, 129, 257):
            g = Grid1D(1.0, n)
            rho = np.exp(np.asarray(g.x))
            errs.append(abs(power_gradient(rho, 1, g)[n // 2] - 1.0))
        assert errs[-1] < 1e-4 and errs[0] > errs[1] > errs[2]

    def test_log_branch(self):
        g = Grid1D(1.0, 100)
        rho = np.exp(np.asarray(g.x))
        np.testing.assert_allclose(power_gradient(rho, 0, g)[1:-1], 1.0, rtol=1e-12)

    def test_floor_counted(self):
        g = Grid1D(1.0, 10)
        rho = np.ones(10)
        rho[4:6] = 0.0
        c = FloorCounter()
        out = power_gradient(rho, -0.5, g, floor=1e-12, counter=c)
        assert c.hits == 2 and np.all(np.isfinite(out))
        c2 = FloorCounter()
        power_gradient(rho, 0.5, g, counter=c2)
        assert c2.hits == 0


class TestIntegral:
    def test_ones(self):
        for n in (8, 9, 100):
            assert trapezoid_integral(np.ones(n), Grid1D(1, n)) == pytest.approx(2.0, rel=1e-14)

    def test_odd(self):
        g = Grid1D(3, 101)
        assert abs(trapezoid_integral(np.asarray(g.x), g)) < 1e-13

    def test_gaussian(self):
        g = Grid1D(10, 4096)
        val = trapezoid_integral(np.exp(-np.asarray(g.x) ** 2), g)
        assert val == pytest.approx(math.sqrt(math.pi), abs=1e-8)


class TestTridiagonal:
    def test_identity(self):
        rhs = np.array([3.0, -1.0, 2.5, 7.0])
        sys = TridiagonalSystem(np.zeros(4), np.ones(4), np.zeros(4), rhs)
        np.testing.assert_array_equal(solve_tridiagonal(sys), rhs)

    def test_three_by_three(self):
        sys = TridiagonalSystem(np.full(3, -1.0), np.full(3, 2.0), np.full(3, -1.0),
                                np.array([1.0, 0.0, 1.0]))
        x = solve_tridiagonal(sys)
        np.testing.assert_allclose(x, dense_elimination(sys.dense(), sys.rhs), rtol=1e-14)
        np.testing.assert_allclose(x, 1.0, rtol=1e-14)

    def test_random_64(self):
        rng = np.random.default_rng(7)
        sys = random_dominant(rng, 64)
        x = solve_tridiagonal(sys)
        np.testing.assert_allclose(x, dense_elimination(sys.dense(), sys.rhs), rtol=1e-10, atol=1e-12)
        res = np.max(np.abs(sys.matvec(x) - sys.rhs))
        assert res <= 1e-10 * np.max(np.abs(sys.rhs))

    def test_thousand_random(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(2, 40))
            sys = random_dominant(rng, n)
            ref = np.linalg.solve(sys.dense(), sys.rhs)
            x = solve_tridiagonal(sys)
            worst = max(worst, np.max(np.abs(x - ref)) / max(np.max(np.abs(ref)), 1e-300))
        assert worst <= 1e-9

    def test_not_dominant(self):
        sys = TridiagonalSystem(np.array([0, 1.0, 3.0]), np.array([2.0, 1.0, 2.0]),
                                np.array([1.0, 1.0, 0]), np.ones(3))
        with pytest.raises(NumericalError) as err:
            solve_tridiagonal(sys)
        assert err.value.row == 1

    def test_length_mismatch(self):
        with pytest.raises(PreconditionError):
            TridiagonalSystem(np.zeros(3), np.ones(4), np.zeros(4), np.ones(4))
