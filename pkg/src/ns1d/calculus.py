"""Grid kernels: gradients, quadrature and the tridiagonal solve."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import NumericalError, PreconditionError

DEFAULT_FLOOR = 1e-12


@dataclass
class FloorCounter:
    """Counts cells where a density floor replaced the sampled value."""

    hits: int = 0

    def add(self, n):
        self.hits += int(n)


def _check_length(field, grid):
    field = np.asarray(field, dtype=float)
    if field.shape != (grid.n_cells,):
        raise PreconditionError(
            f"field length {field.shape} does not match grid with {grid.n_cells} cells"
        )
    return field


def central_gradient(field, grid) -> np.ndarray:
    """Central differences inside, first-order one-sided at the two ends."""
    f = _check_length(field, grid)
    if f.size < 3:
        raise PreconditionError("central_gradient needs at least 3 cells")
    dx = grid.dx
    g = np.empty_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    g[0] = (f[1] - f[0]) / dx
    g[-1] = (f[-1] - f[-2]) / dx
    return g


def power_gradient(rho, beta, grid, floor=DEFAULT_FLOOR, counter=None) -> np.ndarray:
    """Gradient of ``rho**beta``; ``beta == 0`` selects ``log(rho)`` instead.

    Negative powers and the logarithm are evaluated on ``max(rho, floor)``;
    the number of floored cells is added to ``counter``.
    """
    rho = _check_length(rho, grid)
    if beta == 1:
        return central_gradient(rho, grid)
    if beta == 0 or beta < 0:
        low = rho < floor
        if counter is not None:
            counter.add(np.count_nonzero(low))
        rho = np.where(low, floor, rho)
    if beta == 0:
        return central_gradient(np.log(rho), grid)
    return central_gradient(rho**beta, grid)


def trapezoid_integral(field, grid) -> float:
    """Midpoint rule ``dx * sum(field)`` on the cell centres.

    Summed with ``cumsum`` so the result matches the last entry of the
    Lagrangian mass coordinate bit for bit.
    """
    f = _check_length(field, grid)
    return float(np.cumsum(f)[-1] * grid.dx)


@dataclass
class TridiagonalSystem:
    """Row i reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        for name in ("lower", "upper", "rhs"):
            if len(getattr(self, name)) != n:
                raise PreconditionError(f"tridiagonal {name} length differs from diag ({n})")

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y

    def dense(self):
        n = len(self.diag)
        a = np.diag(np.asarray(self.diag, dtype=float))
        idx = np.arange(n - 1)
        a[idx + 1, idx] = self.lower[1:]
        a[idx, idx + 1] = self.upper[:-1]
        return a


@numba.njit(cache=True)
def _thomas(a, b, c, d):
    n = b.size
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = c[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, n):
        den = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / den
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas elimination for a diagonally dominant system.

    Every row must satisfy ``|diag| >= |lower| + |upper|`` with ``diag != 0``
    and at least one row must be strictly dominant; otherwise a
    NumericalError naming the first offending row is raised.
    """
    a = np.array(sys.lower, dtype=float)
    b = np.array(sys.diag, dtype=float)
    c = np.array(sys.upper, dtype=float)
    d = np.array(sys.rhs, dtype=float)
    a[0] = 0.0
    c[-1] = 0.0
    off = np.abs(a) + np.abs(c)
    weak = (np.abs(b) < off) | (b == 0)
    if np.any(weak):
        row = int(np.argmax(weak))
        raise NumericalError(f"tridiagonal system not diagonally dominant at row {row}", row=row)
    if not np.any(np.abs(b) > off):
        raise NumericalError("tridiagonal system has no strictly dominant row", row=0)
    x = _thomas(a, b, c, d)
    if not np.all(np.isfinite(x)):
        raise NumericalError("tridiagonal solve produced non-finite values")
    return x
