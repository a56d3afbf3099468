"""Domain types, constitutive laws and initial data.

The system being modelled is the 1D isentropic compressible Navier-Stokes
system with pressure ``P(rho) = rho**gamma`` and density-dependent
viscosity ``mu(rho) = rho**alpha`` (optionally regularized to
``rho**alpha + eps * rho**theta``), posed on the truncated interval
``[-M, M]`` with ``u = 0`` at both walls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "FluidParams",
    "Grid1D",
    "FluidState",
    "InitialProfile",
    "AdmissibilityReport",
    "pressure",
    "viscosity",
    "viscosity_derivative",
    "rho_psi",
    "enthalpy",
    "initial_floor",
    "build_initial_data",
    "admissibility_report",
]

PROFILE_KINDS = ("constant", "gaussian_bump", "vacuum_well", "custom_table")
VELOCITY_KINDS = ("zero", "gaussian_bump", "custom_table")


@dataclass(frozen=True)
class FluidParams:
    """Constitutive exponents, far-field density and regularization."""

    alpha: float
    gamma: float
    rho_bar: float = 1.0
    eps_reg: float = 0.0
    theta: float = 0.25
    delta_moment: float = 0.5
    floor_c0: float = 1.0

    def __post_init__(self):
        checks = [
            (self.gamma > 1, "gamma", "gamma > 1"),
            (self.alpha > 0, "alpha", "alpha > 0"),
            (0 < self.theta < 0.5, "theta", "0 < theta < 1/2"),
            (self.eps_reg >= 0, "eps_reg", "eps_reg >= 0"),
            (self.rho_bar >= 0, "rho_bar", "rho_bar >= 0"),
            (0 < self.delta_moment < 1, "delta_moment", "0 < delta_moment < 1"),
            (self.floor_c0 > 0, "floor_c0", "floor_c0 > 0"),
        ]
        for ok, key, rule in checks:
            if not ok:
                raise ConfigurationError(f"{key}={getattr(self, key)!r} violates {rule}")

    @property
    def regime(self) -> str:
        """``"I"`` for 0 < alpha <= 1/2, ``"II"`` for alpha > 1/2."""
        return "I" if self.alpha <= 0.5 else "II"

    @property
    def b(self) -> float:
        return 0.5 * (self.alpha + self.gamma - 1.0)


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centred mesh on [-M, M]."""

    half_width: float
    n_cells: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigurationError(f"grid.M={self.half_width!r} must be > 0")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ConfigurationError(f"grid.n={self.n_cells!r} must be an integer >= 8")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_cells

    @cached_property
    def x(self) -> np.ndarray:
        # offsets i - (n-1)/2 are exact half-integers, so x is exactly odd
        x = self.dx * (np.arange(self.n_cells) - 0.5 * (self.n_cells - 1))
        x.flags.writeable = False
        return x

    @cached_property
    def faces(self) -> np.ndarray:
        f = self.dx * (np.arange(self.n_cells + 1) - 0.5 * self.n_cells)
        f.flags.writeable = False
        return f


@dataclass(frozen=True, eq=False)
class FluidState:
    """Cell densities and velocities at one time level."""

    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        u = np.array(self.u, dtype=float)
        if rho.ndim != 1 or rho.shape != u.shape:
            raise ConfigurationError("rho and u must be 1D arrays of equal length")
        rho.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))

    @property
    def m(self) -> np.ndarray:
        return self.rho * self.u

    def __len__(self):
        return self.rho.size


@dataclass(frozen=True)
class InitialProfile:
    """Recipe for rho_0 and u_0.

    ``gaussian_bump``: ``rho_bar + amplitude * exp(-((x - center) / width)**2)``.
    ``vacuum_well``: zero density on ``|x - center| < width / 2``, recovering to
    ``rho_bar`` over a smooth edge of length ``edge``.
    ``custom_table``: linear interpolation of ``table_x`` / ``table_rho`` /
    ``table_u``.
    """

    kind: str = "constant"
    amplitude: float = 0.5
    center: float = 0.0
    width: float = 1.0
    edge: float = 1.0
    u0_kind: str = "zero"
    u0_amplitude: float = 0.0
    u0_center: float = 0.0
    u0_width: float = 1.0
    table_x: tuple = field(default=())
    table_rho: tuple = field(default=())
    table_u: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigurationError(
                f"profile.kind={self.kind!r} not one of {', '.join(PROFILE_KINDS)}"
            )
        if self.u0_kind not in VELOCITY_KINDS:
            raise ConfigurationError(
                f"profile.u0_kind={self.u0_kind!r} not one of {', '.join(VELOCITY_KINDS)}"
            )
        if self.width <= 0 or self.edge <= 0 or self.u0_width <= 0:
            raise ConfigurationError("profile widths must be > 0")
        if "custom_table" in (self.kind, self.u0_kind):
            n = len(self.table_x)
            if n < 2 or np.any(np.diff(self.table_x) <= 0):
                raise ConfigurationError("custom_table needs >= 2 strictly increasing x values")
            if self.kind == "custom_table" and len(self.table_rho) != n:
                raise ConfigurationError("custom_table: table_rho length differs from table_x")
            if self.u0_kind == "custom_table" and len(self.table_u) != n:
                raise ConfigurationError("custom_table: table_u length differs from table_x")


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    return rho


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def pressure(rho, gamma):
    """``rho**gamma``."""
    if not gamma > 1:
        raise DomainError(f"gamma={gamma!r} must be > 1")
    return _out(_check_density(rho) ** gamma)


def viscosity(rho, p: FluidParams):
    """Regularized viscosity ``rho**alpha + eps_reg * rho**theta``."""
    rho = _check_density(rho)
    mu = rho**p.alpha
    if p.eps_reg > 0:
        mu = mu + p.eps_reg * rho**p.theta
    return _out(mu)


def viscosity_derivative(rho, p: FluidParams):
    """d mu / d rho for rho > 0."""
    rho = _check_density(rho)
    d = p.alpha * rho ** (p.alpha - 1.0)
    if p.eps_reg > 0:
        d = d + p.eps_reg * p.theta * rho ** (p.theta - 1.0)
    return _out(d)


def rho_psi(rho, p: FluidParams):
    """Relative internal energy density ``rho * Psi(rho, rho_bar)``.

    Evaluated as ``(rho**g - rb**g - g * rb**(g-1) * (rho - rb)) / (g - 1)``
    so vacuum cells need no division. Rounding below zero is clipped.
    """
    rho = _check_density(rho)
    g, rb = p.gamma, p.rho_bar
    val = (rho**g - rb**g - g * rb ** (g - 1.0) * (rho - rb)) / (g - 1.0)
    return _out(np.maximum(val, 0.0))


def enthalpy(rho, p: FluidParams):
    """d(rho Psi)/d rho = g/(g-1) * (rho**(g-1) - rb**(g-1))."""
    rho = _check_density(rho)
    g = p.gamma
    return _out(g / (g - 1.0) * (rho ** (g - 1.0) - p.rho_bar ** (g - 1.0)))


def initial_floor(p: FluidParams):
    """Positive density floor ``C0 * eps**(1 / (2 alpha - 2 theta))``.

    Active only for the regularized Case II system (``eps_reg > 0`` and
    ``alpha > 1/2``); returns None otherwise.
    """
    if p.eps_reg > 0 and p.regime == "II":
        return p.floor_c0 * p.eps_reg ** (1.0 / (2.0 * p.alpha - 2.0 * p.theta))
    return None


def _sample_density(profile: InitialProfile, x, p: FluidParams):
    kind = profile.kind
    if kind == "constant":
        return np.full_like(x, p.rho_bar)
    if kind == "gaussian_bump":
        if not profile.amplitude > -p.rho_bar:
            raise ConfigurationError("gaussian_bump requires amplitude > -rho_bar")
        return p.rho_bar + profile.amplitude * np.exp(-(((x - profile.center) / profile.width) ** 2))
    if kind == "vacuum_well":
        if p.regime != "II":
            raise ConfigurationError("vacuum requires alpha>1/2")
        if p.rho_bar <= 0:
            raise ConfigurationError("vacuum_well requires rho_bar > 0")
        d = np.maximum(np.abs(x - profile.center) - 0.5 * profile.width, 0.0)
        return p.rho_bar * -np.expm1(-((d / profile.edge) ** 2))
    return np.interp(x, profile.table_x, profile.table_rho)


def _sample_velocity(profile: InitialProfile, x):
    if profile.u0_kind == "zero":
        return np.zeros_like(x)
    if profile.u0_kind == "gaussian_bump":
        return profile.u0_amplitude * np.exp(-(((x - profile.u0_center) / profile.u0_width) ** 2))
    return np.interp(x, profile.table_x, profile.table_u)


def build_initial_data(profile: InitialProfile, grid: Grid1D, p: FluidParams) -> FluidState:
    """Sample rho_0 and u_0 pointwise at cell centres (t = 0)."""
    x = np.asarray(grid.x)
    rho = np.asarray(_sample_density(profile, x, p), dtype=float)
    if np.any(rho < 0):
        raise ConfigurationError("initial density has negative values")
    floor = initial_floor(p)
    if floor is not None:
        rho = np.maximum(rho, floor)
    if p.regime == "I" and np.any(rho <= 0):
        raise ConfigurationError("Case I (alpha<=1/2) requires rho_0 > 0 everywhere")
    u = _sample_velocity(profile, x)
    return FluidState(rho, u, 0.0)


@dataclass(frozen=True)
class AdmissibilityReport:
    rho_psi_integral: float
    kinetic_integral: float
    moment_integral: float
    slope_integral: float
    floor_hits: int
    nonfinite: tuple

    @property
    def finite(self) -> bool:
        return not self.nonfinite


def _ratio(num, den):
    # 0/0 := 0 in vacuum cells; nonzero/0 stays inf and is reported
    out = np.zeros_like(num)
    pos = den > 0
    out[pos] = num[pos] / den[pos]
    out[~pos & (num != 0)] = np.inf
    return out


def admissibility_report(state: FluidState, grid: Grid1D, p: FluidParams) -> AdmissibilityReport:
    """Discrete integrals whose finiteness the initial data must satisfy."""
    from .calculus import FloorCounter, power_gradient, trapezoid_integral

    rho, m = state.rho, state.m
    d = p.delta_moment
    counter = FloorCounter()
    beta = 0.0 if p.alpha == 0.5 else p.alpha - 0.5
    values = {
        "rho_psi_integral": trapezoid_integral(rho_psi(rho, p), grid),
        "kinetic_integral": trapezoid_integral(_ratio(m**2, rho), grid),
        "moment_integral": trapezoid_integral(
            _ratio(np.abs(m) ** (2.0 + d), rho ** (1.0 + d)), grid
        ),
        "slope_integral": trapezoid_integral(
            power_gradient(rho, beta, grid, counter=counter) ** 2, grid
        ),
    }
    nonfinite = tuple(k for k, v in values.items() if not np.isfinite(v))
    return AdmissibilityReport(floor_hits=counter.hits, nonfinite=nonfinite, **values)
