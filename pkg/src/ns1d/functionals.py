"""Energy, BD-entropy and decay functionals evaluated on a FluidState.

Notation: ``w = u + rho**(alpha - 2) * rho_x`` is the effective velocity,
``b = (alpha + gamma - 1) / 2``. Densities (per-cell arrays) are exposed
alongside their integrals so that the entropy balance can be checked cell
by cell.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .calculus import (
    DEFAULT_FLOOR,
    FloorCounter,
    central_gradient,
    power_gradient,
    trapezoid_integral,
)
from .errors import ConfigurationError, PreconditionError
from .model import FluidParams, FluidState, Grid1D, pressure, rho_psi, viscosity

CSV_FIELDS = (
    "t",
    "mass",
    "energy",
    "bd_entropy",
    "combined",
    "visc_diss",
    "press_diss",
    "slope",
    "sup_dev",
    "min_rho",
    "max_rho",
    "decay_f",
    "residual",
)


@dataclass(frozen=True)
class DecayMetricParams:
    """Exponents of ``f(t) = int |rho**s - rho_bar**s|**(4 + 2 l) dx``."""

    s: float
    l: float = 1.0

    def validate(self, p: FluidParams):
        if self.l < 1:
            raise ConfigurationError(f"decay.l={self.l!r} must be >= 1")
        b = p.b
        if p.rho_bar > 0 and not self.s > b + 1:
            raise ConfigurationError(f"decay.s={self.s!r} must exceed b+1={b + 1:g}")
        if p.rho_bar == 0 and not self.s > b + 0.5 * p.gamma:
            raise ConfigurationError(
                f"decay.s={self.s!r} must exceed b+gamma/2={b + 0.5 * p.gamma:g}"
            )
        return self

    @classmethod
    def default_for(cls, p: FluidParams, l: float = 1.0):
        lower = p.b + 1.0 if p.rho_bar > 0 else p.b + 0.5 * p.gamma
        return cls(s=lower + 0.5, l=l)


@dataclass(frozen=True)
class FunctionalRecord:
    t: float
    mass: float
    energy: float
    bd_entropy: float
    combined: float
    visc_diss: float
    press_diss: float
    slope: float
    sup_dev: float
    min_rho: float
    max_rho: float
    decay_f: float
    residual: float
    floor_hits: int = field(default=0, compare=False)

    def row(self):
        return tuple(getattr(self, k) for k in CSV_FIELDS)

    def as_dict(self):
        d = asdict(self)
        d.pop("floor_hits")
        return d


assert tuple(f.name for f in fields(FunctionalRecord))[:-1] == CSV_FIELDS


def _floored(rho, floor, counter):
    low = rho < floor
    if counter is not None:
        counter.add(np.count_nonzero(low))
    return np.where(low, floor, rho)


def effective_velocity(state: FluidState, p: FluidParams, grid: Grid1D,
                       floor=DEFAULT_FLOOR, counter=None) -> np.ndarray:
    """``u + rho**(alpha-2) * rho_x``; regular at alpha = 1."""
    rho = state.rho
    rho_x = central_gradient(rho, grid)
    if p.alpha >= 2:
        coef = rho ** (p.alpha - 2.0)
    else:
        coef = _floored(rho, floor, counter) ** (p.alpha - 2.0)
    return state.u + coef * rho_x


# -- per-cell densities ------------------------------------------------------

def energy_density(state, p, grid=None):
    return 0.5 * state.rho * state.u**2 + rho_psi(state.rho, p)


def bd_entropy_density(state, p, grid, floor=DEFAULT_FLOOR, counter=None):
    w = effective_velocity(state, p, grid, floor, counter)
    return 0.5 * state.rho * w**2 + rho_psi(state.rho, p)


def combined_density(state, p, grid, floor=DEFAULT_FLOOR, counter=None):
    w = effective_velocity(state, p, grid, floor, counter)
    rho = state.rho
    return (0.5 * p.alpha * rho * w**2 + 0.5 * rho * state.u**2
            + (p.alpha + 1.0) * rho_psi(rho, p))


def diffusion_flux_field(state: FluidState, p: FluidParams, grid: Grid1D) -> np.ndarray:
    """Lambda = mu_eps(rho) * u_x."""
    return viscosity(state.rho, p) * central_gradient(state.u, grid)


def viscous_dissipation_density(state, p, grid):
    return viscosity(state.rho, p) * central_gradient(state.u, grid) ** 2


def pressure_dissipation_coefficient(p: FluidParams) -> float:
    return 4.0 * p.gamma / (p.gamma + p.alpha - 1.0) ** 2


def pressure_dissipation_density(state, p, grid, floor=DEFAULT_FLOOR, counter=None):
    grad = power_gradient(state.rho, p.b, grid, floor, counter)
    return pressure_dissipation_coefficient(p) * grad**2


def flux_H1(state: FluidState, p: FluidParams, grid: Grid1D) -> np.ndarray:
    """Energy flux ``rho u^3/2 + u rho Psi + u (P - P_bar) - mu u u_x``."""
    rho, u = state.rho, state.u
    u_x = central_gradient(u, grid)
    dp = pressure(rho, p.gamma) - p.rho_bar**p.gamma
    return (0.5 * rho * u**3 + u * rho_psi(rho, p) + u * dp
            - viscosity(rho, p) * u * u_x)


def flux_H2(state: FluidState, p: FluidParams, grid: Grid1D,
            floor=DEFAULT_FLOOR, counter=None) -> np.ndarray:
    """BD-entropy flux ``rho u w^2/2 + u rho Psi + u (P - P_bar)``."""
    rho, u = state.rho, state.u
    w = effective_velocity(state, p, grid, floor, counter)
    dp = pressure(rho, p.gamma) - p.rho_bar**p.gamma
    return 0.5 * rho * u * w**2 + u * rho_psi(rho, p) + u * dp


# -- integrated functionals ----------------------------------------------------

def energy_functional(state, p, grid) -> float:
    return trapezoid_integral(energy_density(state, p), grid)


def bd_entropy_functional(state, p, grid, floor=DEFAULT_FLOOR, counter=None) -> float:
    return trapezoid_integral(bd_entropy_density(state, p, grid, floor, counter), grid)


def combined_functional(state, p, grid, floor=DEFAULT_FLOOR, counter=None) -> float:
    """alpha * (BD kinetic) + (kinetic) + (alpha + 1) * int rho Psi."""
    return trapezoid_integral(combined_density(state, p, grid, floor, counter), grid)


def viscous_dissipation(state, p, grid) -> float:
    return trapezoid_integral(viscous_dissipation_density(state, p, grid), grid)


def pressure_dissipation(state, p, grid, floor=DEFAULT_FLOOR, counter=None) -> float:
    return trapezoid_integral(pressure_dissipation_density(state, p, grid, floor, counter), grid)


def slope_normalization(p: FluidParams) -> float:
    """Factor relating the reported slope to ``int [(rho^(a-1/2)/(a-1/2))_x]^2``."""
    return 1.0 if p.alpha == 0.5 else (p.alpha - 0.5) ** -2


def slope_functional(state, p, grid, floor=DEFAULT_FLOOR, counter=None) -> float:
    """``int [(rho**(alpha-1/2))_x]^2``, or ``int [(log rho)_x]^2`` at alpha = 1/2.

    Unnormalized; multiply by :func:`slope_normalization` for the
    ``(alpha - 1/2)**-2``-scaled variant.
    """
    beta = 0.0 if p.alpha == 0.5 else p.alpha - 0.5
    grad = power_gradient(state.rho, beta, grid, floor, counter)
    return trapezoid_integral(grad**2, grid)


def decay_metric(state, p, grid, dp: DecayMetricParams) -> float:
    """``f = int |rho**s - rho_bar**s|**(4 + 2 l) dx``."""
    d = np.abs(state.rho**dp.s - p.rho_bar**dp.s)
    return trapezoid_integral(d ** (4.0 + 2.0 * dp.l), grid)


def decay_rate_terms(state, p, grid, dp: DecayMetricParams, floor=DEFAULT_FLOOR):
    """The two integrals ``(J1, J2)`` whose sum is ``df/dt`` for smooth flows."""
    rho, u = state.rho, state.u
    s, l = dp.s, dp.l
    d = rho**s - p.rho_bar**s
    ad = np.abs(d)
    rho_x = central_gradient(rho, grid)
    rs = np.maximum(rho, floor)
    j1 = (4 + 2 * l) * (3 + 2 * l) * s * trapezoid_integral(
        ad ** (2 + 2 * l) * central_gradient(rho**s, grid) * rs ** (s - 1) * rho * u, grid)
    j2 = (4 + 2 * l) * s * (s - 1) * trapezoid_integral(
        np.sign(d) * ad ** (3 + 2 * l) * rs ** (s - 2) * rho_x * rho * u, grid)
    return j1, j2


def lagrangian_coordinate(state: FluidState, grid: Grid1D) -> np.ndarray:
    """Cumulative mass at the n+1 cell faces, starting from 0 at x = -M."""
    xi = np.empty(grid.n_cells + 1)
    xi[0] = 0.0
    xi[1:] = np.cumsum(state.rho) * grid.dx
    return xi


def entropy_balance_density(prev: FluidState, next: FluidState, p: FluidParams,
                            grid: Grid1D, source_work=None, floor=DEFAULT_FLOOR):
    """Per-cell residual of the combined energy + alpha * BD-entropy balance.

    Time derivative by forward difference; fluxes and dissipations at the
    average of the two states. The identity is exact for ``eps_reg = 0``.
    ``source_work`` (array, or callable of ``(x, t)``) is subtracted and
    carries the work done by manufactured forcing terms.
    """
    if prev.rho.shape != next.rho.shape or prev.rho.size != grid.n_cells:
        raise PreconditionError("states do not share the grid")
    dt = next.t - prev.t
    if not dt > 0:
        raise PreconditionError("next.t must be strictly greater than prev.t")
    t_mid = 0.5 * (prev.t + next.t)
    mid = FluidState(0.5 * (prev.rho + next.rho), 0.5 * (prev.u + next.u), t_mid)
    a = p.alpha
    r = (combined_density(next, p, grid, floor) - combined_density(prev, p, grid, floor)) / dt
    r = r + central_gradient(a * flux_H2(mid, p, grid, floor) + flux_H1(mid, p, grid), grid)
    r = r + viscous_dissipation_density(mid, p, grid)
    r = r + a * pressure_dissipation_density(mid, p, grid, floor)
    if source_work is not None:
        if callable(source_work):
            source_work = source_work(np.asarray(grid.x), t_mid)
        r = r - source_work
    return r


def entropy_balance_residual(prev, next, p, grid, source_work=None, floor=DEFAULT_FLOOR) -> float:
    """Discrete L1 norm of :func:`entropy_balance_density`.

    Cells within two of a wall are excluded: their flux divergence touches
    the one-sided boundary gradients.
    """
    r = entropy_balance_density(prev, next, p, grid, source_work, floor)
    return float(np.sum(np.abs(r[2:-2])) * grid.dx)


def record_functionals(state: FluidState, p: FluidParams, grid: Grid1D,
                       dp: DecayMetricParams, prev: FluidState | None = None,
                       floor=DEFAULT_FLOOR) -> FunctionalRecord:
    """Sample every functional; ``residual`` is 0.0 unless ``prev`` is given."""
    counter = FloorCounter()
    rho = state.rho
    residual = 0.0
    if prev is not None:
        residual = entropy_balance_residual(prev, state, p, grid, floor=floor)
    return FunctionalRecord(
        t=state.t,
        mass=trapezoid_integral(rho, grid),
        energy=energy_functional(state, p, grid),
        bd_entropy=bd_entropy_functional(state, p, grid, floor, counter),
        combined=combined_functional(state, p, grid, floor, counter),
        visc_diss=viscous_dissipation(state, p, grid),
        press_diss=pressure_dissipation(state, p, grid, floor, counter),
        slope=slope_functional(state, p, grid, floor, counter),
        sup_dev=float(np.max(np.abs(rho - p.rho_bar))),
        min_rho=float(rho.min()),
        max_rho=float(rho.max()),
        decay_f=decay_metric(state, p, grid, dp),
        residual=residual,
        floor_hits=counter.hits,
    )
