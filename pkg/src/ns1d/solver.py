"""Time integration on [-M, M] with u = 0 walls.

One step is split into

(a) mass: conservative first-order upwind with face velocity
    ``(u_i + u_{i+1}) / 2`` and zero wall fluxes;
(b) momentum predictor: upwind convection of ``m = rho u`` plus the central
    gradient of ``P(rho^{n+1})`` (and manufactured sources when given);
(c) viscous corrector: ``rho^{n+1} u - dt (mu(rho^{n+1}) u_x)_x = m*``,
    solved as a tridiagonal system with ``u = 0`` rows at both walls and in
    cells below ``rho_floor_eval``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .calculus import TridiagonalSystem, central_gradient, solve_tridiagonal
from .errors import ConfigurationError, NS1DError, NumericalError, PreconditionError, RunError
from .functionals import record_functionals, trapezoid_integral
from .model import (
    FluidParams,
    FluidState,
    Grid1D,
    build_initial_data,
    enthalpy,
    pressure,
    viscosity,
    viscosity_derivative,
)

if TYPE_CHECKING:
    from .config import ScenarioConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SchemeConfig:
    cfl_number: float = 0.45
    dt_max: float = 0.05
    rho_floor_eval: float = 1e-12
    mms_enabled: bool = False
    t_end: float = 1.0
    output_every: float = 0.1
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not 0 < self.cfl_number < 1:
            raise ConfigurationError(f"scheme.cfl={self.cfl_number!r} must lie in (0, 1)")
        if not self.dt_max > 0:
            raise ConfigurationError(f"scheme.dt_max={self.dt_max!r} must be > 0")
        if not self.output_every > 0:
            raise ConfigurationError(f"scheme.output_every={self.output_every!r} must be > 0")
        if not self.t_end >= 0:
            raise ConfigurationError(f"scheme.t_end={self.t_end!r} must be >= 0")
        if not self.rho_floor_eval > 0:
            raise ConfigurationError("scheme.rho_floor_eval must be > 0")
        for ts in self.snapshot_times:
            if not 0 <= ts <= self.t_end:
                raise ConfigurationError(f"snapshot time {ts!r} outside [0, t_end]")


# -- manufactured solution ----------------------------------------------------

@dataclass(frozen=True)
class MmsSolution:
    """``rho* = 2 + a cos(kx) e^-t``, ``u* = a sin(kx) e^-t`` with ``k = pi / M``.

    ``s_rho`` and ``s_m`` are the residuals of (rho*, u*) in the mass and
    momentum equations; adding them as sources makes (rho*, u*) exact.
    """

    params: FluidParams
    half_width: float
    amplitude: float = 0.1

    @property
    def k(self):
        return math.pi / self.half_width

    def _parts(self, x, t):
        a, k = self.amplitude, self.k
        env = a * np.exp(-t)
        r = env * np.cos(k * x)
        v = env * np.sin(k * x)
        return r, v, k

    def rho(self, x, t):
        r, _, _ = self._parts(x, t)
        return 2.0 + r

    def u(self, x, t):
        _, v, _ = self._parts(x, t)
        return v

    def state(self, grid: Grid1D, t: float) -> FluidState:
        x = np.asarray(grid.x)
        return FluidState(self.rho(x, t), self.u(x, t), t)

    def derivatives(self, x, t):
        """Closed-form partial derivatives of rho* and u*."""
        r, v, k = self._parts(x, t)
        return {
            "rho": 2.0 + r, "rho_t": -r, "rho_x": -k * v, "rho_xx": -k * k * r, "rho_xt": k * v,
            "u": v, "u_t": -v, "u_x": k * r, "u_xx": -k * k * v,
        }

    def s_rho(self, x, t):
        d = self.derivatives(x, t)
        return d["rho_t"] + d["rho_x"] * d["u"] + d["rho"] * d["u_x"]

    def s_rho_x(self, x, t):
        d = self.derivatives(x, t)
        return (d["rho_xt"] + d["rho_xx"] * d["u"] + 2.0 * d["rho_x"] * d["u_x"]
                + d["rho"] * d["u_xx"])

    def s_m(self, x, t):
        p = self.params
        d = self.derivatives(x, t)
        rho, u = d["rho"], d["u"]
        dm_dt = d["rho_t"] * u + rho * d["u_t"]
        conv = d["rho_x"] * u**2 + 2.0 * rho * u * d["u_x"]
        press = p.gamma * rho ** (p.gamma - 1.0) * d["rho_x"]
        visc = viscosity_derivative(rho, p) * d["rho_x"] * d["u_x"] + viscosity(rho, p) * d["u_xx"]
        return dm_dt + conv + press - visc

    def source_work(self, x, t):
        """Forcing work in the combined energy + alpha * BD-entropy balance.

        ``W = alpha [w s_m + w (rho^(a-1) s_rho)_x - w^2 s_rho / 2 + h s_rho]
        + u s_m - u^2 s_rho / 2 + h s_rho`` with ``h = d(rho Psi)/d rho``.
        Valid for the unregularized viscosity only.
        """
        p = self.params
        if p.eps_reg > 0:
            raise ConfigurationError("source_work is only defined for eps_reg = 0")
        d = self.derivatives(x, t)
        rho, u, a = d["rho"], d["u"], p.alpha
        w = u + rho ** (a - 2.0) * d["rho_x"]
        s, sm = self.s_rho(x, t), self.s_m(x, t)
        h = enthalpy(rho, p)
        gs_x = (a - 1.0) * rho ** (a - 2.0) * d["rho_x"] * s + rho ** (a - 1.0) * self.s_rho_x(x, t)
        bd = w * sm + w * gs_x - 0.5 * w**2 * s + h * s
        en = u * sm - 0.5 * u**2 * s + h * s
        return a * bd + en


def make_mms(grid: Grid1D, p: FluidParams, amplitude: float = 0.1) -> MmsSolution:
    return MmsSolution(p, grid.half_width, amplitude)


# -- stepping -----------------------------------------------------------------

def cfl_dt(state: FluidState, p: FluidParams, grid: Grid1D, cfg: SchemeConfig) -> float:
    """``min(dt_max, cfl dx / max(|u| + sqrt(gamma rho^(gamma-1))))``."""
    speed = np.abs(state.u) + np.sqrt(p.gamma * state.rho ** (p.gamma - 1.0))
    smax = float(np.max(speed))
    if not math.isfinite(smax):
        raise NumericalError("non-finite wave speed")
    if smax == 0.0:
        return cfg.dt_max
    return min(cfg.dt_max, cfg.cfl_number * grid.dx / smax)


def _upwind_flux(q, uf):
    flux = np.zeros(q.size + 1)
    flux[1:-1] = np.where(uf >= 0, q[:-1], q[1:]) * uf
    return flux


def step(state: FluidState, p: FluidParams, grid: Grid1D, cfg: SchemeConfig,
         dt: float, mms: MmsSolution | None = None) -> FluidState:
    """Advance one time step of size ``dt`` (must respect the CFL limit)."""
    if not dt > 0:
        raise PreconditionError(f"dt={dt!r} must be > 0")
    limit = cfl_dt(state, p, grid, cfg)
    if dt > limit * (1.0 + 1e-12):
        raise PreconditionError(f"dt={dt:.6g} exceeds the CFL limit {limit:.6g}")
    rho, u = state.rho, state.u
    dx = grid.dx
    lam = dt / dx
    x = np.asarray(grid.x)
    uf = 0.5 * (u[:-1] + u[1:])

    mass_flux = _upwind_flux(rho, uf)
    rho_new = rho - lam * (mass_flux[1:] - mass_flux[:-1])
    if mms is not None:
        rho_new = rho_new + dt * mms.s_rho(x, state.t)

    m = rho * u
    mom_flux = _upwind_flux(m, uf)
    rho_pos = np.maximum(rho_new, 0.0)
    m_star = (m - lam * (mom_flux[1:] - mom_flux[:-1])
              - dt * central_gradient(pressure(rho_pos, p.gamma), grid))
    if mms is not None:
        m_star = m_star + dt * mms.s_m(x, state.t)

    mu = viscosity(rho_pos, p)
    c = dt / dx**2 * 0.5 * (mu[:-1] + mu[1:])
    n = rho.size
    lower = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = -c
    upper[:-1] = -c
    diag = rho_new.copy()
    diag[1:] += c
    diag[:-1] += c
    rhs = m_star.copy()
    fixed = rho_new < cfg.rho_floor_eval
    fixed[0] = fixed[-1] = True
    lower[fixed] = 0.0
    upper[fixed] = 0.0
    diag[fixed] = 1.0
    rhs[fixed] = 0.0
    u_new = solve_tridiagonal(TridiagonalSystem(lower, diag, upper, rhs))
    return FluidState(rho_new, u_new, state.t + dt)


# -- transient driver ---------------------------------------------------------

@dataclass
class RunResult:
    records: list
    state: FluidState
    snapshots: dict = field(default_factory=dict)
    steps: int = 0
    flags: list = field(default_factory=list)
    min_rho_all: float = math.inf
    max_mass_drift: float = 0.0


def _targets(cfg: SchemeConfig):
    samples = set()
    k = 1
    while k * cfg.output_every < cfg.t_end * (1 - 1e-12):
        samples.add(k * cfg.output_every)
        k += 1
    if cfg.t_end > 0:
        samples.add(cfg.t_end)
    snaps = {float(ts) for ts in cfg.snapshot_times}
    return sorted(samples | snaps - {0.0}), samples, snaps


def run_transient(cfg: SchemeConfig, scenario: "ScenarioConfig",
                  mms: MmsSolution | None = None, initial: FluidState | None = None) -> RunResult:
    """Integrate from t = 0 to ``cfg.t_end``, recording functionals.

    Records are taken at t = 0, every ``output_every`` and at ``t_end``;
    each later record carries the entropy-balance residual of the step
    that produced it. Runs are deterministic.
    """
    p, grid = scenario.params, scenario.grid
    dp = scenario.decay_params
    floor = cfg.rho_floor_eval
    if cfg.mms_enabled and mms is None:
        mms = make_mms(grid, p)
    state = initial if initial is not None else build_initial_data(scenario.profile, grid, p)
    result = RunResult(records=[record_functionals(state, p, grid, dp, floor=floor)], state=state)
    if 0.0 in {float(ts) for ts in cfg.snapshot_times}:
        result.snapshots[0.0] = state
    mass0 = result.records[0].mass
    result.min_rho_all = float(state.rho.min())
    targets, samples, snaps = _targets(cfg)
    case1_flagged = False
    try:
        for target in targets:
            while state.t < target:
                dt = cfl_dt(state, p, grid, cfg)
                gap = target - state.t
                hit = gap <= dt
                if hit:
                    dt = gap
                elif gap < 2.0 * dt:
                    dt = 0.5 * gap
                new = step(state, p, grid, cfg, dt, mms)
                if hit:
                    new = FluidState(new.rho, new.u, target)
                result.steps += 1
                rmin = float(new.rho.min())
                result.min_rho_all = min(result.min_rho_all, rmin)
                if mms is None and mass0 > 0:
                    drift = abs(trapezoid_integral(new.rho, grid) - mass0) / mass0
                    result.max_mass_drift = max(result.max_mass_drift, drift)
                if p.regime == "I" and rmin < floor and not case1_flagged:
                    case1_flagged = True
                    result.flags.append(f"case1_floor_breach@t={new.t:.17g}")
                    log.warning("Case I density dropped below %g at t=%g", floor, new.t)
                prev, state = state, new
            if target in samples:
                result.records.append(record_functionals(state, p, grid, dp, prev=prev, floor=floor))
            if target in snaps:
                result.snapshots[target] = state
    except NS1DError as exc:
        raise RunError(f"run aborted at t={state.t:.17g}: {exc}", result.records, state) from exc
    result.state = state
    return result
