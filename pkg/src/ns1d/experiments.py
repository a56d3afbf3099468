"""Experiment drivers: decay, vacuum closing, uniform bounds, MMS, scans, sweeps.

Every driver returns an :class:`ExperimentOutcome` whose ``passed`` flag is
a pure function of ``measured`` (thresholds are stored there too), see
:func:`evaluate_pass`.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigurationError, NS1DError
from .functionals import entropy_balance_residual
from .model import FluidParams, Grid1D
from .solver import RunResult, SchemeConfig, cfl_dt, make_mms, run_transient, step

log = logging.getLogger(__name__)

ORDER_BAND = (0.8, 1.3)
RESIDUAL_RATIO_MIN = 1.8


@dataclass
class ExperimentOutcome:
    name: str
    kind: str
    passed: bool
    measured: dict
    artifacts: list = field(default_factory=list)
    error: str | None = None


def _ok(x):
    return x is not None and math.isfinite(x)


def evaluate_pass(kind: str, m: dict) -> bool:
    """Recompute the pass flag from a measured map alone."""
    if any(isinstance(v, float) and math.isnan(v) for v in m.values()):
        return False
    if m.get("config_error"):
        return False
    if kind == "run":
        return m["nonfinite"] == 0.0 and m["case1_floor_breach"] == 0.0
    if kind == "decay":
        return m["sup_dev_ratio"] <= m["threshold"] and m["f_ratio"] <= m["f_fraction"]
    if kind == "vacuum":
        return m["found"] == 1.0 and m["T0"] < m["t_end"] and m["min_after_T0"] >= m["rho1"]
    if kind == "uniform_bound":
        lim = 1.0 + m["growth_tol"]
        ok = m["G_growth"] <= lim and m["max_rho_growth"] <= lim
        if m["check_inv_min"]:
            ok = ok and m["inv_min_rho_growth"] <= lim
        if "eps_G_change" in m:
            ok = ok and m["eps_G_change"] < m["eps_tol"]
        return ok
    if kind == "convergence":
        orders = [v for k, v in m.items() if k.startswith("order_") and k[6:].isdigit()]
        ratios = [v for k, v in m.items() if k.startswith("residual_ratio_") and k[15:].isdigit()]
        return (bool(orders) and all(m["order_min"] <= o <= m["order_max"] for o in orders)
                and all(r >= m["residual_ratio_min"] for r in ratios))
    if kind == "scan":
        consts = [v for k, v in m.items() if k.startswith("C_s")]
        ok = all(_ok(c) for c in consts) and _ok(m["c_quadratic"])
        if m["gamma"] >= 2:
            ok = ok and m["c_quadratic"] > 0
        return ok
    raise ValueError(f"unknown experiment kind {kind!r}")


def _outcome(name, kind, measured, artifacts=None):
    measured = {k: float(v) for k, v in measured.items()}
    return ExperimentOutcome(name, kind, evaluate_pass(kind, measured), measured,
                             list(artifacts or []))


def domain_heuristic(scenario) -> float:
    """Suggested half width ``5 + t_end * max initial wave speed`` (informational)."""
    st = scenario.initial_state()
    g = scenario.params.gamma
    speed = float(np.max(np.abs(st.u) + np.sqrt(g * st.rho ** (g - 1.0))))
    return 5.0 + scenario.scheme.t_end * speed


def _with_domain(m, scenario):
    m["M"] = scenario.grid.half_width
    m["M_heuristic"] = domain_heuristic(scenario)
    return m


def _dir_name(scenario, kind):
    return scenario.name if scenario.name != "scenario" else kind


def emit(outcome: ExperimentOutcome, output_dir, config_echo: dict, run: RunResult | None = None,
         grid: Grid1D | None = None, extra_tables: dict | None = None):
    """Write series/snapshots/tables plus ``summary.json`` under ``output_dir/name``."""
    root = Path(output_dir)
    sub = Path(outcome.name)
    paths = []
    if run is not None:
        io.write_timeseries_csv(run.records, root / sub / "series.csv")
        paths.append(sub / "series.csv")
        for t, state in sorted(run.snapshots.items()):
            rel = sub / io.snapshot_name(t)
            io.write_snapshot(state, grid, root / rel)
            paths.append(rel)
    for fname, (header, rows) in (extra_tables or {}).items():
        rel = sub / fname
        with io._open_for_write(root / rel) as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(io.fmt(v) for v in row) + "\n")
        paths.append(rel)
    paths.append(sub / "summary.json")
    outcome.artifacts = [p.as_posix() for p in paths]
    io.write_summary_json(outcome, config_echo, root / sub / "summary.json")
    return outcome


# -- plain run -----------------------------------------------------------------

def run_experiment(scenario, output_dir=None, run=None):
    """Integrate the scenario and record functionals; passes when all values stay finite."""
    if run is None:
        run = run_transient(scenario.scheme, scenario)
    last = run.records[-1]
    nonfinite = sum(not math.isfinite(v) for r in run.records for v in r.row())
    m = {"t_end": last.t, "steps": run.steps, "min_rho_all": run.min_rho_all,
         "max_mass_drift": run.max_mass_drift, "energy_end": last.energy,
         "combined_end": last.combined, "sup_dev_end": last.sup_dev,
         "nonfinite": nonfinite,
         "case1_floor_breach": 1.0 if any(f.startswith("case1") for f in run.flags) else 0.0}
    out = _outcome(_dir_name(scenario, "run"), "run", _with_domain(m, scenario))
    if output_dir is not None:
        emit(out, output_dir, scenario.echo, run, scenario.grid)
    return out


# -- decay --------------------------------------------------------------------

def decay_measure(run: RunResult, threshold=0.1, f_fraction=0.01) -> dict:
    recs = run.records
    sd0, sd1 = recs[0].sup_dev, recs[-1].sup_dev
    fmax = max(r.decay_f for r in recs)
    ratio = 0.0 if sd0 == 0 else sd1 / sd0
    f_ratio = 0.0 if fmax == 0 else recs[-1].decay_f / fmax
    rates = [r.sup_dev for r in recs]
    return {
        "sup_dev_0": sd0, "sup_dev_end": sd1, "sup_dev_ratio": ratio,
        "f_max": fmax, "f_end": recs[-1].decay_f, "f_ratio": f_ratio,
        "sup_dev_max_late": max(rates[len(rates) // 2:]),
        "threshold": threshold, "f_fraction": f_fraction, "t_end": recs[-1].t,
        "steps": run.steps,
    }


def decay_experiment(scenario, dp=None, threshold=None, output_dir=None, run=None):
    """Measure ``sup|rho - rho_bar|`` at t_end relative to t = 0 and the f(t) envelope."""
    if dp is not None:
        dp.validate(scenario.params)
        from dataclasses import replace
        scenario = replace(scenario, decay_params=dp)
    exp = scenario.experiment
    threshold = exp.decay_threshold if threshold is None else threshold
    if run is None:
        run = run_transient(scenario.scheme, scenario)
    out = _outcome(_dir_name(scenario, "decay"), "decay",
                   _with_domain(decay_measure(run, threshold, exp.f_fraction), scenario))
    if output_dir is not None:
        emit(out, output_dir, scenario.echo, run, scenario.grid)
    return out


# -- vacuum -------------------------------------------------------------------

def vacuum_vanish_experiment(scenario, rho1, output_dir=None, run=None):
    """First sample time T0 after which ``min rho >= rho1`` holds for good."""
    p = scenario.params
    if p.alpha <= 0.5:
        raise ConfigurationError("vacuum experiment requires alpha > 1/2")
    if p.rho_bar <= 0:
        raise ConfigurationError("vacuum experiment requires rho_bar > 0")
    if rho1 is None or not 0 < rho1 < p.rho_bar:
        raise ConfigurationError(f"rho1={rho1!r} must satisfy 0 < rho1 < rho_bar={p.rho_bar:g}")
    if run is None:
        run = run_transient(scenario.scheme, scenario)
    t = np.array([r.t for r in run.records])
    mins = np.array([r.min_rho for r in run.records])
    below = np.nonzero(mins < rho1)[0]
    if below.size == 0:
        k = 0
    elif below[-1] == mins.size - 1:
        k = None
    else:
        k = int(below[-1]) + 1
    measured = {"rho1": rho1, "t_end": float(t[-1]), "initial_min_rho": float(mins[0]),
                "final_min_rho": float(mins[-1]), "min_rho_all_steps": run.min_rho_all,
                "steps": run.steps}
    if k is None:
        measured.update(found=0.0, T0=math.nan, T0_lower=math.nan, min_after_T0=math.nan)
    else:
        measured.update(found=1.0, T0=float(t[k]), T0_lower=float(t[k - 1]) if k > 0 else 0.0,
                        min_after_T0=float(mins[k:].min()))
    out = _outcome(_dir_name(scenario, "vacuum"), "vacuum", _with_domain(measured, scenario))
    if output_dir is not None:
        emit(out, output_dir, scenario.echo, run, scenario.grid)
    return out


# -- uniform bounds ------------------------------------------------------------

def _halves(run):
    t_mid = 0.5 * run.records[-1].t
    first = [r for r in run.records if r.t <= t_mid]
    second = [r for r in run.records if r.t >= t_mid]
    return first, second


def bound_measure(run: RunResult, rho_bar: float, growth_tol=1e-3) -> dict:
    first, second = _halves(run)

    def growth(fn):
        a = max(fn(r) for r in first)
        b = max(fn(r) for r in second)
        return a, b, (b / a if a > 0 else (0.0 if b == 0 else math.inf))

    g1, g2, gg = growth(lambda r: r.combined)
    r1, r2, rg = growth(lambda r: r.max_rho)
    m = {"G_max_first": g1, "G_max_second": g2, "G_growth": 0.0 if g1 == g2 == 0 else gg,
         "max_rho_first": r1, "max_rho_second": r2, "max_rho_growth": rg,
         "growth_tol": growth_tol, "check_inv_min": 1.0 if rho_bar > 0 else 0.0,
         "min_rho_all": min(r.min_rho for r in run.records)}
    if rho_bar > 0:
        i1, i2, ig = growth(lambda r: 1.0 / r.min_rho if r.min_rho > 0 else math.inf)
        m.update(inv_min_rho_first=i1, inv_min_rho_second=i2, inv_min_rho_growth=ig)
    return m


def uniform_bound_experiment(scenario, eps_probe=None, output_dir=None, run=None):
    """No-growth check of ``G``, ``max rho`` and ``1/min rho`` between run halves.

    With ``eps_probe`` (and ``eps_reg > 0``) the run is repeated with the
    regularization halved and the relative change of ``max_t G`` recorded.
    """
    exp = scenario.experiment
    eps_probe = exp.eps_probe if eps_probe is None else eps_probe
    if run is None:
        run = run_transient(scenario.scheme, scenario)
    m = bound_measure(run, scenario.params.rho_bar, exp.growth_tol)
    if eps_probe and scenario.params.eps_reg > 0:
        half = scenario.with_values({"params.eps_reg": 0.5 * scenario.params.eps_reg})
        run2 = run_transient(half.scheme, half)
        ga = max(r.combined for r in run.records)
        gb = max(r.combined for r in run2.records)
        ea, eb = run.records[-1].combined, run2.records[-1].combined
        m.update(G_bound=ga, G_bound_half_eps=gb, eps_tol=exp.eps_tol,
                 eps_G_change=abs(gb - ga) / ga if ga > 0 else 0.0,
                 G_end=ea, G_end_half_eps=eb,
                 eps_G_end_change=abs(eb - ea) / ea if ea > 0 else 0.0)
    out = _outcome(_dir_name(scenario, "uniform_bound"), "uniform_bound", _with_domain(m, scenario))
    if output_dir is not None:
        emit(out, output_dir, scenario.echo, run, scenario.grid)
    return out


# -- MMS convergence ------------------------------------------------------------

def mms_level(p: FluidParams, n: int, half_width=1.0, t_final=1.0, cfl=0.45, safety=0.9):
    """Run the manufactured problem on n cells; returns L1 errors and the step size.

    The step is ``t_final / N`` with N fixed from the initial CFL limit, so
    dt is proportional to dx across levels.
    """
    grid = Grid1D(half_width, n)
    mms = make_mms(grid, p)
    cfg = SchemeConfig(cfl_number=cfl, t_end=t_final, output_every=t_final, mms_enabled=True)
    state = mms.state(grid, 0.0)
    nsteps = math.ceil(t_final / (safety * cfl_dt(state, p, grid, cfg)))
    dt = t_final / nsteps
    for k in range(nsteps):
        state = step(state, p, grid, cfg, dt, mms)
    x = np.asarray(grid.x)
    err_rho = float(np.sum(np.abs(state.rho - mms.rho(x, t_final))) * grid.dx)
    err_u = float(np.sum(np.abs(state.u - mms.u(x, t_final))) * grid.dx)
    return {"grid": grid, "mms": mms, "dt": dt, "steps": nsteps,
            "err_rho": err_rho, "err_u": err_u}


def mms_residual(p: FluidParams, grid: Grid1D, dt: float, t0=0.5):
    """Entropy-balance residual of the exact manufactured pair (t0, t0 + dt)."""
    mms = make_mms(grid, p)
    return entropy_balance_residual(mms.state(grid, t0), mms.state(grid, t0 + dt), p, grid,
                                    source_work=mms.source_work)


def convergence_study(p: FluidParams, levels: int = 3, n0: int = 128, half_width=1.0,
                      t_final=1.0, output_dir=None, name="mms"):
    """Observed L1 order of the density error under dx, dt -> dx/2, dt/2."""
    if levels < 3:
        raise ConfigurationError("convergence_study needs levels >= 3")
    m = {"order_min": ORDER_BAND[0], "order_max": ORDER_BAND[1],
         "residual_ratio_min": RESIDUAL_RATIO_MIN}
    rows = []
    errs, res = [], []
    for i in range(levels):
        n = n0 * 2**i
        lv = mms_level(p, n, half_width, t_final)
        r = mms_residual(p, lv["grid"], lv["dt"]) if p.eps_reg == 0 else math.nan
        errs.append(lv["err_rho"])
        res.append(r)
        m[f"error_n{n}"] = lv["err_rho"]
        m[f"residual_n{n}"] = r
        rows.append((n, lv["dt"], lv["err_rho"], lv["err_u"], r))
    for i in range(levels - 1):
        m[f"order_{i}"] = math.log2(errs[i] / errs[i + 1])
        m[f"residual_ratio_{i}"] = res[i] / res[i + 1]
    out = _outcome(name, "convergence", m)
    if output_dir is not None:
        echo = {"params.alpha": p.alpha, "params.gamma": p.gamma, "params.rho_bar": p.rho_bar,
                "params.eps_reg": p.eps_reg, "levels": levels, "n0": n0,
                "grid.M": half_width, "t_final": t_final}
        emit(out, output_dir, echo, extra_tables={
            "convergence.csv": (("n", "dt", "l1_error_rho", "l1_error_u", "residual"), rows)})
    return out


# -- inequality scans -------------------------------------------------------------

def inequality_scan(p: FluidParams, s_list=(0.5, 1.5, 2.0), rho_range=(0.0, 10.0),
                    samples=100_000, delta_bar=0.5, output_dir=None, name="scan"):
    """Brute-force constants for two elementary density inequalities.

    ``C_s = max |rho^s - rb^s| / |rho - rb|^s`` over ``|rho - rb| >= delta_bar``,
    and ``c = min (rho^g - rb^g - g rb^(g-1) (rho - rb)) / (rho - rb)^2``
    over ``rho != rb``.
    """
    rb = p.rho_bar
    if not rb > 0:
        raise ConfigurationError("inequality_scan requires rho_bar > 0")
    if not 0 < delta_bar < rb:
        raise ConfigurationError("delta_bar must lie in (0, rho_bar)")
    rho = np.linspace(rho_range[0], rho_range[1], samples)
    m = {"gamma": p.gamma, "rho_bar": rb, "delta_bar": delta_bar, "samples": samples}
    far = rho[np.abs(rho - rb) >= delta_bar]
    for s in s_list:
        ratio = np.abs(far**s - rb**s) / np.abs(far - rb) ** s
        m[f"C_s{s:g}"] = float(ratio.max()) if ratio.size else math.nan
    r = rho[rho != rb]
    g = p.gamma
    # rb^g [(1+z)^g - 1 - g z] / (rb z)^2 with z = (r - rb)/rb; expm1/log1p
    # keep the numerator accurate next to rb where it is O(z^2)
    z = (r - rb) / rb
    with np.errstate(divide="ignore"):
        head = np.where(z > -1, np.expm1(g * np.log1p(np.maximum(z, -1.0))), -1.0)
    quad = rb ** (g - 2.0) * (head - g * z) / z**2
    m["c_quadratic"] = float(quad.min())
    out = _outcome(name, "scan", m)
    if output_dir is not None:
        emit(out, output_dir, {"params.gamma": g, "params.rho_bar": rb, "scan.s_list": list(s_list),
                               "scan.rho_min": rho_range[0], "scan.rho_max": rho_range[1],
                               "scan.samples": samples, "scan.delta_bar": delta_bar})
    return out


# -- parameter sweep --------------------------------------------------------------

def _point_name(key):
    a, g, r = key
    return f"sweep/a{a:g}_g{g:g}_r{r:g}"


def sweep_point(base, key, output_dir=None):
    """Decay + uniform-bound outcomes for one (alpha, gamma, rho_bar); never raises."""
    a, g, r = key
    name = _point_name(key)
    try:
        sc = base.with_values({"params.alpha": a, "params.gamma": g, "params.rho_bar": r,
                               "decay.s": None, "output.name": name})
        run = run_transient(sc.scheme, sc)
        dec = decay_experiment(sc, run=run)
        dec.name = name + "/decay"
        bnd = uniform_bound_experiment(sc, run=run)
        bnd.name = name + "/uniform_bound"
        if output_dir is not None:
            emit(dec, output_dir, sc.echo, run, sc.grid)
            emit(bnd, output_dir, sc.echo)
        return {"decay": dec, "uniform_bound": bnd}
    except NS1DError as exc:
        err = {"config_error": 1.0}
        fail = {kind: ExperimentOutcome(f"{name}/{kind}", kind, False, dict(err), error=str(exc))
                for kind in ("decay", "uniform_bound")}
        if output_dir is not None:
            for o in fail.values():
                emit(o, output_dir, dict(base.echo, **{"params.alpha": a, "params.gamma": g,
                                                       "params.rho_bar": r}))
        return fail


def parameter_sweep(base, alphas, gammas, rho_bars, workers=4, output_dir=None):
    """Run :func:`sweep_point` over the grid; results keyed by (alpha, gamma, rho_bar)."""
    keys = sorted({(float(a), float(g), float(r)) for a in alphas for g in gammas for r in rho_bars})
    workers = max(1, min(int(workers), len(keys)))
    if workers == 1:
        results = {k: sweep_point(base, k, output_dir) for k in keys}
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {k: pool.submit(sweep_point, base, k, output_dir) for k in keys}
            results = {k: futures[k].result() for k in keys}
    if output_dir is not None:
        write_sweep_table(results, Path(output_dir) / "sweep" / "summary.csv")
    return results


def write_sweep_table(results: dict, path):
    header = ("alpha", "gamma", "rho_bar", "decay_pass", "sup_dev_ratio", "bound_pass", "error")
    with io._open_for_write(path) as fh:
        fh.write(",".join(header) + "\n")
        for key in sorted(results):
            d, b = results[key]["decay"], results[key]["uniform_bound"]
            ratio = d.measured.get("sup_dev_ratio", math.nan)
            err = (d.error or "").replace(",", ";")
            fh.write(",".join([io.fmt(key[0]), io.fmt(key[1]), io.fmt(key[2]),
                               str(int(d.passed)), io.fmt(ratio), str(int(b.passed)), err]) + "\n")
