"""Flat ``section.key = value`` scenario documents.

Example::

    # shallow-water bump
    params.alpha = 1
    params.gamma = 2
    params.rho_bar = 1
    grid.M = 40
    grid.n = 2048
    scheme.t_end = 200
    profile.kind = gaussian_bump

Blank lines and ``#`` comments are ignored. Unknown keys are errors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .functionals import DecayMetricParams
from .model import FluidParams, Grid1D, InitialProfile, build_initial_data
from .solver import SchemeConfig

ENV_OUTPUT_DIR = "NS1D_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "ns1d_out"


def _float(v):
    return float(v)


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _bool(v):
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _floats(v):
    return tuple(float(x) for x in v.replace(",", " ").split())


def _str(v):
    return v.strip()


# key -> (parser, default); REQUIRED marks mandatory keys
REQUIRED = object()
SCHEMA = {
    "params.alpha": (_float, REQUIRED),
    "params.gamma": (_float, REQUIRED),
    "params.rho_bar": (_float, REQUIRED),
    "params.eps_reg": (_float, 0.0),
    "params.theta": (_float, 0.25),
    "params.delta_moment": (_float, 0.5),
    "params.floor_c0": (_float, 1.0),
    "grid.M": (_float, REQUIRED),
    "grid.n": (_int, REQUIRED),
    "profile.kind": (_str, "constant"),
    "profile.amplitude": (_float, 0.5),
    "profile.center": (_float, 0.0),
    "profile.width": (_float, 1.0),
    "profile.edge": (_float, 1.0),
    "profile.u0_kind": (_str, "zero"),
    "profile.u0_amplitude": (_float, 0.0),
    "profile.u0_center": (_float, 0.0),
    "profile.u0_width": (_float, 1.0),
    "profile.table": (_str, ""),
    "scheme.cfl": (_float, 0.45),
    "scheme.dt_max": (_float, 0.05),
    "scheme.rho_floor_eval": (_float, 1e-12),
    "scheme.mms": (_bool, False),
    "scheme.t_end": (_float, REQUIRED),
    "scheme.output_every": (_float, None),
    "scheme.snapshot_times": (_floats, ()),
    "decay.s": (_float, None),
    "decay.l": (_float, 1.0),
    "decay.threshold": (_float, 0.1),
    "decay.f_fraction": (_float, 0.01),
    "vacuum.rho1": (_float, None),
    "bounds.growth_tol": (_float, 1e-3),
    "bounds.eps_probe": (_bool, False),
    "bounds.eps_tol": (_float, 0.05),
    "scan.s_list": (_floats, (0.5, 1.5, 2.0)),
    "scan.rho_min": (_float, 0.0),
    "scan.rho_max": (_float, 10.0),
    "scan.samples": (_int, 100_000),
    "scan.delta_bar": (_float, 0.5),
    "sweep.alpha": (_floats, ()),
    "sweep.gamma": (_floats, ()),
    "sweep.rho_bar": (_floats, ()),
    "sweep.workers": (_int, 4),
    "output.dir": (_str, ""),
    "output.name": (_str, ""),
}


@dataclass(frozen=True)
class ExperimentSettings:
    decay_threshold: float = 0.1
    f_fraction: float = 0.01
    rho1: float | None = None
    growth_tol: float = 1e-3
    eps_probe: bool = False
    eps_tol: float = 0.05
    scan_s_list: tuple = (0.5, 1.5, 2.0)
    scan_range: tuple = (0.0, 10.0)
    scan_samples: int = 100_000
    delta_bar: float = 0.5
    sweep_alpha: tuple = ()
    sweep_gamma: tuple = ()
    sweep_rho_bar: tuple = ()
    workers: int = 4


@dataclass(frozen=True)
class ScenarioConfig:
    params: FluidParams
    grid: Grid1D
    profile: InitialProfile
    scheme: SchemeConfig
    decay_params: DecayMetricParams
    output_dir: str = DEFAULT_OUTPUT_DIR
    name: str = "scenario"
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    echo: dict = field(default_factory=dict, compare=False)

    def initial_state(self):
        return build_initial_data(self.profile, self.grid, self.params)

    def with_values(self, updates: dict) -> "ScenarioConfig":
        """Copy with some ``section.key`` values replaced, fully revalidated."""
        values = {k: tuple(v) if isinstance(v, list) else v for k, v in self.echo.items()}
        for key in updates:
            if key not in SCHEMA:
                raise ConfigurationError(f"unknown key {key!r}")
        values.update(updates)
        return build_scenario(values, output_dir=values.get("output.dir"))


def parse_document(text: str) -> dict:
    """Split a document into ``{key: raw_value}``; syntax errors carry line numbers."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected 'section.key = value', got {line.strip()!r}")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key or not value:
            raise ConfigurationError(f"line {lineno}: empty key or value")
        if key in raw:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)
    return raw


def _read_table(path):
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except OSError as exc:
        raise ConfigurationError(f"profile.table: cannot read {path}: {exc}") from exc
    if data.shape[1] != 3:
        raise ConfigurationError("profile.table must have three columns: x rho u")
    return tuple(data[:, 0]), tuple(data[:, 1]), tuple(data[:, 2])


def parse_config(text: str, base_dir=None, output_dir=None) -> ScenarioConfig:
    """Parse and validate a scenario document.

    ``output_dir`` (e.g. from ``--output-dir``) overrides ``output.dir``,
    which overrides ``$NS1D_OUTPUT_DIR``.
    """
    raw = parse_document(text)
    values = {}
    for key, (value, lineno) in raw.items():
        if key not in SCHEMA:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigurationError(f"missing required key {key!r}")
            values[key] = default
    return build_scenario(values, base_dir=base_dir, output_dir=output_dir)


def build_scenario(values: dict, base_dir=None, output_dir=None) -> ScenarioConfig:
    v = values
    params = FluidParams(
        alpha=v["params.alpha"], gamma=v["params.gamma"], rho_bar=v["params.rho_bar"],
        eps_reg=v["params.eps_reg"], theta=v["params.theta"],
        delta_moment=v["params.delta_moment"], floor_c0=v["params.floor_c0"],
    )
    grid = Grid1D(v["grid.M"], v["grid.n"])
    table = ((), (), ())
    if v["profile.table"]:
        path = Path(v["profile.table"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        v["profile.table"] = str(path)
        table = _read_table(path)
    profile = InitialProfile(
        kind=v["profile.kind"], amplitude=v["profile.amplitude"], center=v["profile.center"],
        width=v["profile.width"], edge=v["profile.edge"], u0_kind=v["profile.u0_kind"],
        u0_amplitude=v["profile.u0_amplitude"], u0_center=v["profile.u0_center"],
        u0_width=v["profile.u0_width"], table_x=table[0], table_rho=table[1], table_u=table[2],
    )
    if profile.kind == "vacuum_well" and params.alpha <= 0.5:
        raise ConfigurationError("profile.kind: vacuum requires alpha>1/2")
    t_end = v["scheme.t_end"]
    output_every = v["scheme.output_every"]
    if output_every is None:
        output_every = t_end / 100.0 if t_end > 0 else 1.0
        v["scheme.output_every"] = output_every
    scheme = SchemeConfig(
        cfl_number=v["scheme.cfl"], dt_max=v["scheme.dt_max"],
        rho_floor_eval=v["scheme.rho_floor_eval"], mms_enabled=v["scheme.mms"],
        t_end=t_end, output_every=output_every, snapshot_times=v["scheme.snapshot_times"],
    )
    if v["decay.s"] is None:
        dp = DecayMetricParams.default_for(params, v["decay.l"])
    else:
        dp = DecayMetricParams(v["decay.s"], v["decay.l"])
    dp.validate(params)
    exp = ExperimentSettings(
        decay_threshold=v["decay.threshold"], f_fraction=v["decay.f_fraction"],
        rho1=v["vacuum.rho1"], growth_tol=v["bounds.growth_tol"],
        eps_probe=v["bounds.eps_probe"], eps_tol=v["bounds.eps_tol"],
        scan_s_list=v["scan.s_list"], scan_range=(v["scan.rho_min"], v["scan.rho_max"]),
        scan_samples=v["scan.samples"], delta_bar=v["scan.delta_bar"],
        sweep_alpha=v["sweep.alpha"], sweep_gamma=v["sweep.gamma"],
        sweep_rho_bar=v["sweep.rho_bar"], workers=v["sweep.workers"],
    )
    out = output_dir or v["output.dir"] or os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR
    echo = {k: (list(x) if isinstance(x, tuple) else x) for k, x in sorted(v.items())}
    echo["output.dir"] = str(out)
    return ScenarioConfig(
        params=params, grid=grid, profile=profile, scheme=scheme, decay_params=dp,
        output_dir=str(out), name=v["output.name"] or "scenario", experiment=exp, echo=echo,
    )


def scenario_from_dict(overrides: dict, output_dir=None) -> ScenarioConfig:
    """Build a scenario programmatically from ``{key: value}`` (already typed)."""
    values = {}
    for key, value in overrides.items():
        if key not in SCHEMA:
            raise ConfigurationError(f"unknown key {key!r}")
        values[key] = value
    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigurationError(f"missing required key {key!r}")
            values[key] = default
    return build_scenario(values, output_dir=output_dir)


def load_config(path, output_dir=None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent, output_dir=output_dir)
