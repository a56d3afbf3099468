import numpy as np
import pytest
from hypothesis import settings

from ns1d import FluidParams, FluidState, Grid1D
from ns1d.config import scenario_from_dict

settings.register_profile("ns1d", deadline=None, max_examples=60)
settings.load_profile("ns1d")


def state_from(grid, rho_fn, u_fn=None, t=0.0):
    x = np.asarray(grid.x)
    rho = rho_fn(x) * np.ones_like(x)
    u = np.zeros_like(x) if u_fn is None else u_fn(x) * np.ones_like(x)
    return FluidState(rho, u, t)


def scenario(**kw):
    """Scenario from keyword shorthands like ``alpha=1`` or ``scheme__t_end=2``."""
    base = {"params.alpha": 1.0, "params.gamma": 2.0, "params.rho_bar": 1.0,
            "grid.M": 10.0, "grid.n": 128, "scheme.t_end": 1.0}
    short = {"alpha": "params.alpha", "gamma": "params.gamma", "rho_bar": "params.rho_bar",
             "eps": "params.eps_reg", "M": "grid.M", "n": "grid.n", "t_end": "scheme.t_end",
             "kind": "profile.kind", "cfl": "scheme.cfl", "every": "scheme.output_every"}
    for k, v in kw.items():
        base[short.get(k, k.replace("__", "."))] = v
    return scenario_from_dict(base)


@pytest.fixture
def shallow():
    return FluidParams(alpha=1.0, gamma=2.0, rho_bar=1.0)


@pytest.fixture
def grid_unit():
    return Grid1D(1.0, 400)


# criterion lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
