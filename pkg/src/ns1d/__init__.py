"""1D isentropic Navier-Stokes with density-dependent viscosity.

Simulator plus diagnostics for the energy and BD-entropy functionals,
long-time decay towards the far-field density, and vacuum closing.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DomainError,
    NumericalError,
    PreconditionError,
    RunError,
)
from .model import (  # noqa: E402
    FluidParams,
    FluidState,
    Grid1D,
    InitialProfile,
    admissibility_report,
    build_initial_data,
    pressure,
    rho_psi,
    viscosity,
)
from .functionals import DecayMetricParams, FunctionalRecord, record_functionals  # noqa: E402
from .solver import SchemeConfig, cfl_dt, make_mms, run_transient, step  # noqa: E402
