"""Exception hierarchy shared by the solver, experiments and CLI."""


class NS1DError(Exception):
    """Base class for every error raised by ns1d."""


class ConfigurationError(NS1DError, ValueError):
    """Invalid parameters, profile/regime mismatch, or malformed config."""


class DomainError(NS1DError, ValueError):
    """A constitutive law was evaluated outside its domain (e.g. rho < 0)."""


class NumericalError(NS1DError, ArithmeticError):
    """Non-finite wave speed, singular tridiagonal system, and the like."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class PreconditionError(NS1DError, ValueError):
    """An operation was called with arguments violating its contract."""


class RunError(NS1DError):
    """A transient run aborted; carries the last good record and state."""

    def __init__(self, message, records=None, state=None):
        super().__init__(message)
        self.records = records if records is not None else []
        self.state = state
