"""Exception types raised by the package."""


class ConfigurationError(ValueError):
    """Invalid constants, sizes or parameters."""


class SolverError(RuntimeError):
    """The LP engine failed to converge; distinct from infeasibility."""
