"""Exception taxonomy shared across the package.

ConfigError means the caller supplied an invalid configuration (CLI exit 2);
GuardError means a resource guard refused the computation (CLI exit 3).
"""


class ConfigError(ValueError):
    """Invalid configuration or operation arguments."""


class GuardError(RuntimeError):
    """A size/enumeration guard refused to run the computation."""


class CapacityLimitError(GuardError):
    """Lattice too large for dense integer indexing."""
