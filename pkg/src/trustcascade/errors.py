"""Exception types shared across the package."""


class TrustCascadeError(Exception):
    """Base class for all package errors."""


class TopologyError(TrustCascadeError):
    """Invalid topology parameters (bad size, bridge index out of range)."""


class ContractError(TrustCascadeError):
    """Caller violated an operation precondition."""


class UnsupportedTopologyError(TrustCascadeError):
    """Operation is undefined on this topology (e.g. cyclic graph, star stratification)."""


class EstimationError(TrustCascadeError):
    """A requested statistic is undefined (e.g. FTA on a graph with no normal nodes)."""


class SingularityError(TrustCascadeError):
    """Closed form evaluated at a parameter where a denominator vanishes."""


class BudgetExceededError(TrustCascadeError):
    """Exhaustive enumeration would exceed the configured budget."""


class ConfigError(TrustCascadeError):
    """Malformed experiment configuration."""
