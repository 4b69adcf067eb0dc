"""Exception hierarchy shared across the package."""


class AdaptzError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AdaptzError, ValueError):
    """Invalid problem or experiment configuration."""


class UsageError(AdaptzError, ValueError):
    """An operation was called with inputs outside its contract."""


class DegenerateDesignError(AdaptzError):
    """The estimating equations are singular (e.g. an arm was never explored)."""


class DegenerateProbabilityError(AdaptzError):
    """A weighted covariance is not positive definite."""


class RootBracketingError(AdaptzError):
    """No sign change of a scalar estimating equation could be bracketed."""
