"""Exception hierarchy shared across the package."""


class GpidError(Exception):
    """Base class for all package errors."""


class ValidationError(GpidError):
    """Malformed or out-of-contract input (bad shapes, non-finite values, bad ranges)."""


class NumericalError(GpidError):
    """A required matrix property failed numerically (singular, not PD, NaN iterate)."""


class ModelError(GpidError):
    """Statistically inconsistent input, e.g. marginals implying an indefinite noise."""


class DomainError(GpidError):
    """Argument outside an operation's mathematical domain (e.g. infeasible sigma_off)."""


class ContractError(GpidError):
    """Operation called on an object that cannot support it (e.g. pairwise-only model)."""


class IntegrityError(GpidError):
    """Internal consistency check failed; signals a solver or reduction bug."""
