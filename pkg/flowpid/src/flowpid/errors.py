"""Exception hierarchy; callers can catch FlowpidError for anything raised here."""


class FlowpidError(Exception):
    """Base class for all flowpid errors."""


class ValidationError(FlowpidError):
    """Malformed input: bad config values, files, shapes, or CLI arguments."""


class TrainingError(FlowpidError):
    """Optimization failure, e.g. the loss became non-finite mid-run."""
