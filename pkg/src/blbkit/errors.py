"""Exception hierarchy shared across the toolkit."""


class BlbkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(BlbkitError, ValueError):
    """A type invariant or operation precondition was violated."""


class SamplingError(BlbkitError, RuntimeError):
    """A random draw could not produce a usable sample."""


class EstimationError(BlbkitError, RuntimeError):
    """An estimator failed: rank deficiency, non-convergence, or bad output."""


class IngestError(BlbkitError, ValueError):
    """A dataset file could not be parsed."""
