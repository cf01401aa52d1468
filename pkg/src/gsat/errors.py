"""Exception types raised by the tree library and the benchmark harness."""


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (unsorted input, key out of bounds, ...)."""


class ConfigurationError(ValueError):
    """Unknown tree/workload/algebra name or malformed benchmark configuration."""


class ResourceError(RuntimeError):
    """The requested benchmark does not fit in the available memory."""
