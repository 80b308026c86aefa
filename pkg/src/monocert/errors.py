"""Exception types shared across the package."""


class UsageError(ValueError):
    """Caller passed inconsistent arguments (dimension mismatch, bad config, ...)."""


class ConfigError(UsageError):
    """Malformed configuration file; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class StateEscapeError(RuntimeError):
    """A simulated step left the declared state set.

    Signals that the supplied model is not invariant on its state set;
    simulation halts rather than producing out-of-domain data.
    """

    def __init__(self, state, step: int):
        self.state = state
        self.step = step
        super().__init__(f"state escaped the state set at step {step}: {state}")


class TailAssumptionError(UsageError):
    """A trajectory's tail does not satisfy the ordering its use requires."""


class SimplexStallError(RuntimeError):
    """The LP solver hit its iteration cap without converging."""
